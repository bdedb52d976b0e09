//! Discrete base paths and the reduced action.
//!
//! A path is sampled on the uniform grid `s_i = i/N`. Coefficient integrals
//! `a = int A/H ds`, `b = int B/H ds`, `c = int C/H ds` use the composite
//! trapezoid rule over nodes; the kinetic energy `int <xdot, xdot>_R ds` uses
//! the midpoint rule on segment differences, with the base metric evaluated
//! at segment midpoints. Fiber reconstruction (in `connect`) reuses the same
//! trapezoid weights, so the endpoint identities hold to rounding rather than
//! to quadrature accuracy.
//!
//! With `Delta_y`, `Delta_t` the fiber displacements of the boundary data,
//!
//! ```text
//! J = kinetic/2 + (Delta_y^2 a + 2 Delta_y Delta_t b - Delta_t^2 c) / (2 ell),
//! ell = b^2 + a c,
//! ```
//!
//! and in the eigenframe of `[[a, b], [b, -c]]` the fiber term diagonalizes to
//! `-Delta_plus^2/(2 lam_minus) - Delta_minus^2/(2 lam_plus)`. The reduction
//! divides by `ell`, so `|ell|` at or below the floor is a hard error
//! ([`crate::Error::DegenerateL`]), never regularized.

use crate::error::{Error, Result};
use crate::linalg;
use crate::spacetime::SpacetimeSpec;

/// Paths with `|ell|` at or below this floor are treated as degenerate.
pub const DEFAULT_ELL_FLOOR: f64 = 1e-10;

/// A base path sampled on the uniform grid `s_i = i/N`, `N >= 2` segments.
/// Endpoints are fixed at construction; only interior nodes may move.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    dim: usize,
    nodes: Vec<f64>,
}

impl DiscretePath {
    pub fn from_nodes(dim: usize, nodes: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter { name: "dim", msg: "must be at least 1".into() });
        }
        if nodes.len() % dim != 0 || nodes.len() / dim < 3 {
            return Err(Error::InvalidParameter {
                name: "nodes",
                msg: format!(
                    "need at least 3 nodes of dimension {dim}, got {} values",
                    nodes.len()
                ),
            });
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nodes",
                msg: "non-finite coordinate".into(),
            });
        }
        Ok(DiscretePath { dim, nodes })
    }

    /// The straight segment from `from` to `to` on `segments` segments.
    pub fn straight(from: &[f64], to: &[f64], segments: usize) -> Result<Self> {
        if from.len() != to.len() || from.is_empty() {
            return Err(Error::InvalidParameter {
                name: "endpoints",
                msg: "dimension mismatch".into(),
            });
        }
        if segments < 2 {
            return Err(Error::InvalidParameter {
                name: "segments",
                msg: format!("need at least 2, got {segments}"),
            });
        }
        let d = from.len();
        let mut nodes = Vec::with_capacity((segments + 1) * d);
        for i in 0..=segments {
            let s = i as f64 / segments as f64;
            for k in 0..d {
                nodes.push(from[k] + s * (to[k] - from[k]));
            }
        }
        Ok(DiscretePath { dim: d, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() / self.dim - 1
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn first(&self) -> &[f64] {
        self.node(0)
    }

    pub fn last(&self) -> &[f64] {
        self.node(self.segments())
    }

    pub fn grid(&self, i: usize) -> f64 {
        i as f64 / self.segments() as f64
    }

    /// Interior nodes flattened to `(N-1)*dim` values.
    pub fn interior(&self) -> Vec<f64> {
        self.nodes[self.dim..self.nodes.len() - self.dim].to_vec()
    }

    /// Overwrite the interior nodes; endpoints stay put.
    pub fn set_interior(&mut self, flat: &[f64]) {
        let inner = self.nodes.len() - 2 * self.dim;
        assert_eq!(flat.len(), inner, "interior size mismatch");
        self.nodes[self.dim..self.dim + inner].copy_from_slice(flat);
    }

    /// The same polyline sampled at `2N` segments by midpoint injection.
    pub fn refine_midpoints(&self) -> DiscretePath {
        let n = self.segments();
        let d = self.dim;
        let mut nodes = Vec::with_capacity((2 * n + 1) * d);
        for i in 0..n {
            let a = self.node(i);
            let b = self.node(i + 1);
            nodes.extend_from_slice(a);
            for k in 0..d {
                nodes.push(0.5 * (a[k] + b[k]));
            }
        }
        nodes.extend_from_slice(self.last());
        DiscretePath { dim: d, nodes }
    }
}

/// Boundary displacements of the fiber coordinates: `delta_y = y_q - y_p`,
/// `delta_t = t_q - t_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub delta_y: f64,
    pub delta_t: f64,
}

/// Path-level integrals feeding the reduced action and its bounds.
#[derive(Debug, Clone)]
pub struct PathFunctionals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `ell = b^2 + a c = -lam_plus * lam_minus`.
    pub ell: f64,
    pub lam_plus: f64,
    pub lam_minus: f64,
    /// `int_0^1 <xdot, xdot>_R ds` by the midpoint rule.
    pub kinetic: f64,
}

fn check_path(spec: &SpacetimeSpec, path: &DiscretePath) -> Result<()> {
    if spec.dim() != path.dim() {
        return Err(Error::DimensionMismatch { expect: spec.dim(), got: path.dim() });
    }
    Ok(())
}

/// Trapezoid weight of node `i` on an `n`-segment grid, including the `1/n`
/// grid factor.
fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        0.5 / n as f64
    } else {
        1.0 / n as f64
    }
}

/// Kinetic energy of the polyline under the base metric.
fn kinetic_energy(spec: &SpacetimeSpec, path: &DiscretePath) -> Result<f64> {
    let n = path.segments();
    let d = path.dim();
    let nf = n as f64;
    let mut k = 0.0;
    if spec.base_metric().is_euclidean() {
        for i in 0..n {
            let (p, q) = (path.node(i), path.node(i + 1));
            let mut s = 0.0;
            for j in 0..d {
                let dx = q[j] - p[j];
                s += dx * dx;
            }
            k += nf * s;
        }
    } else {
        let mut mid = vec![0.0; d];
        for i in 0..n {
            let (p, q) = (path.node(i), path.node(i + 1));
            for j in 0..d {
                mid[j] = 0.5 * (p[j] + q[j]);
            }
            let g = spec.base_metric().sample(&mid)?;
            let mut s = 0.0;
            for r in 0..d {
                for c in 0..d {
                    s += g[r * d + c] * (q[r] - p[r]) * (q[c] - p[c]);
                }
            }
            k += nf * s;
        }
    }
    Ok(k)
}

/// Trapezoid integrals of `A/H`, `B/H`, `C/H` plus the kinetic term.
pub fn path_integrals(spec: &SpacetimeSpec, path: &DiscretePath) -> Result<PathFunctionals> {
    check_path(spec, path)?;
    let n = path.segments();
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for i in 0..=n {
        let w = trapezoid_weight(i, n);
        let (av, bv, cv, h) = spec.sample_values(path.node(i))?;
        a += w * av / h;
        b += w * bv / h;
        c += w * cv / h;
    }
    let ell = b * b + a * c;
    let (lam_plus, lam_minus, _) = linalg::sym2x2_spectral(a, b, -c);
    let kinetic = kinetic_energy(spec, path)?;
    Ok(PathFunctionals { a, b, c, ell, lam_plus, lam_minus, kinetic })
}

fn fiber_term(pf: &PathFunctionals, bnd: &BoundaryData, floor: f64) -> Result<f64> {
    if pf.ell.abs() <= floor {
        return Err(Error::DegenerateL { ell: pf.ell.abs(), floor });
    }
    let p = bnd.delta_y * bnd.delta_y * pf.a + 2.0 * bnd.delta_y * bnd.delta_t * pf.b
        - bnd.delta_t * bnd.delta_t * pf.c;
    Ok(p / (2.0 * pf.ell))
}

/// The reduced action `J` with the default degeneracy floor.
pub fn reduced_action(spec: &SpacetimeSpec, path: &DiscretePath, bnd: &BoundaryData) -> Result<f64> {
    reduced_action_with_floor(spec, path, bnd, DEFAULT_ELL_FLOOR)
}

pub fn reduced_action_with_floor(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    bnd: &BoundaryData,
    floor: f64,
) -> Result<f64> {
    let pf = path_integrals(spec, path)?;
    Ok(0.5 * pf.kinetic + fiber_term(&pf, bnd, floor)?)
}

/// The reduced action for a static spec (`B = 0`, `C = beta > 0` at every
/// node): `J = kinetic/2 - (delta_t^2 / 2) / int (1/beta) ds`. Only the
/// squared time displacement enters.
pub fn static_reduced_action(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    delta_t: f64,
) -> Result<f64> {
    check_path(spec, path)?;
    let n = path.segments();
    let mut inv_beta = 0.0;
    for i in 0..=n {
        let x = path.node(i);
        let (a, b, c, _) = spec.sample_values(x)?;
        if b != 0.0 {
            return Err(Error::Invalid(format!(
                "static form requires B = 0, found B = {b:.6e} at x = {x:?}"
            )));
        }
        if !(c > 0.0) {
            return Err(Error::Invalid(format!(
                "static form requires beta = C > 0, found {c:.6e} at x = {x:?}"
            )));
        }
        let _ = a;
        inv_beta += trapezoid_weight(i, n) / c;
    }
    let kinetic = kinetic_energy(spec, path)?;
    Ok(0.5 * kinetic - 0.5 * delta_t * delta_t / inv_beta)
}

/// `J` rewritten in the eigenframe of the integrated matrix `[[a, b], [b, -c]]`.
#[derive(Debug, Clone)]
pub struct DiagonalizedAction {
    pub j: f64,
    /// Components of `(delta_y, delta_t)` in the eigenframe.
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub lam_plus: f64,
    pub lam_minus: f64,
}

pub fn diagonalized_action(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    bnd: &BoundaryData,
) -> Result<DiagonalizedAction> {
    let pf = path_integrals(spec, path)?;
    if pf.ell.abs() <= DEFAULT_ELL_FLOOR {
        return Err(Error::DegenerateL { ell: pf.ell.abs(), floor: DEFAULT_ELL_FLOOR });
    }
    let (lam_plus, lam_minus, q) = linalg::sym2x2_spectral(pf.a, pf.b, -pf.c);
    let delta_plus = q[0][0] * bnd.delta_y + q[1][0] * bnd.delta_t;
    let delta_minus = q[0][1] * bnd.delta_y + q[1][1] * bnd.delta_t;
    let j = 0.5 * pf.kinetic - 0.5 * delta_plus * delta_plus / lam_minus
        - 0.5 * delta_minus * delta_minus / lam_plus;
    Ok(DiagonalizedAction { j, delta_plus, delta_minus, lam_plus, lam_minus })
}

/// `J` together with its exact gradient with respect to the interior nodes,
/// flattened to `(N-1)*dim` values in node-major order.
pub fn action_value_and_gradient(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    bnd: &BoundaryData,
    floor: f64,
) -> Result<(f64, Vec<f64>)> {
    check_path(spec, path)?;
    let n = path.segments();
    let d = path.dim();
    let nf = n as f64;

    // Node samples with coefficient gradients.
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = 0.0;
    let mut ratio_grads: Vec<[Vec<f64>; 3]> = Vec::with_capacity(n - 1);
    for i in 0..=n {
        let w = trapezoid_weight(i, n);
        let s = spec.sample_coefficients(path.node(i))?;
        a += w * s.a / s.h;
        b += w * s.b / s.h;
        c += w * s.c / s.h;
        if i > 0 && i < n {
            let gh = s.grad_h();
            let ratio_grad = |v: f64, gv: &[f64]| -> Vec<f64> {
                gv.iter().zip(&gh).map(|(g, ghk)| (s.h * g - v * ghk) / (s.h * s.h)).collect()
            };
            ratio_grads.push([
                ratio_grad(s.a, &s.grad_a),
                ratio_grad(s.b, &s.grad_b),
                ratio_grad(s.c, &s.grad_c),
            ]);
        }
    }
    let ell = b * b + a * c;
    if ell.abs() <= floor {
        return Err(Error::DegenerateL { ell: ell.abs(), floor });
    }
    let p = bnd.delta_y * bnd.delta_y * a + 2.0 * bnd.delta_y * bnd.delta_t * b
        - bnd.delta_t * bnd.delta_t * c;

    let kinetic = kinetic_energy(spec, path)?;
    let j = 0.5 * kinetic + p / (2.0 * ell);

    let mut grad = vec![0.0; (n - 1) * d];

    // Kinetic part.
    if spec.base_metric().is_euclidean() {
        for jn in 1..n {
            let (prev, here, next) = (path.node(jn - 1), path.node(jn), path.node(jn + 1));
            for k in 0..d {
                grad[(jn - 1) * d + k] = nf * (2.0 * here[k] - prev[k] - next[k]);
            }
        }
    } else {
        let mut mid = vec![0.0; d];
        for seg in 0..n {
            let (pn, qn) = (path.node(seg), path.node(seg + 1));
            for k in 0..d {
                mid[k] = 0.5 * (pn[k] + qn[k]);
            }
            let (g, dg) = spec.base_metric().sample_with_gradients(&mid)?;
            let mut gdelta = vec![0.0; d];
            for r in 0..d {
                for cc in 0..d {
                    gdelta[r] += g[r * d + cc] * (qn[cc] - pn[cc]);
                }
            }
            let mut quad_k = vec![0.0; d];
            for k in 0..d {
                let mut s = 0.0;
                for r in 0..d {
                    for cc in 0..d {
                        s += dg[k][r * d + cc] * (qn[r] - pn[r]) * (qn[cc] - pn[cc]);
                    }
                }
                quad_k[k] = s;
            }
            // d(K/2)/dx for the two nodes bounding this segment; endpoints are
            // fixed so only interior contributions are stored.
            if seg > 0 {
                for k in 0..d {
                    grad[(seg - 1) * d + k] += -nf * gdelta[k] + 0.25 * nf * quad_k[k];
                }
            }
            if seg + 1 < n {
                for k in 0..d {
                    grad[seg * d + k] += nf * gdelta[k] + 0.25 * nf * quad_k[k];
                }
            }
        }
    }

    // Fiber part: dF = [dy^2 da + 2 dy dt db - dt^2 dc]/(2 ell)
    //                - P (2 b db + a dc + c da)/(2 ell^2).
    let w_int = 1.0 / nf;
    for jn in 1..n {
        let [ga, gb, gc] = &ratio_grads[jn - 1];
        for k in 0..d {
            let da = w_int * ga[k];
            let db = w_int * gb[k];
            let dc = w_int * gc[k];
            let dp = bnd.delta_y * bnd.delta_y * da + 2.0 * bnd.delta_y * bnd.delta_t * db
                - bnd.delta_t * bnd.delta_t * dc;
            let dell = 2.0 * b * db + a * dc + c * da;
            grad[(jn - 1) * d + k] += dp / (2.0 * ell) - p * dell / (2.0 * ell * ell);
        }
    }

    Ok((j, grad))
}

/// Gradient of the reduced action with respect to the interior nodes.
pub fn action_gradient(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    bnd: &BoundaryData,
) -> Result<Vec<f64>> {
    Ok(action_value_and_gradient(spec, path, bnd, DEFAULT_ELL_FLOOR)?.1)
}

/// The two sides of the connectedness growth test for one path:
/// `m = max(a, -c)` and `h = int ds / (lambda d^2(x(s), x0) + k)` with
/// Euclidean base distance.
pub fn path_m_and_h(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    x0: &[f64],
    lambda: f64,
    k: f64,
) -> Result<(f64, f64)> {
    check_path(spec, path)?;
    if x0.len() != path.dim() {
        return Err(Error::DimensionMismatch { expect: path.dim(), got: x0.len() });
    }
    let pf = path_integrals(spec, path)?;
    let m = pf.a.max(-pf.c);
    let n = path.segments();
    let mut h = 0.0;
    for i in 0..=n {
        let node = path.node(i);
        let d2: f64 = node.iter().zip(x0).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
        let den = lambda * d2 + k;
        if !(den > 0.0) {
            return Err(Error::Invalid(format!(
                "growth denominator lambda*d^2 + k = {den:.6e} is not positive at x = {node:?}"
            )));
        }
        h += trapezoid_weight(i, n) / den;
    }
    Ok((m, h))
}
