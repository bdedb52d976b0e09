//! Boundary-value geodesics by action minimization.
//!
//! Two events are joined by minimizing the reduced action over discrete base
//! paths with nonlinear conjugate gradients, then filling in the fiber
//! coordinates by quadrature. The fiber fill-in is linear in two multipliers
//! determined by the boundary displacements, and those multipliers are exactly
//! the momenta conjugate to the two fiber directions, so the reconstructed
//! curve carries its Killing constants for free.
//!
//! Nonconvergence, degeneracy of `ell` on every restart, and similar numerical
//! outcomes are reported inside [`GeodesicSolution`], not as `Err`: an error
//! from [`minimize_action`] always means the inputs were rejected.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pathspace::{
    action_value_and_gradient, reduced_action_with_floor, BoundaryData, DiscretePath,
    DEFAULT_ELL_FLOOR,
};
use crate::spacetime::SpacetimeSpec;

/// A spacetime event: base point plus the two fiber coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub x: Vec<f64>,
    pub y: f64,
    pub t: f64,
}

/// Solver knobs. `restarts` counts perturbed starts tried after the straight
/// segment, so `restarts = 4` runs at most five minimizations.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub segments: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub ell_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            segments: 64,
            max_iters: 2000,
            grad_tol: 1e-8,
            restarts: 4,
            seed: 0,
            ell_floor: DEFAULT_ELL_FLOOR,
        }
    }
}

/// Why a minimization run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Sup-norm of the gradient reached the tolerance.
    GradTol,
    /// Iteration budget exhausted.
    IterLimit,
    /// Backtracking found no acceptable step.
    Stall,
    /// The action or its gradient stopped being evaluable (degenerate `ell`,
    /// certificate violation, non-finite values).
    Breakdown,
}

/// Outcome of one start (initial path) of the minimizer.
#[derive(Debug, Clone)]
pub struct RestartRecord {
    pub index: usize,
    pub iterations: usize,
    pub j: f64,
    pub grad_norm: f64,
    pub reason: StopReason,
}

/// Fiber fill-in along a base path.
#[derive(Debug, Clone)]
pub struct FiberCurves {
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    /// Momentum conjugate to `y`: `c1 = A ydot + B tdot`.
    pub c1: f64,
    /// Momentum conjugate to `t`: `c2 = B ydot - C tdot`.
    pub c2: f64,
}

/// Result of a boundary-value solve.
#[derive(Debug, Clone)]
pub struct GeodesicSolution {
    pub converged: bool,
    pub reason: StopReason,
    /// Iterations used by the winning start.
    pub iterations: usize,
    /// Reduced action at the final path.
    pub j: f64,
    /// Full-curve action of the reconstructed geodesic (`f = 2 J` up to
    /// quadrature error).
    pub f: f64,
    /// Geodesic-equation defect of the final path, see [`geodesic_residual`].
    pub residual: f64,
    pub grad_norm: f64,
    pub path: DiscretePath,
    /// Fiber curves at the grid nodes; `None` only when every start broke down.
    pub fibers: Option<FiberCurves>,
    /// Reduced action after each accepted step of the winning start.
    pub j_history: Vec<f64>,
    pub restarts: Vec<RestartRecord>,
}

struct RunOutcome {
    interior: Vec<f64>,
    j: f64,
    grad_norm: f64,
    iterations: usize,
    reason: StopReason,
    history: Vec<f64>,
}

const ARMIJO_SLOPE: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-16;

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Apply the inverse of the reference kinetic Hessian: coordinate-wise Thomas
/// solves of `N (2 u_j - u_{j-1} - u_{j+1}) = r_j` with fixed ends. The
/// kinetic term dominates the action's curvature and conditions it like the
/// second-difference operator, so this preconditioner makes the flat problem
/// exactly Newton and keeps the conjugate-gradient iteration grid-independent.
fn apply_laplacian_inverse(r: &[f64], n: usize, d: usize) -> Vec<f64> {
    let rows = n - 1;
    let nf = n as f64;
    let mut out = vec![0.0; r.len()];
    let mut diag = vec![0.0; rows];
    let mut rhs = vec![0.0; rows];
    for k in 0..d {
        for j in 0..rows {
            rhs[j] = r[j * d + k];
        }
        diag[0] = 2.0 * nf;
        for j in 1..rows {
            let w = -nf / diag[j - 1];
            diag[j] = 2.0 * nf + w * nf;
            rhs[j] -= w * rhs[j - 1];
        }
        let mut u = vec![0.0; rows];
        u[rows - 1] = rhs[rows - 1] / diag[rows - 1];
        for j in (0..rows - 1).rev() {
            u[j] = (rhs[j] + nf * u[j + 1]) / diag[j];
        }
        for j in 0..rows {
            out[j * d + k] = u[j];
        }
    }
    out
}

/// One Polak-Ribiere run from the given interior configuration. Trial points
/// where the action cannot be evaluated are rejected by the line search;
/// breakdown is reported only when the current accepted point itself fails.
fn run_ncg(
    spec: &SpacetimeSpec,
    template: &DiscretePath,
    bnd: &BoundaryData,
    cfg: &SolverConfig,
    start: Vec<f64>,
) -> RunOutcome {
    let mut path = template.clone();
    let mut z = start;
    path.set_interior(&z);

    let fail = |z: Vec<f64>, iters: usize, history: Vec<f64>| RunOutcome {
        interior: z,
        j: f64::NAN,
        grad_norm: f64::NAN,
        iterations: iters,
        reason: StopReason::Breakdown,
        history,
    };

    let n = template.segments();
    let d = template.dim();

    let (mut j, mut g) = match action_value_and_gradient(spec, &path, bnd, cfg.ell_floor) {
        Ok(v) => v,
        Err(_) => return fail(z, 0, Vec::new()),
    };
    if !j.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return fail(z, 0, Vec::new());
    }

    let mut history = vec![j];
    let mut pg = apply_laplacian_inverse(&g, n, d);
    let mut dir: Vec<f64> = pg.iter().map(|v| -v).collect();
    let mut step = 1.0_f64;
    let mut trial = path.clone();

    for iter in 0..cfg.max_iters {
        let gnorm = sup_norm(&g);
        if gnorm <= cfg.grad_tol {
            return RunOutcome {
                interior: z,
                j,
                grad_norm: gnorm,
                iterations: iter,
                reason: StopReason::GradTol,
                history,
            };
        }

        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir = pg.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }

        // Backtracking with Armijo decrease; failed evaluations shrink too.
        let mut t = (step * 4.0).min(1.0);
        let mut accepted = None;
        while t >= MIN_STEP {
            let znew: Vec<f64> = z.iter().zip(&dir).map(|(zi, di)| zi + t * di).collect();
            trial.set_interior(&znew);
            match reduced_action_with_floor(spec, &trial, bnd, cfg.ell_floor) {
                Ok(jt) if jt.is_finite() && jt <= j + ARMIJO_SLOPE * t * slope => {
                    accepted = Some((znew, jt));
                    break;
                }
                _ => t *= BACKTRACK,
            }
        }
        let Some((znew, _)) = accepted else {
            return RunOutcome {
                interior: z,
                j,
                grad_norm: gnorm,
                iterations: iter,
                reason: StopReason::Stall,
                history,
            };
        };
        step = t;

        path.set_interior(&znew);
        let (jv, gnew) = match action_value_and_gradient(spec, &path, bnd, cfg.ell_floor) {
            Ok(v) => v,
            Err(_) => return fail(znew, iter + 1, history),
        };
        if gnew.iter().any(|v| !v.is_finite()) {
            return fail(znew, iter + 1, history);
        }

        // Preconditioned Polak-Ribiere with automatic reset.
        let pg_new = apply_laplacian_inverse(&gnew, n, d);
        let gpg = dot(&g, &pg);
        let beta = if gpg > 0.0 {
            ((dot(&gnew, &pg_new) - dot(&g, &pg_new)) / gpg).max(0.0)
        } else {
            0.0
        };
        for i in 0..dir.len() {
            dir[i] = -pg_new[i] + beta * dir[i];
        }

        z = znew;
        j = jv;
        g = gnew;
        pg = pg_new;
        history.push(j);
    }

    RunOutcome {
        interior: z,
        j,
        grad_norm: sup_norm(&g),
        iterations: cfg.max_iters,
        reason: StopReason::IterLimit,
        history,
    }
}

/// Straight start plus low-frequency sinusoidal bending, deterministic in the
/// seed. Mode amplitudes shrink with the mode number so perturbed starts stay
/// resolvable on the grid.
fn perturbed_interior(template: &DiscretePath, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = template.segments();
    let d = template.dim();
    let scale = {
        let (p, q) = (template.first(), template.last());
        let dist: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        0.25 * (1.0 + dist)
    };
    let modes = 3;
    let mut amp = vec![0.0; d * modes];
    for a in amp.iter_mut() {
        *a = rng.gen_range(-1.0..1.0);
    }
    let mut out = template.interior();
    for i in 1..n {
        let s = i as f64 / n as f64;
        for k in 0..d {
            let mut bump = 0.0;
            for m in 1..=modes {
                bump += amp[k * modes + m - 1] / m as f64
                    * (m as f64 * std::f64::consts::PI * s).sin();
            }
            out[(i - 1) * d + k] += scale * bump;
        }
    }
    out
}

/// Fill in the fiber coordinates along `path` so the curve starts at
/// `(y_p, t_p)` and realizes the displacements in `bnd`. Shares the trapezoid
/// rule with [`path_integrals`], so the far endpoint is met to rounding.
pub fn reconstruct_fibers(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    y_p: f64,
    t_p: f64,
    bnd: &BoundaryData,
) -> Result<FiberCurves> {
    reconstruct_fibers_with_floor(spec, path, y_p, t_p, bnd, DEFAULT_ELL_FLOOR)
}

pub fn reconstruct_fibers_with_floor(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    y_p: f64,
    t_p: f64,
    bnd: &BoundaryData,
    floor: f64,
) -> Result<FiberCurves> {
    let n = path.segments();
    let mut ratios = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let (a, b, c, h) = spec.sample_values(path.node(i))?;
        ratios.push((a / h, b / h, c / h));
    }
    // Cumulative trapezoid integrals of A/H, B/H, C/H up to each node.
    let mut ia = vec![0.0; n + 1];
    let mut ib = vec![0.0; n + 1];
    let mut ic = vec![0.0; n + 1];
    let half = 0.5 / n as f64;
    for i in 1..=n {
        ia[i] = ia[i - 1] + half * (ratios[i - 1].0 + ratios[i].0);
        ib[i] = ib[i - 1] + half * (ratios[i - 1].1 + ratios[i].1);
        ic[i] = ic[i - 1] + half * (ratios[i - 1].2 + ratios[i].2);
    }
    let (a, b, c) = (ia[n], ib[n], ic[n]);
    let ell = b * b + a * c;
    if ell.abs() <= floor {
        return Err(Error::DegenerateL { ell: ell.abs(), floor });
    }
    let c2 = (bnd.delta_y * b - bnd.delta_t * c) / ell;
    let c1 = (bnd.delta_y * a + bnd.delta_t * b) / ell;
    let mut y = Vec::with_capacity(n + 1);
    let mut t = Vec::with_capacity(n + 1);
    for i in 0..=n {
        y.push(y_p + c2 * ib[i] + c1 * ic[i]);
        t.push(t_p - c2 * ia[i] + c1 * ib[i]);
    }
    Ok(FiberCurves { y, t, c1, c2 })
}

/// Action of the full spacetime curve `(x, y, t)` by the midpoint rule, with
/// the metric coefficients evaluated at segment midpoints. No factor of one
/// half, so at a critical point `f = 2 J` up to quadrature error.
pub fn full_action(spec: &SpacetimeSpec, path: &DiscretePath, y: &[f64], t: &[f64]) -> Result<f64> {
    let n = path.segments();
    let d = path.dim();
    if y.len() != n + 1 || t.len() != n + 1 {
        return Err(Error::DimensionMismatch { expect: n + 1, got: y.len().min(t.len()) });
    }
    let nf = n as f64;
    let euclidean = spec.base_metric().is_euclidean();
    let mut f = 0.0;
    let mut mid = vec![0.0; d];
    for i in 0..n {
        let (p, q) = (path.node(i), path.node(i + 1));
        for k in 0..d {
            mid[k] = 0.5 * (p[k] + q[k]);
        }
        let mut base = 0.0;
        if euclidean {
            for k in 0..d {
                let dx = q[k] - p[k];
                base += dx * dx;
            }
        } else {
            let g = spec.base_metric().sample(&mid)?;
            for r in 0..d {
                for cc in 0..d {
                    base += g[r * d + cc] * (q[r] - p[r]) * (q[cc] - p[cc]);
                }
            }
        }
        let (av, bv, cv, _) = spec.sample_values(&mid)?;
        let dy = y[i + 1] - y[i];
        let dt = t[i + 1] - t[i];
        f += nf * (base + av * dy * dy + 2.0 * bv * dy * dt - cv * dt * dt);
    }
    Ok(f)
}

/// Sup over interior nodes of the defect of the reduced geodesic equation
/// `xddot^k = 1/2 g^{kl} (dA ydot^2 + 2 dB ydot tdot - dC tdot^2) - Gamma(xdot, xdot)`,
/// normalized by `1 + |zdot|^2`. The fiber rates come from the reconstruction
/// multipliers. Derivatives use fourth-order central stencils where the grid
/// allows (second-order next to the endpoints), which keeps the defect
/// independent of the action's own trapezoid discretization: a converged
/// minimizer therefore shows its genuine O(N^-2) node error instead of the
/// solver's gradient floor.
pub fn geodesic_residual(
    spec: &SpacetimeSpec,
    path: &DiscretePath,
    bnd: &BoundaryData,
) -> Result<f64> {
    let n = path.segments();
    let d = path.dim();
    let fib = reconstruct_fibers(spec, path, 0.0, 0.0, bnd)?;
    let nf = n as f64;
    let euclidean = spec.base_metric().is_euclidean();
    let mut worst = 0.0_f64;
    for i in 1..n {
        let here = path.node(i);
        let s = spec.sample_coefficients(here)?;
        let ydot = (fib.c1 * s.c + fib.c2 * s.b) / s.h;
        let tdot = (fib.c1 * s.b - fib.c2 * s.a) / s.h;

        let mut xdot = vec![0.0; d];
        let mut xddot = vec![0.0; d];
        if i >= 2 && i + 2 <= n {
            let (p2, p1, q1, q2) = (
                path.node(i - 2),
                path.node(i - 1),
                path.node(i + 1),
                path.node(i + 2),
            );
            for k in 0..d {
                xdot[k] = nf / 12.0 * (p2[k] - 8.0 * p1[k] + 8.0 * q1[k] - q2[k]);
                xddot[k] = nf * nf / 12.0
                    * (-p2[k] + 16.0 * p1[k] - 30.0 * here[k] + 16.0 * q1[k] - q2[k]);
            }
        } else {
            let (prev, next) = (path.node(i - 1), path.node(i + 1));
            for k in 0..d {
                xdot[k] = 0.5 * nf * (next[k] - prev[k]);
                xddot[k] = nf * nf * (next[k] - 2.0 * here[k] + prev[k]);
            }
        }

        // Driving term in covector form, then raised with the inverse metric.
        let mut force = vec![0.0; d];
        for k in 0..d {
            force[k] = 0.5
                * (s.grad_a[k] * ydot * ydot + 2.0 * s.grad_b[k] * ydot * tdot
                    - s.grad_c[k] * tdot * tdot);
        }
        let mut defect = vec![0.0; d];
        if euclidean {
            for k in 0..d {
                defect[k] = xddot[k] - force[k];
            }
        } else {
            let g = spec.base_metric().sample(here)?;
            let raised = crate::linalg::solve_dense(g, force, d)?;
            let gamma = spec.base_metric().christoffels(here)?;
            for k in 0..d {
                let mut quad = 0.0;
                for r in 0..d {
                    for cc in 0..d {
                        quad += gamma[k][r * d + cc] * xdot[r] * xdot[cc];
                    }
                }
                defect[k] = xddot[k] - raised[k] + quad;
            }
        }
        let speed2 = dot(&xdot, &xdot) + ydot * ydot + tdot * tdot;
        let mag = defect.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        worst = worst.max(mag / (1.0 + speed2));
    }
    Ok(worst)
}

/// Join `from` to `to` by a geodesic: minimize the reduced action from the
/// straight segment and from `restarts` perturbed starts, keep the best run,
/// and reconstruct the fiber curves.
pub fn minimize_action(
    spec: &SpacetimeSpec,
    from: &Event,
    to: &Event,
    cfg: &SolverConfig,
) -> Result<GeodesicSolution> {
    if from.x.len() != spec.dim() || to.x.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expect: spec.dim(),
            got: from.x.len().min(to.x.len()),
        });
    }
    if cfg.segments < 2 {
        return Err(Error::InvalidParameter {
            name: "segments",
            msg: format!("need at least 2, got {}", cfg.segments),
        });
    }
    if !(cfg.ell_floor >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "ell_floor",
            msg: "must be nonnegative".into(),
        });
    }
    let bnd = BoundaryData { delta_y: to.y - from.y, delta_t: to.t - from.t };
    let template = DiscretePath::straight(&from.x, &to.x, cfg.segments)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut records = Vec::new();
    let mut best: Option<RunOutcome> = None;
    for attempt in 0..=cfg.restarts {
        let start = if attempt == 0 {
            template.interior()
        } else {
            perturbed_interior(&template, &mut rng)
        };
        let run = run_ncg(spec, &template, &bnd, cfg, start);
        records.push(RestartRecord {
            index: attempt,
            iterations: run.iterations,
            j: run.j,
            grad_norm: run.grad_norm,
            reason: run.reason,
        });
        let better = match &best {
            None => true,
            Some(b) => {
                let b_ok = b.reason != StopReason::Breakdown;
                let r_ok = run.reason != StopReason::Breakdown;
                match (b_ok, r_ok) {
                    (false, true) => true,
                    (true, false) => false,
                    (false, false) => false,
                    (true, true) => {
                        let b_conv = b.reason == StopReason::GradTol;
                        let r_conv = run.reason == StopReason::GradTol;
                        if b_conv != r_conv {
                            r_conv
                        } else {
                            run.j < b.j
                        }
                    }
                }
            }
        };
        if better {
            best = Some(run);
        }
        // A converged straight-segment start is already the answer.
        if attempt == 0 && records[0].reason == StopReason::GradTol {
            break;
        }
    }

    let win = best.expect("at least one start ran");
    let mut path = template.clone();
    path.set_interior(&win.interior);

    if win.reason == StopReason::Breakdown {
        return Ok(GeodesicSolution {
            converged: false,
            reason: StopReason::Breakdown,
            iterations: win.iterations,
            j: f64::NAN,
            f: f64::NAN,
            residual: f64::NAN,
            grad_norm: f64::NAN,
            path,
            fibers: None,
            j_history: win.history,
            restarts: records,
        });
    }

    let fibers =
        reconstruct_fibers_with_floor(spec, &path, from.y, from.t, &bnd, cfg.ell_floor)?;
    let f = full_action(spec, &path, &fibers.y, &fibers.t)?;
    let residual = geodesic_residual(spec, &path, &bnd)?;

    Ok(GeodesicSolution {
        converged: win.reason == StopReason::GradTol,
        reason: win.reason,
        iterations: win.iterations,
        j: win.j,
        f,
        residual,
        grad_norm: win.grad_norm,
        path,
        fibers: Some(fibers),
        j_history: win.history,
        restarts: records,
    })
}
