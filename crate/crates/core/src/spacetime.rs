//! Spacetime coefficient data and pointwise algebra.
//!
//! A spec holds the base dimension, an optional base metric (identity unless
//! stated), and the three scalar fields `A`, `B`, `C` of the fiber metric
//! `A dy^2 + 2 B dy dt - C dt^2`. The Lorentz certificate `H = B^2 + A C > 0`
//! is validated at every sample, never assumed.
//!
//! Pointwise quantities derived here: the Killing matrix
//! `S = [[A, B], [B, -C]]` (its determinant is `-H`), its eigenvalues
//! `lam_plus > 0 > lam_minus`, and the completeness weight
//! `mu = C - A + sqrt((A + C)^2 + 4 B^2) = -2 lam_minus`.

use crate::error::{Error, Result};
use crate::exprfield::{parse_with_constants, ExprAst};
use crate::linalg;

/// Riemannian metric on the base. Identity ("Euclidean") unless a field of
/// entries is given. Distances in the growth conditions are always Euclidean;
/// a custom metric affects kinetic terms, Christoffels, and energies only.
#[derive(Debug, Clone)]
pub enum BaseMetric {
    Euclidean,
    /// Row-major `dim * dim` entries; symmetry and positive definiteness are
    /// validated wherever the metric is sampled.
    Field { dim: usize, entries: Vec<ExprAst> },
}

impl BaseMetric {
    pub fn is_euclidean(&self) -> bool {
        matches!(self, BaseMetric::Euclidean)
    }

    pub fn field(entries: Vec<ExprAst>) -> Result<Self> {
        let n = entries.len();
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n || dim == 0 {
            return Err(Error::InvalidParameter {
                name: "base_metric",
                msg: format!("{n} entries do not form a square matrix"),
            });
        }
        if entries.iter().any(|e| e.dim() != dim) {
            return Err(Error::InvalidParameter {
                name: "base_metric",
                msg: "entry dimension differs from matrix size".into(),
            });
        }
        Ok(BaseMetric::Field { dim, entries })
    }

    /// Metric matrix at `x` (row-major), with symmetry and positive
    /// definiteness enforced.
    pub fn sample(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            BaseMetric::Euclidean => {
                let d = x.len();
                let mut g = vec![0.0; d * d];
                for i in 0..d {
                    g[i * d + i] = 1.0;
                }
                Ok(g)
            }
            BaseMetric::Field { dim, entries } => {
                let d = *dim;
                let mut g = vec![0.0; d * d];
                for (k, e) in entries.iter().enumerate() {
                    g[k] = e.eval(x)?;
                }
                validate_metric(&g, d, x)?;
                Ok(g)
            }
        }
    }

    /// Metric and its coordinate derivatives: `grad[k][i*d+j] = d g_ij / d x_k`.
    pub fn sample_with_gradients(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        match self {
            BaseMetric::Euclidean => {
                let d = x.len();
                Ok((self.sample(x)?, vec![vec![0.0; d * d]; d]))
            }
            BaseMetric::Field { dim, entries } => {
                let d = *dim;
                let mut g = vec![0.0; d * d];
                let mut grad = vec![vec![0.0; d * d]; d];
                for (idx, e) in entries.iter().enumerate() {
                    let s = e.eval_with_gradient(x)?;
                    g[idx] = s.value;
                    for k in 0..d {
                        grad[k][idx] = s.gradient[k];
                    }
                }
                validate_metric(&g, d, x)?;
                Ok((g, grad))
            }
        }
    }

    /// Christoffel symbols `gamma[k][i*d+j]` at `x`; identically zero for the
    /// Euclidean base.
    pub fn christoffels(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = x.len();
        if self.is_euclidean() {
            return Ok(vec![vec![0.0; d * d]; d]);
        }
        let (g, dg) = self.sample_with_gradients(x)?;
        // Invert g column by column.
        let mut ginv = vec![0.0; d * d];
        for col in 0..d {
            let mut e = vec![0.0; d];
            e[col] = 1.0;
            let sol = linalg::solve_dense(g.clone(), e, d)?;
            for row in 0..d {
                ginv[row * d + col] = sol[row];
            }
        }
        let mut gamma = vec![vec![0.0; d * d]; d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += ginv[k * d + l]
                            * (dg[i][l * d + j] + dg[j][i * d + l] - dg[l][i * d + j]);
                    }
                    gamma[k][i * d + j] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }
}

fn validate_metric(g: &[f64], d: usize, x: &[f64]) -> Result<()> {
    for i in 0..d {
        for j in 0..i {
            if (g[i * d + j] - g[j * d + i]).abs() > 1e-12 * (1.0 + g[i * d + j].abs()) {
                return Err(Error::InvalidParameter {
                    name: "base_metric",
                    msg: format!("not symmetric at x = {x:?}"),
                });
            }
        }
    }
    if !linalg::is_positive_definite(g, d) {
        return Err(Error::MetricNotPositive { point: x.to_vec() });
    }
    Ok(())
}

/// Coefficient values and exact first derivatives at one base point, with the
/// Lorentz certificate already checked.
#[derive(Debug, Clone)]
pub struct CoefficientSample {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `H = B^2 + A C`, guaranteed positive.
    pub h: f64,
    pub grad_a: Vec<f64>,
    pub grad_b: Vec<f64>,
    pub grad_c: Vec<f64>,
}

impl CoefficientSample {
    /// `grad H = 2 B grad B + A grad C + C grad A`.
    pub fn grad_h(&self) -> Vec<f64> {
        self.grad_a
            .iter()
            .zip(&self.grad_b)
            .zip(&self.grad_c)
            .map(|((ga, gb), gc)| 2.0 * self.b * gb + self.a * gc + self.c * ga)
            .collect()
    }
}

/// Eigen-data of the Killing matrix at a point.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `mu = C - A + sqrt((A + C)^2 + 4 B^2)`; equals `-2 lambda_minus`.
    pub mu: f64,
    /// Orthogonal, det +1; columns are unit eigenvectors for
    /// `lambda_plus`, `lambda_minus`.
    pub frame: [[f64; 2]; 2],
}

/// The Killing matrix `S(x) = [[A, B], [B, -C]]`.
pub fn killing_matrix(s: &CoefficientSample) -> [[f64; 2]; 2] {
    [[s.a, s.b], [s.b, -s.c]]
}

/// Eigenvalues and eigenframe of the Killing matrix. With `H > 0` the
/// eigenvalues straddle zero.
pub fn spectral(s: &CoefficientSample) -> SpectralData {
    let (lambda_plus, lambda_minus, frame) = linalg::sym2x2_spectral(s.a, s.b, -s.c);
    let mu = s.c - s.a + ((s.a + s.c) * (s.a + s.c) + 4.0 * s.b * s.b).sqrt();
    SpectralData { lambda_plus, lambda_minus, mu, frame }
}

/// Builtin members of the spacetime zoo.
#[derive(Debug, Clone)]
pub enum Zoo {
    /// The rotating dust universe on `R^2 x R^2`:
    /// `A = -exp(2 sqrt2 w x1)/2`, `B = -exp(sqrt2 w x1)`, `C = 1`.
    Godel { omega: f64 },
    /// `dx^2 - g(x1) dy^2 - 2 h(x1) dy dt - dt^2`; reduces to `Godel` when
    /// `2 g = h^2` with `h = exp(x1)`.
    GodelSynge { g: ExprAst, h: ExprAst },
    /// `A = 1 + V`, `B = V`, `C = 1 - V`; `H` is identically 1.
    KerrSchild { v: ExprAst },
    /// `A = 1`, `B = delta`, `C = beta`.
    Stationary { delta: ExprAst, beta: ExprAst },
    /// Stationary with `delta = 0`.
    Static { beta: ExprAst },
    /// Plane fronted wave `<.,.>_R + 2 dy dt + H0(x) dt^2`, i.e. `A = 0`,
    /// `B = 1`, `C = -H0`. The profile must be autonomous: it is a field in
    /// `x1..xd` only, so a time dependence cannot even be written.
    PlaneFrontedWave { h0: ExprAst },
    Custom { label: String, a: ExprAst, b: ExprAst, c: ExprAst, base: BaseMetric },
}

/// Full metric data of one Gödel-type spacetime.
#[derive(Debug, Clone)]
pub struct SpacetimeSpec {
    dim: usize,
    label: String,
    base: BaseMetric,
    a: ExprAst,
    b: ExprAst,
    c: ExprAst,
}

impl SpacetimeSpec {
    /// Instantiate a zoo member, validating its parameters.
    pub fn builtin(zoo: Zoo) -> Result<Self> {
        match zoo {
            Zoo::Godel { omega } => {
                if !(omega > 0.0) || !omega.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "omega",
                        msg: format!("vorticity must be a positive real, got {omega}"),
                    });
                }
                let s = std::f64::consts::SQRT_2 * omega;
                let consts: &[(&str, f64)] = &[("s", s)];
                Ok(SpacetimeSpec {
                    dim: 2,
                    label: format!("godel(omega={omega})"),
                    base: BaseMetric::Euclidean,
                    a: parse_with_constants("-exp(2*s*x1)/2", 2, consts)?,
                    b: parse_with_constants("-exp(s*x1)", 2, consts)?,
                    c: parse_with_constants("1", 2, consts)?,
                })
            }
            Zoo::GodelSynge { g, h } => {
                check_dim("g", &g, 2)?;
                check_dim("h", &h, 2)?;
                Ok(SpacetimeSpec {
                    dim: 2,
                    label: format!("godel_synge(g={g}, h={h})"),
                    base: BaseMetric::Euclidean,
                    a: g.neg(),
                    b: h.neg(),
                    c: ExprAst::constant(1.0, 2),
                })
            }
            Zoo::KerrSchild { v } => {
                check_dim("v", &v, 2)?;
                Ok(SpacetimeSpec {
                    dim: 2,
                    label: format!("kerr_schild(v={v})"),
                    base: BaseMetric::Euclidean,
                    a: v.clone().offset(1.0),
                    b: v.clone(),
                    c: v.neg().offset(1.0),
                })
            }
            Zoo::Stationary { delta, beta } => {
                let d = delta.dim();
                check_dim("beta", &beta, d)?;
                Ok(SpacetimeSpec {
                    dim: d,
                    label: format!("stationary(delta={delta}, beta={beta})"),
                    base: BaseMetric::Euclidean,
                    a: ExprAst::constant(1.0, d),
                    b: delta,
                    c: beta,
                })
            }
            Zoo::Static { beta } => {
                let d = beta.dim();
                Ok(SpacetimeSpec {
                    dim: d,
                    label: format!("static(beta={beta})"),
                    base: BaseMetric::Euclidean,
                    a: ExprAst::constant(1.0, d),
                    b: ExprAst::constant(0.0, d),
                    c: beta,
                })
            }
            Zoo::PlaneFrontedWave { h0 } => {
                let d = h0.dim();
                Ok(SpacetimeSpec {
                    dim: d,
                    label: format!("pfw(h0={h0})"),
                    base: BaseMetric::Euclidean,
                    a: ExprAst::constant(0.0, d),
                    b: ExprAst::constant(1.0, d),
                    c: h0.neg(),
                })
            }
            Zoo::Custom { label, a, b, c, base } => {
                let d = a.dim();
                check_dim("b", &b, d)?;
                check_dim("c", &c, d)?;
                if let BaseMetric::Field { dim, .. } = &base {
                    if *dim != d {
                        return Err(Error::InvalidParameter {
                            name: "base_metric",
                            msg: format!("metric is {dim}-dimensional, coefficients are {d}"),
                        });
                    }
                }
                Ok(SpacetimeSpec { dim: d, label, a, b, c, base })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn base_metric(&self) -> &BaseMetric {
        &self.base
    }

    pub fn coefficient_fields(&self) -> (&ExprAst, &ExprAst, &ExprAst) {
        (&self.a, &self.b, &self.c)
    }

    /// Coefficient values `(A, B, C, H)` at `x`, with `H > 0` enforced.
    pub fn sample_values(&self, x: &[f64]) -> Result<(f64, f64, f64, f64)> {
        let a = self.a.eval(x)?;
        let b = self.b.eval(x)?;
        let c = self.c.eval(x)?;
        let h = b * b + a * c;
        if !(h > 0.0) {
            return Err(Error::LorentzViolation { h, point: x.to_vec() });
        }
        Ok((a, b, c, h))
    }

    /// Values and exact gradients of the three coefficients at `x`.
    pub fn sample_coefficients(&self, x: &[f64]) -> Result<CoefficientSample> {
        let sa = self.a.eval_with_gradient(x)?;
        let sb = self.b.eval_with_gradient(x)?;
        let sc = self.c.eval_with_gradient(x)?;
        let h = sb.value * sb.value + sa.value * sc.value;
        if !(h > 0.0) {
            return Err(Error::LorentzViolation { h, point: x.to_vec() });
        }
        Ok(CoefficientSample {
            a: sa.value,
            b: sb.value,
            c: sc.value,
            h,
            grad_a: sa.gradient,
            grad_b: sb.gradient,
            grad_c: sc.gradient,
        })
    }
}

fn check_dim(name: &'static str, field: &ExprAst, want: usize) -> Result<()> {
    if field.dim() != want {
        return Err(Error::InvalidParameter {
            name,
            msg: format!("field has dimension {}, expected {want}", field.dim()),
        });
    }
    Ok(())
}
