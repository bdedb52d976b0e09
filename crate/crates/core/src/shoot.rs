//! Initial-value geodesics and completeness probes.
//!
//! The two fiber directions carry conserved momenta
//!
//! ```text
//! c1 = A ydot + B tdot,      c2 = B ydot - C tdot,
//! ```
//!
//! so the fiber velocities are algebraic functions of the base point:
//! `ydot = (c1 C + c2 B)/H`, `tdot = (c1 B - c2 A)/H`. The reduced system
//! integrates only `(x, xdot)` (plus the fiber coordinates for output) with
//!
//! ```text
//! xddot^k = 1/2 g^kl (dA_l ydot^2 + 2 dB_l ydot tdot - dC_l tdot^2)
//!           - Gamma^k_ij xdot^i xdot^j.
//! ```
//!
//! By construction the reduced right-hand side reproduces `c1`, `c2` exactly
//! at every sample, so their recorded drifts sit at rounding level and the
//! energy drift is the honest measure of integration error. The unreduced
//! integrator ([`integrate_unreduced`]) advances `(ydot, tdot)` as genuine
//! state through `S (yddot, tddot)^T = -(dS/ds) (ydot, tdot)^T` and serves as
//! an independent cross-check; there the momentum drifts are real.
//!
//! Running out of the certificate region (`H <= 0`), finite-time blow-up, and
//! similar events terminate the trajectory and are reported in
//! [`Trajectory::termination`], not as `Err`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::spacetime::SpacetimeSpec;

/// Full initial data for a geodesic through `(x, y, t)`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub x: Vec<f64>,
    pub y: f64,
    pub t: f64,
    pub xdot: Vec<f64>,
    pub ydot: f64,
    pub tdot: f64,
}

/// The three first integrals of the reduced system.
#[derive(Debug, Clone, Copy)]
pub struct ConservedQuantities {
    /// Momentum conjugate to `y`.
    pub c1: f64,
    /// Momentum conjugate to `t`.
    pub c2: f64,
    /// Energy `<zdot, zdot>` of the full curve.
    pub e_z: f64,
    /// Round-trip defect of mapping `(ydot, tdot) -> (c1, c2) -> (ydot, tdot)`.
    pub roundtrip_residual: f64,
}

/// `(c1, c2, E_z)` from pointwise velocities.
pub fn conserved_from_velocity(
    spec: &SpacetimeSpec,
    x: &[f64],
    xdot: &[f64],
    ydot: f64,
    tdot: f64,
) -> Result<ConservedQuantities> {
    if xdot.len() != x.len() {
        return Err(Error::DimensionMismatch { expect: x.len(), got: xdot.len() });
    }
    let (a, b, c, h) = spec.sample_values(x)?;
    let c1 = a * ydot + b * tdot;
    let c2 = b * ydot - c * tdot;
    let base = base_speed_squared(spec, x, xdot)?;
    let e_z = base + a * ydot * ydot + 2.0 * b * ydot * tdot - c * tdot * tdot;
    let yd = (c1 * c + c2 * b) / h;
    let td = (c1 * b - c2 * a) / h;
    let roundtrip_residual = (yd - ydot).abs().max((td - tdot).abs());
    Ok(ConservedQuantities { c1, c2, e_z, roundtrip_residual })
}

/// Fiber velocities at `x` for given momenta.
pub fn fiber_velocities(spec: &SpacetimeSpec, x: &[f64], c1: f64, c2: f64) -> Result<(f64, f64)> {
    let (a, b, c, h) = spec.sample_values(x)?;
    Ok(((c1 * c + c2 * b) / h, (c1 * b - c2 * a) / h))
}

fn base_speed_squared(spec: &SpacetimeSpec, x: &[f64], xdot: &[f64]) -> Result<f64> {
    if spec.base_metric().is_euclidean() {
        Ok(xdot.iter().map(|v| v * v).sum())
    } else {
        let d = x.len();
        let g = spec.base_metric().sample(x)?;
        let mut s = 0.0;
        for r in 0..d {
            for c in 0..d {
                s += g[r * d + c] * xdot[r] * xdot[c];
            }
        }
        Ok(s)
    }
}

/// Why integration stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ReachedSMax,
    /// Step size underflow or speed past the guard: the trajectory left every
    /// bounded region in finite parameter time.
    BlowUp { s: f64 },
    /// The certificate `H > 0` failed at a requested sample.
    HViolation { s: f64 },
    /// Coefficient evaluation failed for a reason other than the certificate.
    EvalError { s: f64, message: String },
    /// Step budget exhausted before `s_max`.
    StepLimit { s: f64 },
}

/// Step-size policy for the Runge-Kutta driver.
#[derive(Debug, Clone, Copy)]
pub enum StepControl {
    Fixed { h: f64 },
    /// Step doubling: compare one `h` step against two `h/2` steps and keep
    /// the local error below `tol` relative to the state scale.
    Adaptive { h0: f64, tol: f64, min_step: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ShootConfig {
    pub s_max: f64,
    pub control: StepControl,
    pub max_steps: usize,
    /// Speed guard: larger `|xdot|` terminates as blow-up.
    pub max_speed: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig {
            s_max: 10.0,
            control: StepControl::Adaptive { h0: 1e-2, tol: 1e-10, min_step: 1e-12 },
            max_steps: 2_000_000,
            max_speed: 1e12,
        }
    }
}

/// One recorded node of a trajectory.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub s: f64,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub y: f64,
    pub t: f64,
    pub ydot: f64,
    pub tdot: f64,
    pub c1_drift: f64,
    pub c2_drift: f64,
    pub e_drift: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub termination: Termination,
    pub conserved: ConservedQuantities,
    pub max_c1_drift: f64,
    pub max_c2_drift: f64,
    pub max_e_drift: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory records its initial state")
    }
}

/// Right-hand side and monitor callbacks for one integrator variant.
trait System {
    fn dim(&self) -> usize;
    fn rhs(&self, u: &[f64], du: &mut [f64]) -> Result<()>;
    /// `(ydot, tdot, c1, c2, e)` at the state, for recording.
    fn monitor(&self, u: &[f64]) -> Result<(f64, f64, f64, f64, f64)>;
    fn base_dim(&self) -> usize;
}

/// Reduced system: state `[x, xdot, y, t]`, fiber velocities from momenta.
struct ReducedSystem<'a> {
    spec: &'a SpacetimeSpec,
    c1: f64,
    c2: f64,
}

fn base_accel(
    spec: &SpacetimeSpec,
    x: &[f64],
    v: &[f64],
    force: Vec<f64>,
    out: &mut [f64],
) -> Result<()> {
    let d = x.len();
    if spec.base_metric().is_euclidean() {
        out.copy_from_slice(&force);
        return Ok(());
    }
    let g = spec.base_metric().sample(x)?;
    let raised = linalg::solve_dense(g, force, d)?;
    let gamma = spec.base_metric().christoffels(x)?;
    for k in 0..d {
        let mut quad = 0.0;
        for i in 0..d {
            for j in 0..d {
                quad += gamma[k][i * d + j] * v[i] * v[j];
            }
        }
        out[k] = raised[k] - quad;
    }
    Ok(())
}

impl System for ReducedSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.spec.dim() + 2
    }

    fn base_dim(&self) -> usize {
        self.spec.dim()
    }

    fn rhs(&self, u: &[f64], du: &mut [f64]) -> Result<()> {
        let d = self.spec.dim();
        let (x, v) = (&u[..d], &u[d..2 * d]);
        let s = self.spec.sample_coefficients(x)?;
        let ydot = (self.c1 * s.c + self.c2 * s.b) / s.h;
        let tdot = (self.c1 * s.b - self.c2 * s.a) / s.h;
        let mut force = vec![0.0; d];
        for k in 0..d {
            force[k] = 0.5
                * (s.grad_a[k] * ydot * ydot + 2.0 * s.grad_b[k] * ydot * tdot
                    - s.grad_c[k] * tdot * tdot);
        }
        du[..d].copy_from_slice(v);
        base_accel(self.spec, x, v, force, &mut du[d..2 * d])?;
        du[2 * d] = ydot;
        du[2 * d + 1] = tdot;
        Ok(())
    }

    fn monitor(&self, u: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
        let d = self.spec.dim();
        let (x, v) = (&u[..d], &u[d..2 * d]);
        let (a, b, c, h) = self.spec.sample_values(x)?;
        let ydot = (self.c1 * c + self.c2 * b) / h;
        let tdot = (self.c1 * b - self.c2 * a) / h;
        let c1 = a * ydot + b * tdot;
        let c2 = b * ydot - c * tdot;
        let e = base_speed_squared(self.spec, x, v)?
            + a * ydot * ydot
            + 2.0 * b * ydot * tdot
            - c * tdot * tdot;
        Ok((ydot, tdot, c1, c2, e))
    }
}

/// Unreduced system: state `[x, xdot, y, t, ydot, tdot]`, fiber accelerations
/// from the conservation law in differentiated form.
struct UnreducedSystem<'a> {
    spec: &'a SpacetimeSpec,
}

impl System for UnreducedSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.spec.dim() + 4
    }

    fn base_dim(&self) -> usize {
        self.spec.dim()
    }

    fn rhs(&self, u: &[f64], du: &mut [f64]) -> Result<()> {
        let d = self.spec.dim();
        let (x, v) = (&u[..d], &u[d..2 * d]);
        let (ydot, tdot) = (u[2 * d + 2], u[2 * d + 3]);
        let s = self.spec.sample_coefficients(x)?;

        // dS/ds along the curve.
        let mut da = 0.0;
        let mut db = 0.0;
        let mut dc = 0.0;
        for k in 0..d {
            da += s.grad_a[k] * v[k];
            db += s.grad_b[k] * v[k];
            dc += s.grad_c[k] * v[k];
        }
        let rhs2 = [
            -(da * ydot + db * tdot),
            -(db * ydot - dc * tdot),
        ];
        let fiber_acc = linalg::solve2x2([[s.a, s.b], [s.b, -s.c]], rhs2).ok_or_else(|| {
            Error::Invalid("fiber system singular despite positive certificate".into())
        })?;

        let mut force = vec![0.0; d];
        for k in 0..d {
            force[k] = 0.5
                * (s.grad_a[k] * ydot * ydot + 2.0 * s.grad_b[k] * ydot * tdot
                    - s.grad_c[k] * tdot * tdot);
        }
        du[..d].copy_from_slice(v);
        base_accel(self.spec, x, v, force, &mut du[d..2 * d])?;
        du[2 * d] = ydot;
        du[2 * d + 1] = tdot;
        du[2 * d + 2] = fiber_acc[0];
        du[2 * d + 3] = fiber_acc[1];
        Ok(())
    }

    fn monitor(&self, u: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
        let d = self.spec.dim();
        let (x, v) = (&u[..d], &u[d..2 * d]);
        let (ydot, tdot) = (u[2 * d + 2], u[2 * d + 3]);
        let (a, b, c, _) = self.spec.sample_values(x)?;
        let c1 = a * ydot + b * tdot;
        let c2 = b * ydot - c * tdot;
        let e = base_speed_squared(self.spec, x, v)?
            + a * ydot * ydot
            + 2.0 * b * ydot * tdot
            - c * tdot * tdot;
        Ok((ydot, tdot, c1, c2, e))
    }
}

fn rk4_step(sys: &dyn System, u: &[f64], h: f64, scratch: &mut Rk4Scratch) -> Result<Vec<f64>> {
    let n = u.len();
    sys.rhs(u, &mut scratch.k1)?;
    for i in 0..n {
        scratch.tmp[i] = u[i] + 0.5 * h * scratch.k1[i];
    }
    sys.rhs(&scratch.tmp, &mut scratch.k2)?;
    for i in 0..n {
        scratch.tmp[i] = u[i] + 0.5 * h * scratch.k2[i];
    }
    sys.rhs(&scratch.tmp, &mut scratch.k3)?;
    for i in 0..n {
        scratch.tmp[i] = u[i] + h * scratch.k3[i];
    }
    sys.rhs(&scratch.tmp, &mut scratch.k4)?;
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = u[i]
            + h / 6.0 * (scratch.k1[i] + 2.0 * scratch.k2[i] + 2.0 * scratch.k3[i] + scratch.k4[i]);
    }
    Ok(out)
}

struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    fn new(n: usize) -> Self {
        Rk4Scratch {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

fn classify_error(e: &Error, s: f64) -> Termination {
    match e {
        Error::LorentzViolation { .. } => Termination::HViolation { s },
        other => Termination::EvalError { s, message: other.to_string() },
    }
}

struct Driver<'a> {
    sys: &'a dyn System,
    cfg: &'a ShootConfig,
    conserved: ConservedQuantities,
}

impl Driver<'_> {
    fn record(
        &self,
        out: &mut Trajectory,
        s: f64,
        u: &[f64],
    ) -> std::result::Result<(), Termination> {
        let d = self.sys.base_dim();
        let (ydot, tdot, c1, c2, e) =
            self.sys.monitor(u).map_err(|e| classify_error(&e, s))?;
        let sample = TrajectorySample {
            s,
            x: u[..d].to_vec(),
            xdot: u[d..2 * d].to_vec(),
            y: u[2 * d],
            t: u[2 * d + 1],
            ydot,
            tdot,
            c1_drift: (c1 - self.conserved.c1).abs(),
            c2_drift: (c2 - self.conserved.c2).abs(),
            e_drift: (e - self.conserved.e_z).abs(),
        };
        out.max_c1_drift = out.max_c1_drift.max(sample.c1_drift);
        out.max_c2_drift = out.max_c2_drift.max(sample.c2_drift);
        out.max_e_drift = out.max_e_drift.max(sample.e_drift);
        out.samples.push(sample);
        Ok(())
    }

    fn state_ok(&self, u: &[f64]) -> bool {
        let d = self.sys.base_dim();
        u.iter().all(|v| v.is_finite())
            && u[d..2 * d].iter().map(|v| v * v).sum::<f64>().sqrt() <= self.cfg.max_speed
    }

    fn run(&self, u0: Vec<f64>) -> Trajectory {
        let mut out = Trajectory {
            samples: Vec::new(),
            termination: Termination::ReachedSMax,
            conserved: self.conserved,
            max_c1_drift: 0.0,
            max_c2_drift: 0.0,
            max_e_drift: 0.0,
            steps: 0,
        };
        let mut u = u0;
        let mut s = 0.0;
        if let Err(t) = self.record(&mut out, s, &u) {
            out.termination = t;
            return out;
        }
        let mut scratch = Rk4Scratch::new(self.sys.dim());
        let s_max = self.cfg.s_max;

        match self.cfg.control {
            StepControl::Fixed { h } => {
                while s < s_max - 1e-15 * s_max.max(1.0) {
                    if out.steps >= self.cfg.max_steps {
                        out.termination = Termination::StepLimit { s };
                        return out;
                    }
                    let hs = h.min(s_max - s);
                    match rk4_step(self.sys, &u, hs, &mut scratch) {
                        Ok(next) => u = next,
                        Err(e) => {
                            out.termination = classify_error(&e, s);
                            return out;
                        }
                    }
                    s += hs;
                    out.steps += 1;
                    if !self.state_ok(&u) {
                        out.termination = Termination::BlowUp { s };
                        return out;
                    }
                    if let Err(t) = self.record(&mut out, s, &u) {
                        out.termination = t;
                        return out;
                    }
                }
            }
            StepControl::Adaptive { h0, tol, min_step } => {
                let mut h = h0.min(s_max);
                let mut last_failure: Option<Termination> = None;
                while s < s_max - 1e-15 * s_max.max(1.0) {
                    if out.steps >= self.cfg.max_steps {
                        out.termination = Termination::StepLimit { s };
                        return out;
                    }
                    if h < min_step {
                        out.termination =
                            last_failure.unwrap_or(Termination::BlowUp { s });
                        return out;
                    }
                    let hs = h.min(s_max - s);
                    let attempt = rk4_step(self.sys, &u, hs, &mut scratch).and_then(|coarse| {
                        let half = rk4_step(self.sys, &u, 0.5 * hs, &mut scratch)?;
                        let fine = rk4_step(self.sys, &half, 0.5 * hs, &mut scratch)?;
                        Ok((coarse, fine))
                    });
                    match attempt {
                        Err(e) => {
                            last_failure = Some(classify_error(&e, s));
                            h *= 0.5;
                        }
                        Ok((coarse, fine)) => {
                            let scale = 1.0
                                + fine.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                            let err = coarse
                                .iter()
                                .zip(&fine)
                                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
                                / (15.0 * scale);
                            if err <= tol {
                                u = fine;
                                s += hs;
                                out.steps += 1;
                                last_failure = None;
                                if !self.state_ok(&u) {
                                    out.termination = Termination::BlowUp { s };
                                    return out;
                                }
                                if let Err(t) = self.record(&mut out, s, &u) {
                                    out.termination = t;
                                    return out;
                                }
                                let grow = if err > 0.0 {
                                    (0.9 * (tol / err).powf(0.2)).min(4.0)
                                } else {
                                    4.0
                                };
                                h = (hs * grow.max(0.25)).min(s_max);
                            } else {
                                h = hs * (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.7);
                            }
                        }
                    }
                }
            }
        }
        out.termination = Termination::ReachedSMax;
        out
    }
}

/// Integrate the reduced geodesic system from full initial data.
pub fn integrate_geodesic(
    spec: &SpacetimeSpec,
    init: &InitialData,
    cfg: &ShootConfig,
) -> Result<Trajectory> {
    validate_init(spec, init, cfg)?;
    let conserved = conserved_from_velocity(spec, &init.x, &init.xdot, init.ydot, init.tdot)?;
    let sys = ReducedSystem { spec, c1: conserved.c1, c2: conserved.c2 };
    let mut u0 = Vec::with_capacity(sys.dim());
    u0.extend_from_slice(&init.x);
    u0.extend_from_slice(&init.xdot);
    u0.push(init.y);
    u0.push(init.t);
    Ok(Driver { sys: &sys, cfg, conserved }.run(u0))
}

/// Integrate the full second-order system without using the momenta. Slower
/// and drift-prone by design; kept as an independent reference for validating
/// the reduced integrator.
pub fn integrate_unreduced(
    spec: &SpacetimeSpec,
    init: &InitialData,
    cfg: &ShootConfig,
) -> Result<Trajectory> {
    validate_init(spec, init, cfg)?;
    let conserved = conserved_from_velocity(spec, &init.x, &init.xdot, init.ydot, init.tdot)?;
    let sys = UnreducedSystem { spec };
    let mut u0 = Vec::with_capacity(sys.dim());
    u0.extend_from_slice(&init.x);
    u0.extend_from_slice(&init.xdot);
    u0.push(init.y);
    u0.push(init.t);
    u0.push(init.ydot);
    u0.push(init.tdot);
    Ok(Driver { sys: &sys, cfg, conserved }.run(u0))
}

fn validate_init(spec: &SpacetimeSpec, init: &InitialData, cfg: &ShootConfig) -> Result<()> {
    if init.x.len() != spec.dim() || init.xdot.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expect: spec.dim(),
            got: init.x.len().min(init.xdot.len()),
        });
    }
    if !(cfg.s_max > 0.0) {
        return Err(Error::InvalidParameter { name: "s_max", msg: "must be positive".into() });
    }
    match cfg.control {
        StepControl::Fixed { h } if !(h > 0.0) => {
            Err(Error::InvalidParameter { name: "step", msg: "must be positive".into() })
        }
        StepControl::Adaptive { h0, tol, min_step }
            if !(h0 > 0.0 && tol > 0.0 && min_step > 0.0) =>
        {
            Err(Error::InvalidParameter {
                name: "step control",
                msg: "h0, tol, min_step must be positive".into(),
            })
        }
        _ => Ok(()),
    }
}

/// Per-trajectory outcome of a completeness probe.
#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub index: usize,
    pub c1: f64,
    pub c2: f64,
    pub e_z: f64,
    pub termination: Termination,
    /// Smallest value of `E_z + 2(c1^2+c2^2)/mu - |xdot|^2` along the curve.
    pub pointwise_margin: f64,
    /// Smallest value of `envelope(s) - d(x(s), x0)` along the curve.
    pub envelope_margin: f64,
    pub max_distance: f64,
}

/// Aggregate result of probing completeness with a bundle of trajectories.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub outcomes: Vec<ProbeOutcome>,
    /// Every trajectory reached `s_max`.
    pub all_complete: bool,
    /// The speed bound `|xdot|^2 <= E_z + 2(c1^2 + c2^2)/mu` held at every
    /// sample of every trajectory.
    pub all_pointwise: bool,
    /// Every trajectory stayed inside the comparison envelope derived from
    /// the growth witness.
    pub all_enveloped: bool,
}

impl ProbeReport {
    pub fn all_pass(&self) -> bool {
        self.all_complete && self.all_pointwise && self.all_enveloped
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    pub trajectories: usize,
    pub seed: u64,
    /// Scale of the random initial velocities.
    pub speed_scale: f64,
    pub shoot: ShootConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            trajectories: 8,
            seed: 0,
            speed_scale: 1.0,
            shoot: ShootConfig::default(),
        }
    }
}

const PROBE_SLACK: f64 = 1e-9;

/// Launch a deterministic bundle of geodesics from `x0` and test the two
/// consequences of the completeness inequality `1/mu <= lambda d^2 + k`:
/// the pointwise speed bound and the exponential distance envelope
/// `d(s) <= (kbar/lambdabar)(exp(lambdabar s) - 1)` with
/// `lambdabar = sqrt(2 (c1^2+c2^2) lambda)` and
/// `kbar = sqrt(|E_z| + 2 (c1^2+c2^2) k) + 1`.
pub fn completeness_probe(
    spec: &SpacetimeSpec,
    x0: &[f64],
    lambda: f64,
    k: f64,
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if x0.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expect: spec.dim(), got: x0.len() });
    }
    if !(lambda >= 0.0) || !(k > 0.0) {
        return Err(Error::InvalidParameter {
            name: "witness",
            msg: "need lambda >= 0 and k > 0".into(),
        });
    }
    if cfg.trajectories == 0 {
        return Err(Error::InvalidParameter {
            name: "trajectories",
            msg: "need at least 1".into(),
        });
    }
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut outcomes = Vec::with_capacity(cfg.trajectories);

    for index in 0..cfg.trajectories {
        let mut xdot = vec![0.0; d];
        for v in xdot.iter_mut() {
            *v = cfg.speed_scale * rng.gen_range(-1.0..1.0);
        }
        let ydot = cfg.speed_scale * rng.gen_range(-1.0..1.0);
        let tdot = cfg.speed_scale * rng.gen_range(-1.0..1.0);
        let init = InitialData { x: x0.to_vec(), y: 0.0, t: 0.0, xdot, ydot, tdot };
        let traj = integrate_geodesic(spec, &init, &cfg.shoot)?;
        let cons = traj.conserved;
        let csq = cons.c1 * cons.c1 + cons.c2 * cons.c2;
        let lambda_bar = (2.0 * csq * lambda).sqrt();
        let k_bar = (cons.e_z.abs() + 2.0 * csq * k).sqrt() + 1.0;

        let mut pointwise_margin = f64::INFINITY;
        let mut envelope_margin = f64::INFINITY;
        let mut max_distance = 0.0_f64;
        for sample in &traj.samples {
            let (a, b, c, _) = spec.sample_values(&sample.x)?;
            let mu = c - a + ((a + c) * (a + c) + 4.0 * b * b).sqrt();
            let speed2 = base_speed_squared(spec, &sample.x, &sample.xdot)?;
            let rhs = cons.e_z + 2.0 * csq / mu;
            pointwise_margin =
                pointwise_margin.min(rhs - speed2 + PROBE_SLACK * (1.0 + rhs.abs()));

            let dist: f64 = sample
                .x
                .iter()
                .zip(x0)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum::<f64>()
                .sqrt();
            max_distance = max_distance.max(dist);
            let envelope = if lambda_bar > 0.0 {
                k_bar / lambda_bar * ((lambda_bar * sample.s).exp() - 1.0)
            } else {
                k_bar * sample.s
            };
            envelope_margin =
                envelope_margin.min(envelope - dist + PROBE_SLACK * (1.0 + envelope));
        }

        outcomes.push(ProbeOutcome {
            index,
            c1: cons.c1,
            c2: cons.c2,
            e_z: cons.e_z,
            termination: traj.termination,
            pointwise_margin,
            envelope_margin,
            max_distance,
        });
    }

    let all_complete =
        outcomes.iter().all(|o| o.termination == Termination::ReachedSMax);
    let all_pointwise = outcomes.iter().all(|o| o.pointwise_margin >= 0.0);
    let all_enveloped = outcomes.iter().all(|o| o.envelope_margin >= 0.0);
    Ok(ProbeReport { outcomes, all_complete, all_pointwise, all_enveloped })
}
