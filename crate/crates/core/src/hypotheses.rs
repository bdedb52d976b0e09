//! Sampling-based checks of the sufficient conditions for geodesic
//! connectedness and completeness.
//!
//! Conditions quantified over all of `M0` (or over all paths) cannot be
//! decided by finitely many evaluations, so every checker returns one of
//! three verdicts:
//!
//! * `PASS`: a documented pointwise sufficient criterion held at every
//!   sample. Evidence, not proof; see [`CAVEAT`].
//! * `FAIL`: a concrete counterexample was found and is carried in the
//!   report. Re-evaluating it standalone violates the stated inequality by
//!   more than the `1e-12` reporting floor, so FAIL is sound.
//! * `INCONCLUSIVE`: neither applies. Path-space infima in particular are
//!   not decidable by sampling, and pretending otherwise would be unsound.
//!
//! Sampling is organized in shells of fixed radii with a fixed per-shell
//! count and seeded directions. Growth conditions are asymptotic statements,
//! so shell statistics (sup of `field/(d^2+1)` per shell) are reported to
//! make super-quadratic trends visible, and any counterexample is
//! reproducible from the region definition alone.

use serde::{Deserialize, Serialize};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exprfield::ExprAst;
use crate::spacetime::SpacetimeSpec;

/// Fixed caveat attached to every report.
pub const CAVEAT: &str = "sampling-based; PASS is evidence, not proof";

/// A violation must exceed this to justify a FAIL verdict.
const VIOLATION_FLOOR: f64 = 1e-12;

/// Tolerance for detecting coefficient identities (`B = 0`, `A = C`, ...)
/// from samples.
const FORM_TOL: f64 = 1e-12;

/// Shell-sampled subset of the base: a center plus concentric shells of
/// increasing radius, each carrying the same number of deterministic
/// direction samples.
#[derive(Debug, Clone)]
pub struct Region {
    center: Vec<f64>,
    radii: Vec<f64>,
    samples_per_shell: usize,
    seed: u64,
}

impl Region {
    pub fn new(
        center: Vec<f64>,
        radii: Vec<f64>,
        samples_per_shell: usize,
        seed: u64,
    ) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidParameter {
                name: "center",
                msg: "must have at least one coordinate".into(),
            });
        }
        if radii.is_empty() {
            return Err(Error::InvalidParameter {
                name: "radii",
                msg: "need at least one shell".into(),
            });
        }
        let increasing =
            radii.windows(2).all(|w| w[0] < w[1]) && radii[0] > 0.0 && radii.iter().all(|r| r.is_finite());
        if !increasing {
            return Err(Error::InvalidParameter {
                name: "radii",
                msg: "must be positive, finite and strictly increasing".into(),
            });
        }
        if samples_per_shell == 0 {
            return Err(Error::InvalidParameter {
                name: "samples_per_shell",
                msg: "need at least 1".into(),
            });
        }
        Ok(Region { center, radii, samples_per_shell, seed })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn samples_per_shell(&self) -> usize {
        self.samples_per_shell
    }

    /// All sample points: the center first, then shell by shell. Directions
    /// are deterministic in the dimension and seed: alternating signs in one
    /// dimension, a golden-angle spiral in two, seeded unit Gaussians above.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(1 + self.radii.len() * self.samples_per_shell);
        out.push(self.center.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut index = 0usize;
        for &r in &self.radii {
            for _ in 0..self.samples_per_shell {
                let dir = direction(d, index, &mut rng);
                let mut x = self.center.clone();
                for k in 0..d {
                    x[k] += r * dir[k];
                }
                out.push(x);
                index += 1;
            }
        }
        out
    }

    /// Sample points of one shell, in the same order as in [`samples`].
    fn shell_samples(&self, shell: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.samples_per_shell);
        let mut index = 0usize;
        for (si, &r) in self.radii.iter().enumerate() {
            for _ in 0..self.samples_per_shell {
                let dir = direction(d, index, &mut rng);
                if si == shell {
                    let mut x = self.center.clone();
                    for k in 0..d {
                        x[k] += r * dir[k];
                    }
                    out.push(x);
                }
                index += 1;
            }
        }
        out
    }
}

const GOLDEN_ANGLE: f64 = 2.399963229728653;

fn direction(d: usize, index: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match d {
        1 => vec![if index % 2 == 0 { 1.0 } else { -1.0 }],
        2 => {
            let theta = GOLDEN_ANGLE * index as f64;
            vec![theta.cos(), theta.sin()]
        }
        _ => {
            // Box-Muller pairs, normalized. The generator is consumed in
            // sample order, so directions are reproducible from the seed.
            let mut v = vec![0.0; d];
            let mut norm = 0.0;
            while norm < 1e-9 {
                let mut i = 0;
                while i < d {
                    let u1: f64 = 1.0 - rng.gen::<f64>();
                    let u2: f64 = rng.gen();
                    let r = (-2.0 * u1.ln()).sqrt();
                    v[i] = r * (2.0 * std::f64::consts::PI * u2).cos();
                    if i + 1 < d {
                        v[i + 1] = r * (2.0 * std::f64::consts::PI * u2).sin();
                    }
                    i += 2;
                }
                norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            }
            for x in v.iter_mut() {
                *x /= norm;
            }
            v
        }
    }
}

/// Quadratic growth bound `value <= lambda d^2(x, x0) + k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthWitness {
    pub lambda: f64,
    pub k: f64,
    pub x0: Vec<f64>,
}

impl GrowthWitness {
    pub fn new(lambda: f64, k: f64, x0: Vec<f64>) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() || !k.is_finite() {
            return Err(Error::InvalidParameter {
                name: "witness",
                msg: format!("need lambda >= 0 and finite k, got ({lambda}, {k})"),
            });
        }
        Ok(GrowthWitness { lambda, k, x0 })
    }

    fn bound(&self, d2: f64) -> f64 {
        self.lambda * d2 + self.k
    }
}

/// Linear growth bound `value <= lambda d(x, x0) + k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearWitness {
    pub lambda: f64,
    pub k: f64,
    pub x0: Vec<f64>,
}

impl LinearWitness {
    pub fn new(lambda: f64, k: f64, x0: Vec<f64>) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() || !k.is_finite() {
            return Err(Error::InvalidParameter {
                name: "witness",
                msg: format!("need lambda >= 0 and finite k, got ({lambda}, {k})"),
            });
        }
        Ok(LinearWitness { lambda, k, x0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Per-shell growth statistic: the sup over the shell's samples of
/// `field / (d^2 + 1)` with `d` measured from the witness base point.
#[derive(Debug, Clone, Serialize)]
pub struct ShellStat {
    pub radius: f64,
    pub sup_ratio: f64,
}

/// A concrete violating sample. `violation = value - bound > 1e-12`, except
/// for strict-positivity conditions where it records how far the sample is
/// from being strictly positive.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub x: Vec<f64>,
    pub value: f64,
    pub bound: f64,
    pub violation: f64,
}

/// Witness parameters a check ran against, echoed so a report can be
/// reproduced from its JSON alone.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessInfo {
    /// `"quadratic"` (bound `lambda d^2 + k`) or `"linear"` (`lambda d + k`).
    pub kind: &'static str,
    pub lambda: f64,
    pub k: f64,
    pub x0: Vec<f64>,
}

impl WitnessInfo {
    fn quadratic(w: &GrowthWitness) -> Self {
        WitnessInfo { kind: "quadratic", lambda: w.lambda, k: w.k, x0: w.x0.clone() }
    }

    fn linear(w: &LinearWitness) -> Self {
        WitnessInfo { kind: "linear", lambda: w.lambda, k: w.k, x0: w.x0.clone() }
    }
}

/// Outcome of one condition check.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    /// Condition identifier, e.g. `"h2"`, `"c2"`, `"quadratic_growth"`.
    pub condition: String,
    pub verdict: Verdict,
    /// Witnesses the check was run against, when it takes any.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<WitnessInfo>,
    /// Uniform lower bound established by a PASS of `h2` or similar.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Worst (smallest) slack `bound - value` over all samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Sample attaining the worst margin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<f64>>,
    pub shells: Vec<ShellStat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub detail: String,
    pub caveat: &'static str,
}

impl HypothesisReport {
    fn bare(condition: &str, verdict: Verdict, detail: String) -> Self {
        HypothesisReport {
            condition: condition.into(),
            verdict,
            witness: Vec::new(),
            nu: None,
            margin: None,
            worst_point: None,
            shells: Vec::new(),
            counterexample: None,
            detail,
            caveat: CAVEAT,
        }
    }
}

fn dist2(x: &[f64], x0: &[f64]) -> f64 {
    x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn check_region_spec(spec: &SpacetimeSpec, region: &Region) -> Result<()> {
    if spec.dim() != region.dim() {
        return Err(Error::DimensionMismatch { expect: spec.dim(), got: region.dim() });
    }
    Ok(())
}

/// Shared engine for `value(x) <= bound(d(x, x0))` sweeps.
fn growth_sweep<F, B>(
    condition: &str,
    region: &Region,
    x0: &[f64],
    value_at: F,
    bound_at: B,
    detail_prefix: &str,
) -> Result<HypothesisReport>
where
    F: Fn(&[f64]) -> Result<f64>,
    B: Fn(f64) -> f64,
{
    if x0.len() != region.dim() {
        return Err(Error::DimensionMismatch { expect: region.dim(), got: x0.len() });
    }
    let mut margin = f64::INFINITY;
    let mut worst_point = None;
    let mut counterexample: Option<Counterexample> = None;

    let mut visit = |x: &[f64]| -> Result<f64> {
        let value = value_at(x)?;
        let dist = dist2(x, x0).sqrt();
        let bound = bound_at(dist);
        let slack = bound - value;
        if slack < margin {
            margin = slack;
            worst_point = Some(x.to_vec());
        }
        let violation = value - bound;
        if violation > VIOLATION_FLOOR
            && counterexample.as_ref().map_or(true, |c| violation > c.violation)
        {
            counterexample = Some(Counterexample { x: x.to_vec(), value, bound, violation });
        }
        Ok(value / (dist * dist + 1.0))
    };

    visit(region.center())?;
    let mut shells = Vec::with_capacity(region.radii().len());
    for (si, &radius) in region.radii().iter().enumerate() {
        let mut sup_ratio = f64::NEG_INFINITY;
        for x in region.shell_samples(si) {
            sup_ratio = sup_ratio.max(visit(&x)?);
        }
        shells.push(ShellStat { radius, sup_ratio });
    }

    let (verdict, detail) = match &counterexample {
        Some(c) => (
            Verdict::Fail,
            format!(
                "{detail_prefix}: violated at x = {:?} (value {:.6e} > bound {:.6e})",
                c.x, c.value, c.bound
            ),
        ),
        None => (
            Verdict::Pass,
            format!("{detail_prefix}: bound holds at all samples (worst slack {margin:.6e})"),
        ),
    };
    Ok(HypothesisReport {
        condition: condition.into(),
        verdict,
        witness: Vec::new(),
        nu: None,
        margin: Some(margin),
        worst_point,
        shells,
        counterexample,
        detail,
        caveat: CAVEAT,
    })
}

/// Check `field(x) <= lambda d^2(x, x0) + k` over the region.
pub fn check_quadratic_growth(
    field: &ExprAst,
    region: &Region,
    witness: &GrowthWitness,
) -> Result<HypothesisReport> {
    if field.dim() != region.dim() {
        return Err(Error::DimensionMismatch { expect: region.dim(), got: field.dim() });
    }
    let w = GrowthWitness::new(witness.lambda, witness.k, witness.x0.clone())?;
    let mut report = growth_sweep(
        "quadratic_growth",
        region,
        &w.x0,
        |x| field.eval(x),
        |d| w.bound(d * d),
        &format!("field <= {} d^2 + {}", w.lambda, w.k),
    )?;
    report.witness = vec![WitnessInfo::quadratic(&w)];
    Ok(report)
}

/// Fit a quadratic witness from the center and the inner half of the shells
/// by least squares, then lift `k` so the fitted bound covers those inner
/// samples exactly. Outer shells are deliberately left out: verifying the
/// fitted witness over the whole region exposes super-quadratic growth.
pub fn fit_witness(field: &ExprAst, region: &Region, x0: &[f64]) -> Result<GrowthWitness> {
    if field.dim() != region.dim() || x0.len() != region.dim() {
        return Err(Error::DimensionMismatch { expect: region.dim(), got: field.dim() });
    }
    let inner_shells = (region.radii().len() + 1) / 2;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    pts.push((dist2(region.center(), x0), field.eval(region.center())?));
    for si in 0..inner_shells {
        for x in region.shell_samples(si) {
            pts.push((dist2(&x, x0), field.eval(&x)?));
        }
    }
    let n = pts.len() as f64;
    let mean_d = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_v = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let var: f64 = pts.iter().map(|p| (p.0 - mean_d) * (p.0 - mean_d)).sum();
    let cov: f64 = pts.iter().map(|p| (p.0 - mean_d) * (p.1 - mean_v)).sum();
    let lambda = if var > 0.0 { (cov / var).max(0.0) } else { 0.0 };
    let k = pts
        .iter()
        .map(|p| p.1 - lambda * p.0)
        .fold(f64::NEG_INFINITY, f64::max);
    GrowthWitness::new(lambda, k, x0.to_vec())
}

/// Pointwise sufficient criterion for a uniform positive lower bound on
/// `ell` over all paths: either both coefficient ratios are bounded below by
/// positive constants, or `B/H` is sign-definite while both ratios stay
/// nonnegative. Never FAILs; path-space infima cannot be refuted by point
/// samples.
pub fn check_h2(spec: &SpacetimeSpec, region: &Region) -> Result<HypothesisReport> {
    check_region_spec(spec, region)?;
    let mut inf_a = f64::INFINITY;
    let mut inf_c = f64::INFINITY;
    let mut inf_abs_b = f64::INFINITY;
    let mut b_min = f64::INFINITY;
    let mut b_max = f64::NEG_INFINITY;
    let mut count = 0usize;
    for x in region.samples() {
        let (a, b, c, h) = spec.sample_values(&x)?;
        inf_a = inf_a.min(a / h);
        inf_c = inf_c.min(c / h);
        inf_abs_b = inf_abs_b.min((b / h).abs());
        b_min = b_min.min(b / h);
        b_max = b_max.max(b / h);
        count += 1;
    }
    let sign_definite_b = b_min > 0.0 || b_max < 0.0;

    let report = if inf_a > 0.0 && inf_c > 0.0 {
        let nu = inf_a * inf_c;
        let note = if sign_definite_b {
            format!(
                "; B/H sign-definite strengthens the bound to {:.6e}",
                nu + inf_abs_b * inf_abs_b
            )
        } else {
            String::new()
        };
        HypothesisReport {
            nu: Some(nu),
            detail: format!(
                "inf A/H = {inf_a:.6e}, inf C/H = {inf_c:.6e} over {count} samples{note}"
            ),
            ..HypothesisReport::bare("h2", Verdict::Pass, String::new())
        }
    } else if inf_a >= 0.0 && inf_c >= 0.0 && sign_definite_b && inf_abs_b > 0.0 {
        let nu = inf_abs_b * inf_abs_b + inf_a * inf_c;
        HypothesisReport {
            nu: Some(nu),
            detail: format!(
                "B/H sign-definite with inf |B|/H = {inf_abs_b:.6e}, \
                 A/H and C/H nonnegative over {count} samples"
            ),
            ..HypothesisReport::bare("h2", Verdict::Pass, String::new())
        }
    } else {
        HypothesisReport::bare(
            "h2",
            Verdict::Inconclusive,
            format!(
                "no pointwise certificate: inf A/H = {inf_a:.6e}, inf C/H = {inf_c:.6e}, \
                 B/H sign-definite: {sign_definite_b}; a uniform positive lower bound \
                 on ell cannot be decided from samples"
            ),
        )
    };
    Ok(report)
}

/// Path growth condition `m >= h`: PASS via the pointwise criterion
/// `max(inf A/H, inf -C/H) >= sup 1/(lambda d^2 + k)`; FAIL via a constant
/// path, which is a genuine path counterexample.
pub fn check_h3(
    spec: &SpacetimeSpec,
    region: &Region,
    witness: &GrowthWitness,
) -> Result<HypothesisReport> {
    check_region_spec(spec, region)?;
    let w = GrowthWitness::new(witness.lambda, witness.k, witness.x0.clone())?;
    if w.x0.len() != region.dim() {
        return Err(Error::DimensionMismatch { expect: region.dim(), got: w.x0.len() });
    }
    let mut inf_a = f64::INFINITY;
    let mut inf_neg_c = f64::INFINITY;
    let mut h_sup = f64::NEG_INFINITY;
    let mut counterexample: Option<Counterexample> = None;
    for x in region.samples() {
        let (a, b, c, h) = spec.sample_values(&x)?;
        let _ = b;
        let denom = w.bound(dist2(&x, &w.x0));
        if !(denom > 0.0) {
            return Err(Error::Invalid(format!(
                "witness denominator lambda*d^2 + k = {denom:.6e} is not positive at x = {x:?}"
            )));
        }
        inf_a = inf_a.min(a / h);
        inf_neg_c = inf_neg_c.min(-c / h);
        let h_const = 1.0 / denom;
        h_sup = h_sup.max(h_const);
        // Constant path at x: m = max(A/H, -C/H), h = 1/(lambda d^2 + k).
        let m_const = (a / h).max(-c / h);
        let violation = h_const - m_const;
        if violation > VIOLATION_FLOOR
            && counterexample.as_ref().map_or(true, |cx| violation > cx.violation)
        {
            counterexample = Some(Counterexample {
                x: x.clone(),
                value: m_const,
                bound: h_const,
                violation,
            });
        }
    }
    let m_inf = inf_a.max(inf_neg_c);
    let mut report = if m_inf >= h_sup - VIOLATION_FLOOR {
        HypothesisReport {
            margin: Some(m_inf - h_sup),
            detail: format!(
                "every path has m >= {m_inf:.6e} and h <= {h_sup:.6e} \
                 (paths sampled within the region)"
            ),
            ..HypothesisReport::bare("h3", Verdict::Pass, String::new())
        }
    } else if let Some(cx) = counterexample {
        HypothesisReport {
            detail: format!(
                "constant path at x = {:?} has m = {:.6e} < h = {:.6e}",
                cx.x, cx.value, cx.bound
            ),
            counterexample: Some(cx),
            ..HypothesisReport::bare("h3", Verdict::Fail, String::new())
        }
    } else {
        HypothesisReport::bare(
            "h3",
            Verdict::Inconclusive,
            format!(
                "pointwise criterion failed (m lower bound {m_inf:.6e} vs h upper bound \
                 {h_sup:.6e}) and no constant-path counterexample was found"
            ),
        )
    };
    report.witness = vec![WitnessInfo::quadratic(&w)];
    Ok(report)
}

/// Growth conditions for the stationary normal form `A = 1`, `B = delta`,
/// `C = beta > 0`: `beta` at most quadratic and `delta` at most linear.
pub fn check_s2(
    spec: &SpacetimeSpec,
    region: &Region,
    beta_witness: &GrowthWitness,
    delta_witness: &LinearWitness,
) -> Result<HypothesisReport> {
    check_region_spec(spec, region)?;
    for x in region.samples() {
        let (a, _, c, _) = spec.sample_values(&x)?;
        if (a - 1.0).abs() > FORM_TOL * (1.0 + a.abs()) {
            return Err(Error::Invalid(format!(
                "not in stationary form: A = {a:.6e} at x = {x:?}, expected A = 1"
            )));
        }
        if !(c > 0.0) {
            return Err(Error::Invalid(format!(
                "not in stationary form: beta = C = {c:.6e} at x = {x:?} is not positive"
            )));
        }
    }
    let beta = growth_sweep(
        "s2.beta",
        region,
        &beta_witness.x0,
        |x| spec.sample_values(x).map(|(_, _, c, _)| c),
        |d| beta_witness.lambda * d * d + beta_witness.k,
        "beta quadratic growth",
    )?;
    let delta = growth_sweep(
        "s2.delta",
        region,
        &delta_witness.x0,
        |x| spec.sample_values(x).map(|(_, b, _, _)| b),
        |d| delta_witness.lambda * d + delta_witness.k,
        "delta linear growth",
    )?;

    let verdict = if beta.verdict == Verdict::Fail || delta.verdict == Verdict::Fail {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    let margin = match (beta.margin, delta.margin) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };
    let counterexample = if beta.verdict == Verdict::Fail {
        beta.counterexample.clone()
    } else {
        delta.counterexample.clone()
    };
    let worst_point = if beta.margin <= delta.margin {
        beta.worst_point.clone()
    } else {
        delta.worst_point.clone()
    };
    Ok(HypothesisReport {
        condition: "s2".into(),
        verdict,
        witness: vec![
            WitnessInfo::quadratic(beta_witness),
            WitnessInfo::linear(delta_witness),
        ],
        nu: None,
        margin,
        worst_point,
        shells: beta.shells,
        counterexample,
        detail: format!("beta sweep: {}; delta sweep: {}", beta.detail, delta.detail),
        caveat: CAVEAT,
    })
}

/// Strict positivity of `A - C` plus quadratic growth of `H/(A - C)`. For
/// the Kerr-Schild form `A = 1 + V`, `C = 1 - V` this is a quadratic bound
/// on `1/(2V)`.
pub fn check_h3prime(
    spec: &SpacetimeSpec,
    region: &Region,
    witness: &GrowthWitness,
) -> Result<HypothesisReport> {
    check_region_spec(spec, region)?;
    for x in region.samples() {
        let (a, _, c, _) = spec.sample_values(&x)?;
        let gap = a - c;
        if gap <= VIOLATION_FLOOR {
            return Ok(HypothesisReport {
                witness: vec![WitnessInfo::quadratic(witness)],
                counterexample: Some(Counterexample {
                    x: x.clone(),
                    value: gap,
                    bound: 0.0,
                    violation: -gap,
                }),
                detail: format!(
                    "strict positivity of A - C fails: A - C = {gap:.6e} at x = {x:?}"
                ),
                ..HypothesisReport::bare("h3prime", Verdict::Fail, String::new())
            });
        }
    }
    let mut report = growth_sweep(
        "h3prime",
        region,
        &witness.x0,
        |x| spec.sample_values(x).map(|(a, _, c, h)| h / (a - c)),
        |d| witness.lambda * d * d + witness.k,
        "H/(A-C) quadratic growth",
    )?;
    report.detail = format!("A - C > 0 at all samples; {}", report.detail);
    report.witness = vec![WitnessInfo::quadratic(witness)];
    Ok(report)
}

/// Completeness growth condition: `1/mu <= lambda d^2 + k` with
/// `mu = C - A + sqrt((A+C)^2 + 4B^2)`, the (doubled, sign-flipped) negative
/// eigenvalue of the fiber coefficient matrix.
pub fn check_c2(
    spec: &SpacetimeSpec,
    region: &Region,
    witness: &GrowthWitness,
) -> Result<HypothesisReport> {
    check_region_spec(spec, region)?;
    let mut report = growth_sweep(
        "c2",
        region,
        &witness.x0,
        |x| {
            let (a, b, c, _) = spec.sample_values(x)?;
            let mu = c - a + ((a + c) * (a + c) + 4.0 * b * b).sqrt();
            Ok(1.0 / mu)
        },
        |d| witness.lambda * d * d + witness.k,
        "1/mu quadratic growth",
    )?;
    report.condition = "c2".into();
    report.witness = vec![WitnessInfo::quadratic(witness)];
    Ok(report)
}

/// The route assuming a uniform negative upper bound on `ell` is refutable
/// outright: a constant path at any point has
/// `ell = (B^2 + AC)/H^2 = 1/H > 0`, which no negative bound accommodates.
/// The report carries that constant path as a concrete counterexample.
pub fn check_ell_negative(spec: &SpacetimeSpec, region: &Region) -> Result<HypothesisReport> {
    check_region_spec(spec, region)?;
    let x = region.center().to_vec();
    let (_, _, _, h) = spec.sample_values(&x)?;
    let ell_const = 1.0 / h;
    Ok(HypothesisReport {
        counterexample: Some(Counterexample {
            x: x.clone(),
            value: ell_const,
            bound: 0.0,
            violation: ell_const,
        }),
        detail: format!(
            "the constant path at x = {x:?} has ell = 1/H = {ell_const:.6e} > 0; \
             under the certificate H > 0 no spacetime admits ell <= -nu < 0 for all paths"
        ),
        ..HypothesisReport::bare("ell_negative", Verdict::Fail, String::new())
    })
}

/// Base completeness. Euclidean space is complete; a user-supplied base
/// metric cannot be certified by sampling.
pub fn check_h1(spec: &SpacetimeSpec) -> HypothesisReport {
    if spec.base_metric().is_euclidean() {
        HypothesisReport::bare(
            "h1",
            Verdict::Pass,
            "base is Euclidean space, which is complete".into(),
        )
    } else {
        HypothesisReport::bare(
            "h1",
            Verdict::Inconclusive,
            "completeness of a custom base metric is not verified here; \
             treat it as a user obligation"
            .into(),
        )
    }
}

/// Witness bundle for [`theorem_verdicts`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessSet {
    pub quadratic: GrowthWitness,
    pub linear: LinearWitness,
}

/// One sufficient-condition route and the reports backing it.
#[derive(Debug, Clone, Serialize)]
pub struct RouteReport {
    pub route: String,
    pub applicable: bool,
    pub verdict: Verdict,
    pub reports: Vec<HypothesisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Combined classification of one spacetime against all implemented routes.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremSummary {
    pub label: String,
    pub connectedness: Vec<RouteReport>,
    /// First connectedness route whose checks all PASS.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connected_route: Option<String>,
    pub completeness: RouteReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete_route: Option<String>,
    pub notes: Vec<String>,
    pub caveat: &'static str,
}

fn combine(route: &str, applicable: bool, reports: Vec<HypothesisReport>) -> RouteReport {
    let verdict = if !applicable {
        Verdict::Inconclusive
    } else if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if reports.iter().all(|r| r.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    RouteReport {
        route: route.into(),
        applicable,
        verdict,
        reports,
        note: if applicable {
            None
        } else {
            Some("coefficient form does not match this route".into())
        },
    }
}

/// Run every applicable checker and classify the spacetime: which
/// connectedness route (if any) is established at the sampled region, and
/// whether the completeness route holds.
pub fn theorem_verdicts(
    spec: &SpacetimeSpec,
    region: &Region,
    witnesses: &WitnessSet,
) -> Result<TheoremSummary> {
    check_region_spec(spec, region)?;
    let samples = region.samples();

    // Coefficient form flags, decided at sample tolerance.
    let mut a_is_one = true;
    let mut b_is_zero = true;
    let mut a_pos = true;
    let mut c_pos = true;
    let mut a_eq_c = true;
    let mut a_is_zero = true;
    let mut c_is_zero = true;
    let mut a_neg = true;
    let mut b_nonvanishing = true;
    for x in &samples {
        let (a, b, c, _) = spec.sample_values(x)?;
        let scale = 1.0 + a.abs() + b.abs() + c.abs();
        a_is_one &= (a - 1.0).abs() <= FORM_TOL * scale;
        b_is_zero &= b.abs() <= FORM_TOL * scale;
        a_pos &= a > 0.0;
        c_pos &= c > 0.0;
        a_neg &= a < 0.0;
        a_eq_c &= (a - c).abs() <= FORM_TOL * scale;
        a_is_zero &= a.abs() <= FORM_TOL * scale;
        c_is_zero &= c.abs() <= FORM_TOL * scale;
        b_nonvanishing &= b.abs() > FORM_TOL * scale;
    }

    let h1 = check_h1(spec);
    let h2 = check_h2(spec, region)?;
    let mut notes = Vec::new();
    if !spec.base_metric().is_euclidean() {
        notes.push(
            "custom base metric: completeness of the base (h1/c1) is a user obligation"
                .to_string(),
        );
    }

    let mut connectedness = Vec::new();

    connectedness.push(combine(
        "h1+h2+h3",
        true,
        vec![h1.clone(), h2.clone(), check_h3(spec, region, &witnesses.quadratic)?],
    ));

    connectedness.push(combine(
        "h1+h2+h3'",
        true,
        vec![h1.clone(), h2.clone(), check_h3prime(spec, region, &witnesses.quadratic)?],
    ));

    connectedness.push(combine(
        "ell_negative",
        true,
        vec![h1.clone(), check_ell_negative(spec, region)?],
    ));

    // Static normal form: B = 0 and A > 0 force C = beta > 0 through the
    // certificate; connectedness needs only quadratic growth of beta.
    let static_applicable = b_is_zero && a_pos;
    let mut static_route = if static_applicable {
        let mut beta_growth = growth_sweep(
            "static.beta",
            region,
            &witnesses.quadratic.x0,
            |x| spec.sample_values(x).map(|(_, _, c, _)| c),
            |d| witnesses.quadratic.lambda * d * d + witnesses.quadratic.k,
            "beta quadratic growth",
        )?;
        beta_growth.witness = vec![WitnessInfo::quadratic(&witnesses.quadratic)];
        if beta_growth.verdict == Verdict::Fail && superquadratic_trend(&beta_growth.shells) {
            notes.push(
                "sampled growth of beta trends super-quadratic; static spacetimes with \
                 strictly super-quadratic fiber growth are known to be geodesically \
                 disconnected, so the quadratic threshold is sharp"
                    .to_string(),
            );
        }
        combine("static_growth", true, vec![h1.clone(), beta_growth])
    } else {
        combine("static_growth", false, Vec::new())
    };
    if static_applicable {
        static_route.note =
            Some("static form: the reduced action dominates the static comparison functional".into());
    }
    connectedness.push(static_route);

    connectedness.push(if a_is_one && c_pos {
        combine(
            "stationary_s2",
            true,
            vec![h1.clone(), check_s2(spec, region, &witnesses.quadratic, &witnesses.linear)?],
        )
    } else {
        combine("stationary_s2", false, Vec::new())
    });

    connectedness.push(if a_is_zero && c_is_zero {
        let positivity_ok = b_nonvanishing;
        let mut reports = vec![h1.clone()];
        if positivity_ok {
            let mut delta_growth = growth_sweep(
                "warped.delta",
                region,
                &witnesses.quadratic.x0,
                |x| spec.sample_values(x).map(|(_, b, _, _)| b.abs()),
                |d| witnesses.quadratic.lambda * d * d + witnesses.quadratic.k,
                "|B| quadratic growth",
            )?;
            delta_growth.witness = vec![WitnessInfo::quadratic(&witnesses.quadratic)];
            reports.push(delta_growth);
            combine("warped_product", true, reports)
        } else {
            reports.push(HypothesisReport::bare(
                "warped.delta",
                Verdict::Inconclusive,
                "|B| is not bounded away from zero at the samples".into(),
            ));
            combine("warped_product", true, reports)
        }
    } else {
        combine("warped_product", false, Vec::new())
    });

    connectedness.push(if a_eq_c && a_pos && !a_is_zero {
        let mut ratio_growth = growth_sweep(
            "a_eq_c.ratio",
            region,
            &witnesses.quadratic.x0,
            |x| spec.sample_values(x).map(|(a, _, _, h)| h / a),
            |d| witnesses.quadratic.lambda * d * d + witnesses.quadratic.k,
            "H/A quadratic growth",
        )?;
        ratio_growth.witness = vec![WitnessInfo::quadratic(&witnesses.quadratic)];
        combine("a_eq_c_growth", true, vec![h1.clone(), ratio_growth])
    } else {
        combine("a_eq_c_growth", false, Vec::new())
    });

    if a_eq_c && a_neg {
        notes.push(
            "A = C < 0 at all samples: the metric is stationary with beta = |A| after \
             swapping the fiber roles"
                .to_string(),
        );
    }

    let connected_route = connectedness
        .iter()
        .find(|r| r.verdict == Verdict::Pass)
        .map(|r| r.route.clone());

    let mut c1 = check_h1(spec);
    c1.condition = "c1".into();
    let completeness = combine(
        "c1+c2",
        true,
        vec![c1, check_c2(spec, region, &witnesses.quadratic)?],
    );
    let complete_route = if completeness.verdict == Verdict::Pass {
        Some(completeness.route.clone())
    } else {
        None
    };

    Ok(TheoremSummary {
        label: spec.label().to_string(),
        connectedness,
        connected_route,
        completeness,
        complete_route,
        notes,
        caveat: CAVEAT,
    })
}

/// Heuristic super-quadratic trend: the shell ratio `sup field/(d^2+1)` keeps
/// growing by at least 20% per shell. A quadratic field's ratio converges, so
/// its successive factors approach 1 and fall under the threshold.
fn superquadratic_trend(shells: &[ShellStat]) -> bool {
    shells.len() >= 3
        && shells.iter().all(|s| s.sup_ratio > 0.0)
        && shells.windows(2).all(|w| w[1].sup_ratio > 1.2 * w[0].sup_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfield::parse_expression;
    use crate::pathspace::{path_integrals, DiscretePath};
    use crate::spacetime::{BaseMetric, Zoo};

    fn minkowski_like() -> SpacetimeSpec {
        SpacetimeSpec::builtin(Zoo::Stationary {
            delta: parse_expression("0", 2).unwrap(),
            beta: parse_expression("1", 2).unwrap(),
        })
        .unwrap()
    }

    fn godel() -> SpacetimeSpec {
        SpacetimeSpec::builtin(Zoo::Godel { omega: 1.0 / 2.0_f64.sqrt() }).unwrap()
    }

    fn ks_half() -> SpacetimeSpec {
        SpacetimeSpec::builtin(Zoo::KerrSchild {
            v: parse_expression("0.5", 2).unwrap(),
        })
        .unwrap()
    }

    fn region2(radii: &[f64]) -> Region {
        Region::new(vec![0.0, 0.0], radii.to_vec(), 16, 11).unwrap()
    }

    fn witness2(lambda: f64, k: f64) -> GrowthWitness {
        GrowthWitness::new(lambda, k, vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn region_samples_are_deterministic_and_on_shells() {
        let r = Region::new(vec![1.0, -2.0, 0.5], vec![2.0, 5.0], 7, 42).unwrap();
        let s1 = r.samples();
        let s2 = r.samples();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 1 + 2 * 7);
        for (i, x) in s1.iter().enumerate().skip(1) {
            let d = dist2(x, r.center()).sqrt();
            let expected = if i <= 7 { 2.0 } else { 5.0 };
            assert!((d - expected).abs() < 1e-9, "sample {i} at distance {d}");
        }
    }

    #[test]
    fn one_dimensional_shells_alternate_sides() {
        let r = Region::new(vec![0.0], vec![3.0], 4, 0).unwrap();
        let s = r.samples();
        assert_eq!(s[1][0], 3.0);
        assert_eq!(s[2][0], -3.0);
        assert_eq!(s[3][0], 3.0);
        assert_eq!(s[4][0], -3.0);
    }

    #[test]
    fn region_rejects_bad_radii() {
        assert!(Region::new(vec![0.0], vec![2.0, 1.0], 4, 0).is_err());
        assert!(Region::new(vec![0.0], vec![-1.0], 4, 0).is_err());
        assert!(Region::new(vec![0.0], vec![], 4, 0).is_err());
        assert!(Region::new(vec![0.0], vec![1.0], 0, 0).is_err());
    }

    #[test]
    fn growth_check_passes_quadratic_family_at_equality() {
        let field = parse_expression("1 + abs(x1)^2", 1).unwrap();
        let region = Region::new(vec![0.0], vec![1.0, 10.0, 100.0, 1e4], 4, 0).unwrap();
        let w = GrowthWitness::new(1.0, 1.0, vec![0.0]).unwrap();
        let r = check_quadratic_growth(&field, &region, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin.unwrap().abs() < 1e-9, "equality outside the unit ball");
    }

    #[test]
    fn growth_check_fails_superquadratic_family_with_sound_witness() {
        let field = parse_expression("1 + abs(x1)^2.25", 1).unwrap();
        let region = Region::new(vec![0.0], vec![1.0, 10.0, 100.0, 1e4], 4, 0).unwrap();
        let w = GrowthWitness::new(1.0, 1.0, vec![0.0]).unwrap();
        let r = check_quadratic_growth(&field, &region, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let cx = r.counterexample.expect("FAIL carries a counterexample");
        // Re-evaluate standalone: the violation must be genuine.
        let v = field.eval(&cx.x).unwrap();
        let bound = 1.0 * dist2(&cx.x, &[0.0]) + 1.0;
        assert!(v - bound > 1e-12, "counterexample violation {:.3e}", v - bound);
        // Shell ratios expose the trend.
        assert!(superquadratic_trend(&r.shells));
    }

    #[test]
    fn growth_check_boundary_equality_is_pass() {
        let field = parse_expression("5", 1).unwrap();
        let region = Region::new(vec![0.0], vec![1.0, 2.0], 2, 0).unwrap();
        let w = GrowthWitness::new(0.0, 5.0, vec![0.0]).unwrap();
        let r = check_quadratic_growth(&field, &region, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.margin, Some(0.0));
    }

    #[test]
    fn growth_check_monotone_in_witness() {
        let field = parse_expression("1 + abs(x1)^2", 1).unwrap();
        let region = Region::new(vec![0.0], vec![1.0, 5.0, 25.0], 4, 0).unwrap();
        for (l, k) in [(1.0, 1.0), (2.0, 1.0), (1.0, 7.0), (3.0, 10.0)] {
            let w = GrowthWitness::new(l, k, vec![0.0]).unwrap();
            let r = check_quadratic_growth(&field, &region, &w).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "witness ({l}, {k})");
        }
    }

    #[test]
    fn h2_certificates_and_inconclusive() {
        let region = region2(&[1.0, 2.0]);
        let r = check_h2(&minkowski_like(), &region).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.nu, Some(1.0));

        let r = check_h2(&ks_half(), &region).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.nu.unwrap() - 0.75).abs() < 1e-15);

        let r = check_h2(&godel(), &region).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.nu.is_none());
    }

    #[test]
    fn h2_uses_sign_definite_b_when_ratios_touch_zero() {
        let spec = SpacetimeSpec::builtin(Zoo::Custom {
            label: "null A".into(),
            a: parse_expression("0", 2).unwrap(),
            b: parse_expression("1", 2).unwrap(),
            c: parse_expression("1", 2).unwrap(),
            base: BaseMetric::Euclidean,
        })
        .unwrap();
        let r = check_h2(&spec, &region2(&[1.0, 3.0])).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.nu.unwrap() - 1.0).abs() < 1e-15, "nu = (inf |B|/H)^2 = 1");
    }

    #[test]
    fn h3_boundary_pass_fail_and_constant_coefficients() {
        let region = region2(&[1.0, 2.0]);
        let r = check_h3(&minkowski_like(), &region, &witness2(0.0, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "m = 1 >= h = 1 at the boundary");

        let r = check_h3(&godel(), &region, &witness2(1.0, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let cx = r.counterexample.unwrap();
        assert!(cx.value < cx.bound, "constant path m {} < h {}", cx.value, cx.bound);

        let r = check_h3(&ks_half(), &region, &witness2(0.0, 2.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.margin.unwrap() - 1.0).abs() < 1e-12, "m = 1.5, h = 0.5");
    }

    #[test]
    fn s2_stationary_form_checks() {
        let region = region2(&[1.0, 2.0]);
        let r = check_s2(
            &minkowski_like(),
            &region,
            &witness2(0.0, 1.0),
            &LinearWitness::new(0.0, 0.0, vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);

        // delta = x1 is bounded by the distance to the origin.
        let spec = SpacetimeSpec::builtin(Zoo::Stationary {
            delta: parse_expression("x1", 2).unwrap(),
            beta: parse_expression("1", 2).unwrap(),
        })
        .unwrap();
        let r = check_s2(
            &spec,
            &region,
            &witness2(0.0, 1.0),
            &LinearWitness::new(1.0, 0.0, vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);

        // Super-quadratic beta fails the beta sweep.
        let spec = SpacetimeSpec::builtin(Zoo::Static {
            beta: parse_expression("1 + (x1^2 + x2^2)^1.125", 2).unwrap(),
        })
        .unwrap();
        let region = region2(&[1.0, 4.0, 16.0, 64.0]);
        let r = check_s2(
            &spec,
            &region,
            &witness2(1.0, 1.0),
            &LinearWitness::new(0.0, 1.0, vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.counterexample.is_some());

        // Non-stationary input is a usage error, not a verdict.
        assert!(check_s2(
            &godel(),
            &region2(&[1.0]),
            &witness2(0.0, 1.0),
            &LinearWitness::new(0.0, 1.0, vec![0.0, 0.0]).unwrap()
        )
        .is_err());
    }

    #[test]
    fn h3prime_positivity_and_growth() {
        let region = region2(&[1.0, 2.0]);
        let r = check_h3prime(&ks_half(), &region, &witness2(0.0, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "H/(A-C) = 1 <= 1");

        let r = check_h3prime(&minkowski_like(), &region, &witness2(1.0, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Fail, "A - C = 0 is not strictly positive");
        assert!(r.counterexample.is_some());

        let spec = SpacetimeSpec::builtin(Zoo::KerrSchild {
            v: parse_expression("1/(1 + (x1^2 + x2^2)^2)", 2).unwrap(),
        })
        .unwrap();
        let region = region2(&[1.0, 2.0, 4.0, 8.0]);
        let r = check_h3prime(&spec, &region, &witness2(1.0, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Fail, "1/(2V) grows quartically");
    }

    #[test]
    fn c2_known_values() {
        let region = region2(&[1.0, 2.0]);
        let r = check_c2(&godel(), &region, &witness2(0.0, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin.unwrap() >= 0.5 - 1e-12, "1/mu <= 1/2 for this family");

        let r = check_c2(&minkowski_like(), &region, &witness2(0.0, 0.5)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin.unwrap().abs() < 1e-15, "1/mu = 1/2 exactly");

        // 1/mu = (1 + x1^4)/2 outgrows any quadratic bound.
        let spec = SpacetimeSpec::builtin(Zoo::Custom {
            label: "superquadratic 1/mu".into(),
            a: parse_expression("1", 1).unwrap(),
            b: parse_expression("0", 1).unwrap(),
            c: parse_expression("1/(1 + x1^4)", 1).unwrap(),
            base: BaseMetric::Euclidean,
        })
        .unwrap();
        let region = Region::new(vec![0.0], vec![1.0, 2.0, 4.0, 8.0], 2, 0).unwrap();
        let r = check_c2(&spec, &region, &GrowthWitness::new(1.0, 1.0, vec![0.0]).unwrap())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let cx = r.counterexample.unwrap();
        assert!(cx.violation > 1e-12);
    }

    #[test]
    fn ell_negative_is_refuted_by_constant_paths() {
        let r = check_ell_negative(&godel(), &region2(&[1.0])).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let cx = r.counterexample.unwrap();
        // ell on the constant path at the origin is 1/H = 2.
        assert!((cx.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fitted_witness_covers_quadratic_and_exposes_superquadratic() {
        let quad = parse_expression("2 + 3*abs(x1)^2", 1).unwrap();
        let region = Region::new(vec![0.0], vec![1.0, 10.0, 100.0, 1000.0], 4, 0).unwrap();
        let w = fit_witness(&quad, &region, &[0.0]).unwrap();
        let r = check_quadratic_growth(&quad, &region, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "fitted ({}, {})", w.lambda, w.k);
        assert!((w.lambda - 3.0).abs() < 1e-9);

        let sup = parse_expression("1 + abs(x1)^2.5", 1).unwrap();
        let w = fit_witness(&sup, &region, &[0.0]).unwrap();
        let r = check_quadratic_growth(&sup, &region, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Fail, "outer shells break the inner fit");
    }

    #[test]
    fn h2_pass_bounds_ell_on_real_paths() {
        // Radial monotone profile: both ratio infima are attained on sampled
        // shells, so the certificate is exact for paths inside the region.
        let spec = SpacetimeSpec::builtin(Zoo::KerrSchild {
            v: parse_expression("0.6/(1 + x1^2 + x2^2)", 2).unwrap(),
        })
        .unwrap();
        let rmax = 2.0;
        let region = Region::new(vec![0.0, 0.0], vec![1.0, rmax], 32, 5).unwrap();
        let report = check_h2(&spec, &region).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let nu = report.nu.unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let mut nodes = Vec::new();
            for _ in 0..9 {
                // Points inside the sampled ball.
                let r = rmax * rng.gen::<f64>().sqrt();
                let th = rng.gen::<f64>() * std::f64::consts::TAU;
                nodes.push(r * th.cos());
                nodes.push(r * th.sin());
            }
            let path = DiscretePath::from_nodes(2, nodes).unwrap();
            let pf = path_integrals(&spec, &path).unwrap();
            assert!(pf.ell >= nu - 1e-12, "ell {} vs nu {nu}", pf.ell);
        }
    }

    #[test]
    fn verdict_summary_for_constant_kerr_schild() {
        let region = region2(&[1.0, 2.0]);
        let w = WitnessSet {
            quadratic: witness2(0.0, 2.0),
            linear: LinearWitness::new(1.0, 1.0, vec![0.0, 0.0]).unwrap(),
        };
        let s = theorem_verdicts(&ks_half(), &region, &w).unwrap();
        assert!(s.connected_route.is_some());
        let h3p = s.connectedness.iter().find(|r| r.route == "h1+h2+h3'").unwrap();
        assert_eq!(h3p.verdict, Verdict::Pass);
        assert_eq!(s.completeness.verdict, Verdict::Pass);
        assert_eq!(s.complete_route.as_deref(), Some("c1+c2"));
    }

    #[test]
    fn verdict_summary_for_rotating_dust() {
        let region = region2(&[1.0, 2.0]);
        let w = WitnessSet {
            quadratic: witness2(1.0, 1.0),
            linear: LinearWitness::new(1.0, 1.0, vec![0.0, 0.0]).unwrap(),
        };
        let s = theorem_verdicts(&godel(), &region, &w).unwrap();
        assert!(s.connected_route.is_none(), "no route should pass");
        assert_eq!(s.completeness.verdict, Verdict::Pass, "completeness holds");
    }

    #[test]
    fn verdict_summary_flags_sharp_static_failure() {
        let spec = SpacetimeSpec::builtin(Zoo::Static {
            beta: parse_expression("1 + abs(x1)^2.25", 1).unwrap(),
        })
        .unwrap();
        let region = Region::new(vec![0.0], vec![1.0, 4.0, 16.0, 64.0], 2, 0).unwrap();
        let w = WitnessSet {
            quadratic: GrowthWitness::new(1.0, 1.0, vec![0.0]).unwrap(),
            linear: LinearWitness::new(0.0, 1.0, vec![0.0]).unwrap(),
        };
        let s = theorem_verdicts(&spec, &region, &w).unwrap();
        assert!(s.connected_route.is_none());
        let static_route = s.connectedness.iter().find(|r| r.route == "static_growth").unwrap();
        assert!(static_route.applicable);
        assert_eq!(static_route.verdict, Verdict::Fail);
        assert!(
            s.notes.iter().any(|n| n.contains("sharp")),
            "sharpness note expected, got {:?}",
            s.notes
        );
    }

    #[test]
    fn verdict_summary_routes_warped_and_a_eq_c() {
        let region = region2(&[1.0, 2.0]);
        let w = WitnessSet {
            quadratic: witness2(1.0, 2.0),
            linear: LinearWitness::new(1.0, 1.0, vec![0.0, 0.0]).unwrap(),
        };
        let warped = SpacetimeSpec::builtin(Zoo::Custom {
            label: "warped".into(),
            a: parse_expression("0", 2).unwrap(),
            b: parse_expression("1 + x1^2 + x2^2", 2).unwrap(),
            c: parse_expression("0", 2).unwrap(),
            base: BaseMetric::Euclidean,
        })
        .unwrap();
        let s = theorem_verdicts(&warped, &region, &w).unwrap();
        let route = s.connectedness.iter().find(|r| r.route == "warped_product").unwrap();
        assert!(route.applicable);
        assert_eq!(route.verdict, Verdict::Pass);

        let aeqc = SpacetimeSpec::builtin(Zoo::Custom {
            label: "a=c".into(),
            a: parse_expression("1", 2).unwrap(),
            b: parse_expression("1", 2).unwrap(),
            c: parse_expression("1", 2).unwrap(),
            base: BaseMetric::Euclidean,
        })
        .unwrap();
        let s = theorem_verdicts(&aeqc, &region, &w).unwrap();
        let route = s.connectedness.iter().find(|r| r.route == "a_eq_c_growth").unwrap();
        assert!(route.applicable);
        assert_eq!(route.verdict, Verdict::Pass, "H/A = 2 <= d^2 + 2");
    }

    #[test]
    fn reports_serialize_deterministically() {
        let region = region2(&[1.0, 2.0]);
        let w = WitnessSet {
            quadratic: witness2(1.0, 1.0),
            linear: LinearWitness::new(1.0, 1.0, vec![0.0, 0.0]).unwrap(),
        };
        let a = serde_json::to_string(&theorem_verdicts(&godel(), &region, &w).unwrap()).unwrap();
        let b = serde_json::to_string(&theorem_verdicts(&godel(), &region, &w).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
