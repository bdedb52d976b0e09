//! Command execution: each runner builds its core inputs from the config,
//! runs the computation, writes the artifacts, and reports a compact outcome
//! used for the process exit code and for sweep summary rows.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::Value;

use gts_core::connect::{minimize_action, Event, SolverConfig, StopReason};
use gts_core::hypotheses::{
    check_c2, check_ell_negative, check_h1, check_h2, check_h3, check_h3prime,
    check_quadratic_growth, check_s2, fit_witness, theorem_verdicts, GrowthWitness,
    HypothesisReport, LinearWitness, Region, TheoremSummary, WitnessSet,
};
use gts_core::shoot::{
    completeness_probe, integrate_geodesic, InitialData, ProbeConfig, ShootConfig, StepControl,
    Termination, Trajectory,
};
use gts_core::spacetime::{spectral, SpacetimeSpec};
use gts_core::ExprAst;

use crate::config::{
    build_spacetime, parse_config, CheckCmd, CommandBlock, ConnectCmd, DescribeCmd, EventCfg,
    ProbeCmd, RegionCfg, RunConfig, ShootCmd, StepCfg, SweepCmd, WitnessCfg,
};
use crate::error::{keyed, validation, CliError, Result};
use crate::jsonfmt::{fmt_f64, to_json_bytes};
use crate::output::{columns, write_atomic, CsvBuilder};

/// Command-line overrides; each applies wherever the corresponding config
/// key exists (inside every sweep cell as well).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub segments: Option<usize>,
    pub smax: Option<f64>,
}

/// How the run ended, separate from artifact writing (artifacts are written
/// even for failed solves so the failure can be inspected).
#[derive(Debug, Clone)]
pub enum RunStatus {
    Ok,
    Breakdown(String),
    NonConverged(String),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// One-token result for console and sweep summaries.
    pub verdict: String,
    pub j: Option<f64>,
    pub residual: Option<f64>,
    pub status: RunStatus,
}

impl Outcome {
    fn plain(verdict: impl Into<String>) -> Self {
        Outcome { verdict: verdict.into(), j: None, residual: None, status: RunStatus::Ok }
    }
}

/// Resolve the output directory, create it, and dispatch.
pub fn execute(cfg: &RunConfig, overrides: &Overrides) -> Result<Outcome> {
    let outdir = overrides
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.output.dir.as_deref().unwrap_or("out")));
    fs::create_dir_all(&outdir)?;
    dispatch(cfg, overrides, &outdir)
}

fn dispatch(cfg: &RunConfig, overrides: &Overrides, outdir: &Path) -> Result<Outcome> {
    match &cfg.command {
        CommandBlock::Describe(cmd) => run_describe(cfg, cmd, outdir),
        CommandBlock::Connect(cmd) => run_connect(cfg, cmd, overrides, outdir),
        CommandBlock::Shoot(cmd) => run_shoot(cfg, cmd, overrides, outdir),
        CommandBlock::Probe(cmd) => run_probe(cfg, cmd, overrides, outdir),
        CommandBlock::Check(cmd) => run_check(cfg, cmd, overrides, outdir),
        CommandBlock::Sweep(cmd) => run_sweep(cfg, cmd, overrides, outdir),
    }
}

// ---------------------------------------------------------------- describe

#[derive(Serialize)]
struct ValuesEcho {
    a: f64,
    b: f64,
    c: f64,
    h: f64,
}

#[derive(Serialize)]
struct SpectralEcho {
    lambda_plus: f64,
    lambda_minus: f64,
    mu: f64,
}

#[derive(Serialize)]
struct DescribeJson {
    command: &'static str,
    label: String,
    dim: usize,
    base: &'static str,
    coefficients: CoefficientsEcho,
    at: Vec<f64>,
    values: ValuesEcho,
    spectral: SpectralEcho,
}

#[derive(Serialize)]
struct CoefficientsEcho {
    a: String,
    b: String,
    c: String,
}

fn run_describe(cfg: &RunConfig, cmd: &DescribeCmd, outdir: &Path) -> Result<Outcome> {
    let spec = build_spacetime(&cfg.spacetime)?;
    let at = cmd.at.clone().unwrap_or_else(|| vec![0.0; spec.dim()]);
    let sample = spec.sample_coefficients(&at).map_err(|e| keyed("command.at", e))?;
    let spectral = spectral(&sample);
    let (fa, fb, fc) = spec.coefficient_fields();
    let payload = DescribeJson {
        command: "describe",
        label: spec.label().to_string(),
        dim: spec.dim(),
        base: if spec.base_metric().is_euclidean() { "euclidean" } else { "field" },
        coefficients: CoefficientsEcho {
            a: fa.to_string(),
            b: fb.to_string(),
            c: fc.to_string(),
        },
        at,
        values: ValuesEcho { a: sample.a, b: sample.b, c: sample.c, h: sample.h },
        spectral: SpectralEcho {
            lambda_plus: spectral.lambda_plus,
            lambda_minus: spectral.lambda_minus,
            mu: spectral.mu,
        },
    };
    if cfg.output.wants("json") {
        write_atomic(&outdir.join("describe.json"), &to_json_bytes(&payload)?)?;
    }
    Ok(Outcome::plain(spec.label().to_string()))
}

// ----------------------------------------------------------------- connect

#[derive(Serialize)]
struct EventEcho {
    x: Vec<f64>,
    y: f64,
    t: f64,
}

impl EventEcho {
    fn from_cfg(e: &EventCfg) -> Self {
        EventEcho { x: e.x.clone(), y: e.y, t: e.t }
    }
}

#[derive(Serialize)]
struct SolverEcho {
    segments: usize,
    max_iters: usize,
    grad_tol: f64,
    restarts: usize,
    seed: u64,
    ell_floor: f64,
}

#[derive(Serialize)]
struct MomentaEcho {
    c1: f64,
    c2: f64,
}

#[derive(Serialize)]
struct RestartEcho {
    index: usize,
    iterations: usize,
    j: f64,
    grad_norm: f64,
    reason: &'static str,
}

#[derive(Serialize)]
struct ConnectJson {
    command: &'static str,
    spacetime: String,
    from: EventEcho,
    to: EventEcho,
    config: SolverEcho,
    converged: bool,
    reason: &'static str,
    iterations: usize,
    j: f64,
    f: f64,
    residual: f64,
    grad_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    momenta: Option<MomentaEcho>,
    restarts: Vec<RestartEcho>,
}

fn stop_reason_str(r: StopReason) -> &'static str {
    match r {
        StopReason::GradTol => "grad_tol",
        StopReason::IterLimit => "iter_limit",
        StopReason::Stall => "stall",
        StopReason::Breakdown => "breakdown",
    }
}

fn run_connect(
    cfg: &RunConfig,
    cmd: &ConnectCmd,
    overrides: &Overrides,
    outdir: &Path,
) -> Result<Outcome> {
    let spec = build_spacetime(&cfg.spacetime)?;
    let mut solver = SolverConfig::default();
    if let Some(v) = overrides.segments.or(cmd.segments) {
        solver.segments = v;
    }
    if let Some(v) = cmd.max_iters {
        solver.max_iters = v;
    }
    if let Some(v) = cmd.grad_tol {
        solver.grad_tol = v;
    }
    if let Some(v) = cmd.restarts {
        solver.restarts = v;
    }
    if let Some(v) = overrides.seed.or(cmd.seed) {
        solver.seed = v;
    }
    if let Some(v) = cmd.ell_floor {
        solver.ell_floor = v;
    }
    let from = Event { x: cmd.from.x.clone(), y: cmd.from.y, t: cmd.from.t };
    let to = Event { x: cmd.to.x.clone(), y: cmd.to.y, t: cmd.to.t };
    let sol = minimize_action(&spec, &from, &to, &solver)
        .map_err(|e| keyed("command", e))?;

    let payload = ConnectJson {
        command: "connect",
        spacetime: spec.label().to_string(),
        from: EventEcho::from_cfg(&cmd.from),
        to: EventEcho::from_cfg(&cmd.to),
        config: SolverEcho {
            segments: solver.segments,
            max_iters: solver.max_iters,
            grad_tol: solver.grad_tol,
            restarts: solver.restarts,
            seed: solver.seed,
            ell_floor: solver.ell_floor,
        },
        converged: sol.converged,
        reason: stop_reason_str(sol.reason),
        iterations: sol.iterations,
        j: sol.j,
        f: sol.f,
        residual: sol.residual,
        grad_norm: sol.grad_norm,
        momenta: sol.fibers.as_ref().map(|f| MomentaEcho { c1: f.c1, c2: f.c2 }),
        restarts: sol
            .restarts
            .iter()
            .map(|r| RestartEcho {
                index: r.index,
                iterations: r.iterations,
                j: r.j,
                grad_norm: r.grad_norm,
                reason: stop_reason_str(r.reason),
            })
            .collect(),
    };
    if cfg.output.wants("json") {
        write_atomic(&outdir.join("connect.json"), &to_json_bytes(&payload)?)?;
    }
    if cfg.output.wants("csv") {
        if let Some(fibers) = &sol.fibers {
            let mut csv = CsvBuilder::new(&columns(spec.dim(), &["y", "t"]));
            for i in 0..=sol.path.segments() {
                let mut row = vec![sol.path.grid(i)];
                row.extend_from_slice(sol.path.node(i));
                row.push(fibers.y[i]);
                row.push(fibers.t[i]);
                csv.float_row(row);
            }
            write_atomic(&outdir.join("connect.csv"), &csv.into_bytes())?;
        }
    }

    let status = if sol.converged {
        RunStatus::Ok
    } else if sol.reason == StopReason::Breakdown {
        RunStatus::Breakdown(
            "action stopped being evaluable (degenerate reduction or certificate violation); \
             see connect.json"
                .into(),
        )
    } else {
        RunStatus::NonConverged(format!(
            "did not reach grad_tol: reason {}, grad_norm {:.3e}",
            stop_reason_str(sol.reason),
            sol.grad_norm
        ))
    };
    Ok(Outcome {
        verdict: if sol.converged { "converged".into() } else { stop_reason_str(sol.reason).into() },
        j: if sol.j.is_finite() { Some(sol.j) } else { None },
        residual: if sol.residual.is_finite() { Some(sol.residual) } else { None },
        status,
    })
}

// ------------------------------------------------------------------- shoot

#[derive(Serialize)]
struct TerminationEcho {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

fn termination_echo(t: &Termination) -> TerminationEcho {
    match t {
        Termination::ReachedSMax => {
            TerminationEcho { kind: "reached_s_max", s: None, message: None }
        }
        Termination::BlowUp { s } => TerminationEcho { kind: "blow_up", s: Some(*s), message: None },
        Termination::HViolation { s } => {
            TerminationEcho { kind: "h_violation", s: Some(*s), message: None }
        }
        Termination::EvalError { s, message } => TerminationEcho {
            kind: "eval_error",
            s: Some(*s),
            message: Some(message.clone()),
        },
        Termination::StepLimit { s } => {
            TerminationEcho { kind: "step_limit", s: Some(*s), message: None }
        }
    }
}

#[derive(Serialize)]
struct ConservedEcho {
    c1: f64,
    c2: f64,
    e_z: f64,
    roundtrip_residual: f64,
}

#[derive(Serialize)]
struct DriftEcho {
    c1: f64,
    c2: f64,
    e_z: f64,
}

#[derive(Serialize)]
struct FinalEcho {
    s: f64,
    x: Vec<f64>,
    y: f64,
    t: f64,
}

#[derive(Serialize)]
struct ShootJson {
    command: &'static str,
    spacetime: String,
    initial: InitialEcho,
    s_max: f64,
    conserved: ConservedEcho,
    termination: TerminationEcho,
    steps: usize,
    samples: usize,
    max_drift: DriftEcho,
    r#final: FinalEcho,
}

#[derive(Serialize)]
struct InitialEcho {
    x: Vec<f64>,
    y: f64,
    t: f64,
    xdot: Vec<f64>,
    ydot: f64,
    tdot: f64,
}

fn step_control(step: &Option<StepCfg>) -> Result<StepControl> {
    let default = match ShootConfig::default().control {
        StepControl::Adaptive { h0, tol, min_step } => (h0, tol, min_step),
        StepControl::Fixed { h } => (h, 1e-10, 1e-12),
    };
    let Some(cfg) = step else {
        return Ok(StepControl::Adaptive {
            h0: default.0,
            tol: default.1,
            min_step: default.2,
        });
    };
    match cfg.kind.as_str() {
        "fixed" => {
            if cfg.h0.is_some() || cfg.tol.is_some() || cfg.min_step.is_some() {
                return Err(validation(
                    "command.step: h0/tol/min_step are only used by adaptive stepping",
                ));
            }
            let h = cfg
                .h
                .ok_or_else(|| validation("command.step.h: required for fixed stepping"))?;
            Ok(StepControl::Fixed { h })
        }
        "adaptive" => {
            if cfg.h.is_some() {
                return Err(validation("command.step.h: only used by fixed stepping"));
            }
            Ok(StepControl::Adaptive {
                h0: cfg.h0.unwrap_or(default.0),
                tol: cfg.tol.unwrap_or(default.1),
                min_step: cfg.min_step.unwrap_or(default.2),
            })
        }
        other => Err(validation(format!("command.step.type: unknown type '{other}'"))),
    }
}

fn write_trajectory_csv(path: &Path, dim: usize, traj: &Trajectory) -> Result<()> {
    let mut csv = CsvBuilder::new(&columns(
        dim,
        &["y", "t", "ydot", "tdot", "c1_drift", "c2_drift", "Ez_drift"],
    ));
    for sample in &traj.samples {
        let mut row = vec![sample.s];
        row.extend_from_slice(&sample.x);
        row.extend_from_slice(&[
            sample.y,
            sample.t,
            sample.ydot,
            sample.tdot,
            sample.c1_drift,
            sample.c2_drift,
            sample.e_drift,
        ]);
        csv.float_row(row);
    }
    write_atomic(path, &csv.into_bytes())
}

fn run_shoot(
    cfg: &RunConfig,
    cmd: &ShootCmd,
    overrides: &Overrides,
    outdir: &Path,
) -> Result<Outcome> {
    let spec = build_spacetime(&cfg.spacetime)?;
    let mut shoot = ShootConfig::default();
    if let Some(v) = overrides.smax.or(cmd.s_max) {
        shoot.s_max = v;
    }
    shoot.control = step_control(&cmd.step)?;
    if let Some(v) = cmd.max_steps {
        shoot.max_steps = v;
    }
    if let Some(v) = cmd.max_speed {
        shoot.max_speed = v;
    }
    let init = InitialData {
        x: cmd.x.clone(),
        y: cmd.y,
        t: cmd.t,
        xdot: cmd.xdot.clone(),
        ydot: cmd.ydot,
        tdot: cmd.tdot,
    };
    let traj = integrate_geodesic(&spec, &init, &shoot).map_err(|e| keyed("command", e))?;

    let payload = ShootJson {
        command: "shoot",
        spacetime: spec.label().to_string(),
        initial: InitialEcho {
            x: init.x.clone(),
            y: init.y,
            t: init.t,
            xdot: init.xdot.clone(),
            ydot: init.ydot,
            tdot: init.tdot,
        },
        s_max: shoot.s_max,
        conserved: ConservedEcho {
            c1: traj.conserved.c1,
            c2: traj.conserved.c2,
            e_z: traj.conserved.e_z,
            roundtrip_residual: traj.conserved.roundtrip_residual,
        },
        termination: termination_echo(&traj.termination),
        steps: traj.steps,
        samples: traj.samples.len(),
        max_drift: DriftEcho {
            c1: traj.max_c1_drift,
            c2: traj.max_c2_drift,
            e_z: traj.max_e_drift,
        },
        r#final: {
            let s = traj.last();
            FinalEcho { s: s.s, x: s.x.clone(), y: s.y, t: s.t }
        },
    };
    if cfg.output.wants("json") {
        write_atomic(&outdir.join("shoot.json"), &to_json_bytes(&payload)?)?;
    }
    if cfg.output.wants("csv") {
        write_trajectory_csv(&outdir.join("trajectory.csv"), spec.dim(), &traj)?;
    }
    Ok(Outcome::plain(termination_echo(&traj.termination).kind))
}

// ------------------------------------------------------------------- probe

#[derive(Serialize)]
struct ProbeOutcomeEcho {
    index: usize,
    c1: f64,
    c2: f64,
    e_z: f64,
    termination: TerminationEcho,
    pointwise_margin: f64,
    envelope_margin: f64,
    max_distance: f64,
}

#[derive(Serialize)]
struct ProbeJson {
    command: &'static str,
    spacetime: String,
    x0: Vec<f64>,
    lambda: f64,
    k: f64,
    trajectories: usize,
    seed: u64,
    speed_scale: f64,
    s_max: f64,
    all_complete: bool,
    all_pointwise: bool,
    all_enveloped: bool,
    pass: bool,
    outcomes: Vec<ProbeOutcomeEcho>,
}

fn run_probe(
    cfg: &RunConfig,
    cmd: &ProbeCmd,
    overrides: &Overrides,
    outdir: &Path,
) -> Result<Outcome> {
    let spec = build_spacetime(&cfg.spacetime)?;
    let mut probe = ProbeConfig::default();
    if let Some(v) = cmd.trajectories {
        probe.trajectories = v;
    }
    if let Some(v) = overrides.seed.or(cmd.seed) {
        probe.seed = v;
    }
    if let Some(v) = cmd.speed_scale {
        probe.speed_scale = v;
    }
    if let Some(v) = overrides.smax.or(cmd.s_max) {
        probe.shoot.s_max = v;
    }
    probe.shoot.control = step_control(&cmd.step)?;
    if let Some(v) = cmd.max_steps {
        probe.shoot.max_steps = v;
    }
    let report = completeness_probe(&spec, &cmd.x0, cmd.lambda, cmd.k, &probe)
        .map_err(|e| keyed("command", e))?;

    let pass = report.all_pass();
    let payload = ProbeJson {
        command: "probe",
        spacetime: spec.label().to_string(),
        x0: cmd.x0.clone(),
        lambda: cmd.lambda,
        k: cmd.k,
        trajectories: probe.trajectories,
        seed: probe.seed,
        speed_scale: probe.speed_scale,
        s_max: probe.shoot.s_max,
        all_complete: report.all_complete,
        all_pointwise: report.all_pointwise,
        all_enveloped: report.all_enveloped,
        pass,
        outcomes: report
            .outcomes
            .iter()
            .map(|o| ProbeOutcomeEcho {
                index: o.index,
                c1: o.c1,
                c2: o.c2,
                e_z: o.e_z,
                termination: termination_echo(&o.termination),
                pointwise_margin: o.pointwise_margin,
                envelope_margin: o.envelope_margin,
                max_distance: o.max_distance,
            })
            .collect(),
    };
    if cfg.output.wants("json") {
        write_atomic(&outdir.join("probe.json"), &to_json_bytes(&payload)?)?;
    }
    Ok(Outcome::plain(if pass { "PASS" } else { "FAIL" }))
}

// ------------------------------------------------------------------- check

#[derive(Serialize)]
struct RegionEcho {
    center: Vec<f64>,
    radii: Vec<f64>,
    samples_per_shell: usize,
    seed: u64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum CheckPayload {
    Single(HypothesisReport),
    Summary(TheoremSummary),
}

#[derive(Serialize)]
struct CheckJson {
    command: &'static str,
    condition: String,
    spacetime: String,
    region: RegionEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    fitted_witness: bool,
    report: CheckPayload,
}

fn build_region(cfg: &RegionCfg, overrides: &Overrides) -> Result<(Region, RegionEcho)> {
    let samples_per_shell = cfg.samples_per_shell.unwrap_or(16);
    let seed = overrides.seed.or(cfg.seed).unwrap_or(0);
    let region = Region::new(cfg.center.clone(), cfg.radii.clone(), samples_per_shell, seed)
        .map_err(|e| keyed("command.region", e))?;
    let echo = RegionEcho {
        center: cfg.center.clone(),
        radii: cfg.radii.clone(),
        samples_per_shell,
        seed,
    };
    Ok((region, echo))
}

fn quad_witness(cfg: &WitnessCfg, center: &[f64], key: &str) -> Result<GrowthWitness> {
    GrowthWitness::new(cfg.lambda, cfg.k, cfg.x0.clone().unwrap_or_else(|| center.to_vec()))
        .map_err(|e| keyed(key, e))
}

fn lin_witness(cfg: &WitnessCfg, center: &[f64], key: &str) -> Result<LinearWitness> {
    LinearWitness::new(cfg.lambda, cfg.k, cfg.x0.clone().unwrap_or_else(|| center.to_vec()))
        .map_err(|e| keyed(key, e))
}

fn growth_field(spec: &SpacetimeSpec, cmd: &CheckCmd, dim: usize) -> Result<(ExprAst, String)> {
    match (&cmd.field, &cmd.coefficient) {
        (Some(_), Some(_)) => Err(validation(
            "command.field: give either 'field' or 'coefficient', not both",
        )),
        (Some(src), None) => {
            let ast = gts_core::parse_expression(src, dim)
                .map_err(|e| keyed("command.field", e))?;
            Ok((ast, src.clone()))
        }
        (None, Some(which)) => {
            let (a, b, c) = spec.coefficient_fields();
            let ast = match which.as_str() {
                "a" => a.clone(),
                "b" => b.clone(),
                "c" => c.clone(),
                other => {
                    return Err(validation(format!(
                        "command.coefficient: expected 'a', 'b' or 'c', got '{other}'"
                    )))
                }
            };
            Ok((ast.clone(), ast.to_string()))
        }
        (None, None) => Err(validation(
            "command.field: condition 'growth' needs a 'field' expression or a 'coefficient'",
        )),
    }
}

fn run_check(
    cfg: &RunConfig,
    cmd: &CheckCmd,
    overrides: &Overrides,
    outdir: &Path,
) -> Result<Outcome> {
    let spec = build_spacetime(&cfg.spacetime)?;
    let (region, region_echo) = build_region(&cmd.region, overrides)?;
    let condition = cmd.condition.as_deref().unwrap_or("all");
    let takes_witness = matches!(condition, "all" | "growth" | "h3" | "h3prime" | "s2" | "c2");
    if !takes_witness && cmd.witness.is_some() {
        return Err(validation(format!(
            "command.witness: not used by condition '{condition}'"
        )));
    }
    if condition != "all" && condition != "s2" && cmd.linear_witness.is_some() {
        return Err(validation(format!(
            "command.linear_witness: not used by condition '{condition}'"
        )));
    }
    if condition != "growth" && (cmd.field.is_some() || cmd.coefficient.is_some()) {
        return Err(validation(format!(
            "command.field: only used by condition 'growth', not '{condition}'"
        )));
    }
    let need_quad = |key: &str| -> Result<GrowthWitness> {
        let w = cmd.witness.as_ref().ok_or_else(|| {
            validation(format!("command.witness: required for condition '{key}'"))
        })?;
        quad_witness(w, region.center(), "command.witness")
    };
    let linear_or_default = |quad: &GrowthWitness| -> Result<LinearWitness> {
        match &cmd.linear_witness {
            Some(w) => lin_witness(w, region.center(), "command.linear_witness"),
            None => LinearWitness::new(quad.lambda, quad.k, quad.x0.clone())
                .map_err(|e| keyed("command.linear_witness", e)),
        }
    };

    let mut field_echo = None;
    let mut fitted = false;
    let report = match condition {
        "all" => {
            let quadratic = need_quad("all")?;
            let linear = linear_or_default(&quadratic)?;
            let summary =
                theorem_verdicts(&spec, &region, &WitnessSet { quadratic, linear })
                    .map_err(|e| keyed("command", e))?;
            let verdict = format!(
                "connected={} complete={}",
                summary.connected_route.as_deref().unwrap_or("none"),
                summary.complete_route.as_deref().unwrap_or("none"),
            );
            write_check(cfg, outdir, CheckJson {
                command: "check",
                condition: condition.into(),
                spacetime: spec.label().to_string(),
                region: region_echo,
                field: None,
                fitted_witness: false,
                report: CheckPayload::Summary(summary),
            })?;
            return Ok(Outcome::plain(verdict));
        }
        "growth" => {
            let (ast, src) = growth_field(&spec, cmd, region.dim())?;
            field_echo = Some(src);
            let witness = match &cmd.witness {
                Some(w) => quad_witness(w, region.center(), "command.witness")?,
                None => {
                    fitted = true;
                    fit_witness(&ast, &region, region.center())
                        .map_err(|e| keyed("command.witness", e))?
                }
            };
            check_quadratic_growth(&ast, &region, &witness)
        }
        "h1" => Ok(check_h1(&spec)),
        "h2" => check_h2(&spec, &region),
        "h3" => check_h3(&spec, &region, &need_quad("h3")?),
        "h3prime" => check_h3prime(&spec, &region, &need_quad("h3prime")?),
        "s2" => {
            let quadratic = need_quad("s2")?;
            let linear = linear_or_default(&quadratic)?;
            check_s2(&spec, &region, &quadratic, &linear)
        }
        "c2" => check_c2(&spec, &region, &need_quad("c2")?),
        "ell_negative" => check_ell_negative(&spec, &region),
        other => {
            return Err(validation(format!(
                "command.condition: unknown condition '{other}'"
            )))
        }
    }
    .map_err(|e| keyed("command", e))?;

    let verdict = report.verdict.to_string();
    write_check(cfg, outdir, CheckJson {
        command: "check",
        condition: condition.into(),
        spacetime: spec.label().to_string(),
        region: region_echo,
        field: field_echo,
        fitted_witness: fitted,
        report: CheckPayload::Single(report),
    })?;
    Ok(Outcome::plain(verdict))
}

fn write_check(cfg: &RunConfig, outdir: &Path, payload: CheckJson) -> Result<()> {
    if cfg.output.wants("json") {
        write_atomic(&outdir.join("check.json"), &to_json_bytes(&payload)?)?;
    }
    Ok(())
}

// ------------------------------------------------------------------- sweep

struct SummaryRow {
    value: String,
    status: &'static str,
    j: Option<f64>,
    residual: Option<f64>,
    verdict: String,
    message: String,
}

fn run_sweep(
    cfg: &RunConfig,
    cmd: &SweepCmd,
    overrides: &Overrides,
    outdir: &Path,
) -> Result<Outcome> {
    let run_obj = cmd
        .run
        .as_object()
        .ok_or_else(|| validation("command.run: must be a JSON object"))?;
    let run_name = run_obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| validation("command.run.name: required string"))?;
    if run_name == "sweep" {
        return Err(validation("command.run.name: nested sweeps are not supported"));
    }
    let segs: Vec<&str> = cmd.parameter.split('.').collect();
    if segs.len() < 2
        || segs.iter().any(|s| s.is_empty())
        || !matches!(segs[0], "spacetime" | "command")
    {
        return Err(validation(
            "command.parameter: must be a dot path starting with 'spacetime.' or 'command.'",
        ));
    }
    let jobs = overrides.jobs.or(cmd.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(validation("command.jobs: must be at least 1"));
    }

    // Resolve every cell directory up front.
    let cell_dirs: Vec<PathBuf> = (0..cmd.values.len())
        .map(|i| outdir.join(format!("cell_{i:03}")))
        .collect();
    for dir in &cell_dirs {
        fs::create_dir_all(dir)?;
    }
    let cell_overrides = Overrides {
        out: None,
        jobs: None,
        seed: overrides.seed,
        segments: overrides.segments,
        smax: overrides.smax,
    };

    let rows: Mutex<Vec<Option<SummaryRow>>> =
        Mutex::new((0..cmd.values.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cmd.values.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cmd.values.len() {
                    break;
                }
                let row = run_cell(cfg, cmd, &segs, i, &cell_overrides, &cell_dirs[i]);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows = rows.into_inner().unwrap();

    let mut csv = CsvBuilder::new(
        &["cell", "value", "status", "j", "residual", "verdict", "message"]
            .map(String::from),
    );
    let mut ok = 0usize;
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_ref().expect("every cell ran");
        if row.status == "ok" {
            ok += 1;
        }
        let cell = i.to_string();
        let j = row.j.map(fmt_f64).unwrap_or_default();
        let residual = row.residual.map(fmt_f64).unwrap_or_default();
        csv.row([
            cell.as_str(),
            row.value.as_str(),
            row.status,
            j.as_str(),
            residual.as_str(),
            row.verdict.as_str(),
            row.message.as_str(),
        ]);
    }
    write_atomic(&outdir.join("summary.csv"), &csv.into_bytes())?;
    Ok(Outcome::plain(format!("{ok}/{} cells ok", rows.len())))
}

fn set_path(doc: &mut Value, segs: &[&str], value: Value) -> Result<()> {
    let mut cur = doc;
    for seg in &segs[..segs.len() - 1] {
        let obj = cur.as_object_mut().ok_or_else(|| {
            validation(format!("command.parameter: '{seg}' does not name an object"))
        })?;
        cur = obj
            .entry(seg.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cur.as_object_mut().ok_or_else(|| {
        validation("command.parameter: path does not end in an object".to_string())
    })?;
    obj.insert(segs[segs.len() - 1].to_string(), value);
    Ok(())
}

fn run_cell(
    cfg: &RunConfig,
    cmd: &SweepCmd,
    segs: &[&str],
    index: usize,
    overrides: &Overrides,
    cell_dir: &Path,
) -> SummaryRow {
    let value = &cmd.values[index];
    let value_str = match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let fail = |message: String| SummaryRow {
        value: value_str.clone(),
        status: "error",
        j: None,
        residual: None,
        verdict: String::new(),
        message,
    };

    let mut doc = serde_json::json!({
        "spacetime": cfg.spacetime.clone(),
        "command": cmd.run.clone(),
    });
    // The first segment is already a top-level key of the cell document.
    if let Err(e) = set_path(&mut doc, segs, value.clone()) {
        return fail(e.to_string());
    }
    let mut cell_cfg = match parse_config(&doc) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    cell_cfg.output.formats = cfg.output.formats.clone();

    match dispatch(&cell_cfg, overrides, cell_dir) {
        Ok(outcome) => {
            let (status, message) = match &outcome.status {
                RunStatus::Ok => ("ok", String::new()),
                RunStatus::Breakdown(m) | RunStatus::NonConverged(m) => ("error", m.clone()),
            };
            SummaryRow {
                value: value_str,
                status,
                j: outcome.j,
                residual: outcome.residual,
                verdict: outcome.verdict,
                message,
            }
        }
        Err(e) => fail(e.to_string()),
    }
}

/// Map an outcome to the final process result, keeping the documented exit
/// codes for solver failures.
pub fn finish(outcome: Outcome) -> Result<Outcome> {
    match &outcome.status {
        RunStatus::Ok => Ok(outcome),
        RunStatus::Breakdown(m) => Err(CliError::Breakdown(m.clone())),
        RunStatus::NonConverged(m) => Err(CliError::NonConvergence(m.clone())),
    }
}
