//! Acceptance sweep: every advertised guarantee of the toolkit, exercised end
//! to end at its stated tolerance and runtime budget. Each test prints one
//! `criterion N: PASS/FAIL (...)` line, visible under `--nocapture`. The
//! tests serialize through a mutex so each budget measures only its own work.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use gts_core::connect::{minimize_action, Event, SolverConfig};
use gts_core::hypotheses::{
    check_c2, check_h2, check_quadratic_growth, theorem_verdicts, GrowthWitness, LinearWitness,
    Region, Verdict, WitnessSet,
};
use gts_core::pathspace::{
    action_value_and_gradient, diagonalized_action, path_integrals, path_m_and_h, reduced_action,
    reduced_action_with_floor, BoundaryData, DiscretePath, DEFAULT_ELL_FLOOR,
};
use gts_core::shoot::{
    completeness_probe, integrate_geodesic, integrate_unreduced, InitialData, ProbeConfig,
    ShootConfig, StepControl, Termination,
};
use gts_core::spacetime::{killing_matrix, spectral, BaseMetric, SpacetimeSpec, Zoo};
use gts_core::parse_expression;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tempfile::TempDir;

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn line(n: usize, pass: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn godel(omega: f64) -> SpacetimeSpec {
    SpacetimeSpec::builtin(Zoo::Godel { omega }).unwrap()
}

/// Smooth two-dimensional specs with positive A and C, so the uniform
/// lower-bound check passes on any bounded region.
fn random_spec(rng: &mut ChaCha8Rng, which: usize) -> SpacetimeSpec {
    match which % 3 {
        0 => {
            let p: f64 = rng.gen_range(0.1..0.7);
            let q1: f64 = rng.gen_range(0.2..1.5);
            let q2: f64 = rng.gen_range(0.2..1.5);
            let v = parse_expression(&format!("{p} / (1 + {q1}*x1^2 + {q2}*x2^2)"), 2).unwrap();
            SpacetimeSpec::builtin(Zoo::KerrSchild { v }).unwrap()
        }
        1 => {
            let d0: f64 = rng.gen_range(-0.4..0.4);
            let d1: f64 = rng.gen_range(0.3..1.2);
            let b0: f64 = rng.gen_range(0.5..1.5);
            let b1: f64 = rng.gen_range(0.1..0.8);
            let delta =
                parse_expression(&format!("{d0} * sin({d1}*x1) * cos({d1}*x2)"), 2).unwrap();
            let beta = parse_expression(&format!("{b0} + {b1}*x1^2 + {b1}*x2^2"), 2).unwrap();
            SpacetimeSpec::builtin(Zoo::Stationary { delta, beta }).unwrap()
        }
        _ => {
            let a0: f64 = rng.gen_range(0.6..1.4);
            let a1: f64 = rng.gen_range(0.1..0.6);
            let s0: f64 = rng.gen_range(-0.5..0.5);
            let c0: f64 = rng.gen_range(0.6..1.4);
            let c1: f64 = rng.gen_range(0.1..0.6);
            SpacetimeSpec::builtin(Zoo::Custom {
                label: "random".into(),
                a: parse_expression(&format!("{a0} + {a1}*x2^2"), 2).unwrap(),
                b: parse_expression(&format!("{s0}*x1"), 2).unwrap(),
                c: parse_expression(&format!("{c0} + {c1}*x1^2"), 2).unwrap(),
                base: BaseMetric::Euclidean,
            })
            .unwrap()
        }
    }
}

fn origin_quadratic_witness() -> GrowthWitness {
    GrowthWitness::new(1.0, 1.0, vec![0.0, 0.0]).unwrap()
}

/// Criteria 1 and 2: minimizers of the reduced action satisfy the geodesic
/// equation at a defect that is rounding-level for constant-coefficient specs
/// and second order in the grid otherwise, and on every converged run the
/// full-curve action agrees with twice the reduced action to quadrature
/// accuracy.
#[test]
fn variational_minimizers_converge_at_second_order() {
    let _g = serial();
    let t0 = Instant::now();

    let mut max_gap_n2 = 0.0_f64;
    let mut record_gap = |j: f64, f: f64, segments: usize| {
        let gap = (2.0 * j - f).abs() / (1.0 + f.abs());
        let n2 = (segments * segments) as f64;
        max_gap_n2 = max_gap_n2.max(gap * n2);
        gap < 10.0 / n2
    };

    let flat = SpacetimeSpec::builtin(Zoo::Stationary {
        delta: parse_expression("0", 2).unwrap(),
        beta: parse_expression("1", 2).unwrap(),
    })
    .unwrap();
    let ks_const = SpacetimeSpec::builtin(Zoo::KerrSchild {
        v: parse_expression("0.5", 2).unwrap(),
    })
    .unwrap();

    let from = Event { x: vec![0.0, 0.0], y: 0.0, t: 0.0 };
    let to = Event { x: vec![1.0, 0.0], y: 2.0, t: 1.0 };
    let pinned_cfg = SolverConfig { segments: 64, grad_tol: 1e-9, ..Default::default() };
    let mut pinned_ok = true;
    let mut gaps_ok = true;
    let mut worst_pinned = 0.0_f64;
    for spec in [&flat, &ks_const] {
        let sol = minimize_action(spec, &from, &to, &pinned_cfg).unwrap();
        pinned_ok &= sol.converged && sol.residual < 1e-8;
        gaps_ok &= record_gap(sol.j, sol.f, pinned_cfg.segments);
        worst_pinned = worst_pinned.max(sol.residual);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let region = Region::new(vec![0.0, 0.0], vec![0.75, 1.5], 16, 0).unwrap();
    let mut min_order = f64::INFINITY;
    let mut worst_grad = 0.0_f64;
    for trial in 0..20 {
        let spec = random_spec(&mut rng, trial);
        assert_eq!(
            check_h2(&spec, &region).unwrap().verdict,
            Verdict::Pass,
            "trial {trial} spec {} must carry a uniform lower bound",
            spec.label()
        );
        let from = Event {
            x: vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
            y: 0.0,
            t: 0.0,
        };
        let to = Event {
            x: vec![
                from.x[0] + rng.gen_range(0.5..1.0),
                from.x[1] + rng.gen_range(-0.5..0.5),
            ],
            y: rng.gen_range(-0.5..0.5),
            t: rng.gen_range(-0.5..0.5),
        };
        let mut residuals = Vec::new();
        for segments in [32usize, 64, 128] {
            // The defect of a converged minimizer is O(N^-2) plus a floor of
            // roughly N times the final gradient norm, so the tolerance is
            // kept far under the discretization term at N=128. The line
            // search tests Armijo decreases on action values, which fall
            // under f64 resolution near sup-gradient 1e-9; a run that stops
            // on the iteration cap down there is still a minimizer for every
            // purpose of this measurement, so such runs are accepted by
            // their final gradient norm instead of the convergence flag.
            let cfg = SolverConfig {
                segments,
                grad_tol: 1e-11,
                max_iters: 6000,
                restarts: 2,
                ..Default::default()
            };
            let sol = minimize_action(&spec, &from, &to, &cfg).unwrap();
            assert!(
                sol.converged || sol.grad_norm <= 1e-8,
                "trial {trial} N={segments}: stopped with {:?} at gradient {:.2e}",
                sol.reason,
                sol.grad_norm
            );
            worst_grad = worst_grad.max(sol.grad_norm);
            gaps_ok &= record_gap(sol.j, sol.f, segments);
            residuals.push(sol.residual);
        }
        let order = (residuals[0] / residuals[2]).log2() / 2.0;
        min_order = min_order.min(order);
    }

    let elapsed = t0.elapsed().as_secs_f64();
    let pass1 = pinned_ok && min_order >= 1.9 && elapsed < 60.0;
    line(
        1,
        pass1,
        &format!(
            "constant-coefficient residual {worst_pinned:.1e} at N=64; \
             20 random specs, residual order >= {min_order:.2}, \
             final gradients <= {worst_grad:.1e}; {elapsed:.1}s"
        ),
    );
    line(
        2,
        gaps_ok,
        &format!("max |2J - f|/(1+|f|) * N^2 = {max_gap_n2:.1e}, bound 10"),
    );
    assert!(pinned_ok, "pinned specs must converge with residual < 1e-8");
    assert!(min_order >= 1.9, "residual order {min_order} under 1.9");
    assert!(gaps_ok, "action identity gap above 10/N^2");
    assert!(elapsed < 60.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 3: the analytic gradient of the reduced action matches central
/// finite differences on random (spec, path, boundary) triples.
#[test]
fn analytic_gradient_matches_central_differences() {
    let _g = serial();
    let t0 = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for trial in 0..50 {
        let spec = random_spec(&mut rng, trial);
        let segments = [12usize, 16, 24][trial % 3];
        let from = vec![rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
        let to = vec![rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
        let mut path = DiscretePath::straight(&from, &to, segments).unwrap();
        let mut interior = path.interior();
        for z in interior.iter_mut() {
            *z += rng.gen_range(-0.05..0.05);
        }
        path.set_interior(&interior);
        let bnd = BoundaryData {
            delta_y: rng.gen_range(-0.8..0.8),
            delta_t: rng.gen_range(-0.8..0.8),
        };

        let (_, grad) =
            action_value_and_gradient(&spec, &path, &bnd, DEFAULT_ELL_FLOOR).unwrap();
        let mut grad_fd = vec![0.0; interior.len()];
        for i in 0..interior.len() {
            let h = 1e-5 * (1.0 + interior[i].abs());
            let mut bumped = interior.clone();
            bumped[i] += h;
            path.set_interior(&bumped);
            let plus = reduced_action_with_floor(&spec, &path, &bnd, DEFAULT_ELL_FLOOR).unwrap();
            bumped[i] -= 2.0 * h;
            path.set_interior(&bumped);
            let minus = reduced_action_with_floor(&spec, &path, &bnd, DEFAULT_ELL_FLOOR).unwrap();
            grad_fd[i] = (plus - minus) / (2.0 * h);
        }
        path.set_interior(&interior);

        let scale = 1.0 + grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        let err = grad
            .iter()
            .zip(&grad_fd)
            .fold(0.0_f64, |m, (a, f)| m.max((a - f).abs()))
            / scale;
        worst = worst.max(err);
    }

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = worst < 1e-6 && elapsed < 30.0;
    line(
        3,
        pass,
        &format!("50 triples, worst relative gradient error {worst:.1e}; {elapsed:.1}s"),
    );
    assert!(worst < 1e-6, "gradient mismatch {worst:.2e}");
    assert!(elapsed < 30.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 4: the two Killing momenta and the energy are conserved by the
/// unreduced integrator at the integrator's fourth order, with tiny absolute
/// drift at the finest step.
#[test]
fn conserved_quantities_drift_at_fourth_order() {
    let _g = serial();
    let t0 = Instant::now();

    let spec = godel(std::f64::consts::FRAC_1_SQRT_2);
    let init = InitialData {
        x: vec![0.0, 0.0],
        y: 0.0,
        t: 0.0,
        xdot: vec![0.6, 0.4],
        ydot: 0.5,
        tdot: 1.2,
    };
    let steps = [8e-3, 4e-3, 2e-3, 1e-3];
    let mut drifts = Vec::new();
    for &h in &steps {
        let cfg = ShootConfig {
            s_max: 10.0,
            control: StepControl::Fixed { h },
            ..Default::default()
        };
        let traj = integrate_unreduced(&spec, &init, &cfg).unwrap();
        assert!(matches!(traj.termination, Termination::ReachedSMax));
        drifts.push(traj.max_c1_drift.max(traj.max_c2_drift).max(traj.max_e_drift));
    }
    let order = (drifts[0] / drifts[3]).log2() / 3.0;
    let finest = drifts[3];

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = order >= 3.7 && finest < 1e-8 && elapsed < 20.0;
    line(
        4,
        pass,
        &format!("drift order {order:.2} over step halving, {finest:.1e} at h=1e-3; {elapsed:.1}s"),
    );
    assert!(order >= 3.7, "drift order {order:.2} under 3.7");
    assert!(finest < 1e-8, "drift {finest:.2e} at h=1e-3");
    assert!(elapsed < 20.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 5: shooting a geodesic and re-solving its endpoints as a
/// boundary-value problem recovers the initial base velocity and the action.
/// A mismatch is accepted only when the solver demonstrably found a distinct
/// connecting geodesic: converged with a quadrature-level residual.
#[test]
fn shoot_connect_roundtrip_recovers_initial_data() {
    let _g = serial();
    let t0 = Instant::now();

    let spec = godel(std::f64::consts::FRAC_1_SQRT_2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let segments = 1024usize;
    let mut recovered = 0usize;
    let mut distinct = 0usize;
    let mut worst_verr = 0.0_f64;
    let mut worst_jerr = 0.0_f64;
    for trial in 0..10 {
        let x0 = vec![rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mag: f64 = rng.gen_range(0.4..0.8);
        let init = InitialData {
            x: x0.clone(),
            y: 0.0,
            t: 0.0,
            xdot: vec![mag * th.cos(), mag * th.sin()],
            ydot: rng.gen_range(-0.5..0.5),
            tdot: rng.gen_range(0.7..1.3),
        };
        let shoot = ShootConfig {
            s_max: 1.0,
            control: StepControl::Adaptive { h0: 1e-3, tol: 1e-12, min_step: 1e-13 },
            ..Default::default()
        };
        let traj = integrate_geodesic(&spec, &init, &shoot).unwrap();
        let end = traj.last();
        let from = Event { x: x0.clone(), y: 0.0, t: 0.0 };
        let to = Event { x: end.x.clone(), y: end.y, t: end.t };

        let cfg = SolverConfig {
            segments,
            grad_tol: 1e-10,
            max_iters: 4000,
            restarts: 1,
            ..Default::default()
        };
        let sol = minimize_action(&spec, &from, &to, &cfg).unwrap();
        assert!(sol.converged, "trial {trial} did not converge: {:?}", sol.reason);

        // Initial velocity of the solved path by a one-sided fourth-order
        // stencil, compared against the shot initial data.
        let n = segments as f64;
        let mut v = [0.0; 2];
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = n / 12.0
                * (-25.0 * sol.path.node(0)[k] + 48.0 * sol.path.node(1)[k]
                    - 36.0 * sol.path.node(2)[k]
                    + 16.0 * sol.path.node(3)[k]
                    - 3.0 * sol.path.node(4)[k]);
        }
        let vmag = (init.xdot[0].powi(2) + init.xdot[1].powi(2)).sqrt();
        let verr = ((v[0] - init.xdot[0]).powi(2) + (v[1] - init.xdot[1]).powi(2)).sqrt() / vmag;
        // The shot curve is a geodesic on [0, 1], so its reduced action is
        // half the conserved energy.
        let jerr = (sol.j - traj.conserved.e_z / 2.0).abs();

        if verr < 1e-4 && jerr < 1e-6 {
            recovered += 1;
            worst_verr = worst_verr.max(verr);
            worst_jerr = worst_jerr.max(jerr);
        } else {
            let quadrature = 10.0 / (segments * segments) as f64;
            assert!(
                sol.residual < quadrature,
                "trial {trial}: mismatch (verr {verr:.2e}, jerr {jerr:.2e}) without a \
                 geodesic-quality residual ({:.2e} >= {quadrature:.2e})",
                sol.residual
            );
            distinct += 1;
            println!(
                "  trial {trial}: accepted distinct connecting geodesic \
                 (j {:.6} vs shot {:.6}, residual {:.1e})",
                sol.j,
                traj.conserved.e_z / 2.0,
                sol.residual
            );
        }
    }

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = recovered + distinct == 10 && elapsed < 120.0;
    line(
        5,
        pass,
        &format!(
            "{recovered}/10 recovered (worst velocity {worst_verr:.1e}, action {worst_jerr:.1e}), \
             {distinct} distinct geodesics; {elapsed:.1}s"
        ),
    );
    assert_eq!(recovered + distinct, 10);
    assert!(elapsed < 120.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 6: the algebraic identities tying the fiber matrix, its
/// spectrum, and the reduced action together, on random points and paths.
#[test]
fn spectral_and_action_identities_hold() {
    let _g = serial();
    let t0 = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let specs = vec![
        random_spec(&mut rng, 0),
        random_spec(&mut rng, 1),
        random_spec(&mut rng, 2),
        godel(1.0),
        SpacetimeSpec::builtin(Zoo::PlaneFrontedWave {
            h0: parse_expression("sin(x1) + 0.3*x2^2", 2).unwrap(),
        })
        .unwrap(),
        SpacetimeSpec::builtin(Zoo::Static {
            beta: parse_expression("1 + 0.5*x1^2 + 0.3*x2^2", 2).unwrap(),
        })
        .unwrap(),
    ];
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));

    let mut worst = 0.0_f64;
    for i in 0..1000 {
        let spec = &specs[i % specs.len()];
        let x = vec![rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)];
        let s = spec.sample_coefficients(&x).unwrap();
        let m = killing_matrix(&s);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        worst = worst.max(rel(det, -s.h));
        let sp = spectral(&s);
        worst = worst.max(rel(sp.lambda_plus * sp.lambda_minus, -s.h));
        worst = worst.max(rel(sp.mu, -2.0 * sp.lambda_minus));

        let from = vec![rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
        let to = vec![rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
        let mut path = DiscretePath::straight(&from, &to, 16).unwrap();
        let mut interior = path.interior();
        for z in interior.iter_mut() {
            *z += rng.gen_range(-0.1..0.1);
        }
        path.set_interior(&interior);

        let pf = path_integrals(spec, &path).unwrap();
        worst = worst.max(rel(pf.ell, pf.b * pf.b + pf.a * pf.c));
        worst = worst.max(rel(pf.lam_plus * pf.lam_minus, -pf.ell));
        if pf.ell > 0.0 {
            let (m_path, _) = path_m_and_h(spec, &path, &[0.0, 0.0], 1.0, 1.0).unwrap();
            assert!(
                pf.lam_plus >= m_path - 1e-10 * (1.0 + pf.lam_plus.abs() + m_path.abs()),
                "lambda_plus {:.15e} under m {:.15e} on {}",
                pf.lam_plus,
                m_path,
                spec.label()
            );
        }

        let bnd = BoundaryData {
            delta_y: rng.gen_range(-0.8..0.8),
            delta_t: rng.gen_range(-0.8..0.8),
        };
        let direct = reduced_action(spec, &path, &bnd).unwrap();
        let diag = diagonalized_action(spec, &path, &bnd).unwrap();
        worst = worst.max(rel(diag.j, direct));
    }

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = worst < 1e-10 && elapsed < 10.0;
    line(
        6,
        pass,
        &format!("1000 samples, worst relative identity error {worst:.1e}; {elapsed:.1}s"),
    );
    assert!(worst < 1e-10, "identity error {worst:.2e}");
    assert!(elapsed < 10.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 7: the rotating dust universes are geodesically complete in
/// practice: the growth sweep passes, the pointwise speed bound holds along
/// sampled bundles, and no trajectory blows up over a long parameter span.
#[test]
fn rotating_dust_probe_confirms_completeness() {
    let _g = serial();
    let t0 = Instant::now();

    let mut min_margin = f64::INFINITY;
    let mut all_ok = true;
    for omega in [0.5, std::f64::consts::FRAC_1_SQRT_2, 1.0] {
        let spec = godel(omega);
        let region = Region::new(vec![0.0, 0.0], vec![1.0, 5.0, 20.0, 50.0], 24, 0).unwrap();
        let witness = GrowthWitness::new(0.0, 1.0, vec![0.0, 0.0]).unwrap();
        let sweep = check_c2(&spec, &region, &witness).unwrap();
        all_ok &= sweep.verdict == Verdict::Pass;

        // Over fifty parameter units the integration error itself must stay
        // below the probe's rounding slack, so run tighter than the default.
        let probe_cfg = ProbeConfig {
            trajectories: 8,
            seed: 7,
            speed_scale: 1.0,
            shoot: ShootConfig {
                s_max: 50.0,
                control: StepControl::Adaptive { h0: 1e-2, tol: 1e-12, min_step: 1e-13 },
                ..Default::default()
            },
        };
        let report = completeness_probe(&spec, &[0.0, 0.0], 0.0, 1.0, &probe_cfg).unwrap();
        all_ok &= report.all_pass();
        for outcome in &report.outcomes {
            all_ok &= matches!(outcome.termination, Termination::ReachedSMax);
            min_margin = min_margin.min(outcome.pointwise_margin);
        }
    }

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = all_ok && elapsed < 60.0;
    line(
        7,
        pass,
        &format!(
            "3 vorticities, 8 trajectories each to s=50, \
             worst pointwise speed-bound margin {min_margin:.2e}; {elapsed:.1}s"
        ),
    );
    assert!(all_ok, "completeness probe failed");
    assert!(elapsed < 60.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 8: the growth checker separates quadratic from super-quadratic
/// fiber growth: `1 + |x|^2` passes its natural witness, while `1 + |x|^2.25`
/// fails every witness in a wide grid once the shells reach far enough out,
/// with a reproducible counterexample.
#[test]
fn growth_checker_separates_quadratic_from_superquadratic() {
    let _g = serial();
    let t0 = Instant::now();

    let quadratic = parse_expression("1 + abs(x1)^2", 1).unwrap();
    let pass_region = Region::new(vec![0.0], vec![1.0, 10.0, 100.0, 1e4], 4, 0).unwrap();
    let witness = GrowthWitness::new(1.0, 1.0, vec![0.0]).unwrap();
    let report = check_quadratic_growth(&quadratic, &pass_region, &witness).unwrap();
    let pass_side = report.verdict == Verdict::Pass;

    // The largest witnesses are only violated where |x|^0.25 outgrows
    // lambda, so the sweep must reach well past the radius that refutes the
    // small ones.
    let superquadratic = parse_expression("1 + abs(x1)^2.25", 1).unwrap();
    let fail_region =
        Region::new(vec![0.0], vec![10.0, 1e2, 1e4, 1e7, 1e10, 1e13], 4, 0).unwrap();
    let grid = [0.1, 1.0, 10.0, 100.0, 1000.0];
    let mut fail_side = true;
    for &lambda in &grid {
        for &k in &grid {
            let w = GrowthWitness::new(lambda, k, vec![0.0]).unwrap();
            let rep = check_quadratic_growth(&superquadratic, &fail_region, &w).unwrap();
            fail_side &= rep.verdict == Verdict::Fail;
            fail_side &= rep
                .counterexample
                .as_ref()
                .map_or(false, |cx| cx.violation > 1e-12);
        }
    }

    let hardest = GrowthWitness::new(1000.0, 1000.0, vec![0.0]).unwrap();
    let first = check_quadratic_growth(&superquadratic, &fail_region, &hardest).unwrap();
    let second = check_quadratic_growth(&superquadratic, &fail_region, &hardest).unwrap();
    let cx_a = first.counterexample.unwrap();
    let cx_b = second.counterexample.unwrap();
    let reproducible =
        cx_a.x.iter().zip(&cx_b.x).all(|(p, q)| p.to_bits() == q.to_bits());

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = pass_side && fail_side && reproducible && elapsed < 10.0;
    line(
        8,
        pass,
        &format!(
            "exponent 2 passes witness (1,1); exponent 2.25 fails all 25 witnesses \
             up to (1e3,1e3) with counterexample at |x|={:.1e}; {elapsed:.1}s",
            cx_a.x[0].abs()
        ),
    );
    assert!(pass_side, "quadratic field must pass its natural witness");
    assert!(fail_side, "super-quadratic field must fail the whole witness grid");
    assert!(reproducible, "counterexample must be bit-identical across runs");
    assert!(elapsed < 10.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 9: route classification on two known examples: constant-V
/// Kerr-Schild connects through the A - C gap route, and rotating dust
/// connects through no sampled route while its completeness sweep passes.
#[test]
fn route_classification_matches_known_examples() {
    let _g = serial();
    let t0 = Instant::now();

    let region = Region::new(vec![0.0, 0.0], vec![1.0, 2.0], 24, 0).unwrap();
    let witnesses = WitnessSet {
        quadratic: origin_quadratic_witness(),
        linear: LinearWitness::new(1.0, 1.0, vec![0.0, 0.0]).unwrap(),
    };

    let ks = SpacetimeSpec::builtin(Zoo::KerrSchild {
        v: parse_expression("0.5", 2).unwrap(),
    })
    .unwrap();
    let ks_summary = theorem_verdicts(&ks, &region, &witnesses).unwrap();
    let gap_route = ks_summary
        .connectedness
        .iter()
        .find(|r| r.route == "h1+h2+h3'")
        .expect("gap route is always reported");
    let ks_ok = gap_route.verdict == Verdict::Pass && ks_summary.connected_route.is_some();

    let dust = godel(1.0);
    let dust_summary = theorem_verdicts(&dust, &region, &witnesses).unwrap();
    let dust_ok = dust_summary.connected_route.is_none()
        && dust_summary.completeness.verdict == Verdict::Pass
        && dust_summary.complete_route.as_deref() == Some("c1+c2");

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = ks_ok && dust_ok && elapsed < 10.0;
    line(
        9,
        pass,
        &format!(
            "kerr_schild connects via {} (gap route PASS), rotating dust: no \
             connectedness route, completeness PASS; {elapsed:.1}s",
            ks_summary.connected_route.as_deref().unwrap_or("none")
        ),
    );
    assert!(ks_ok, "constant-V Kerr-Schild must pass the gap route");
    assert!(dust_ok, "rotating dust must be complete but not sampled-connected");
    assert!(elapsed < 10.0, "runtime budget exceeded: {elapsed:.1}s");
}

/// Criterion 10: rerunning the CLI on the same config produces byte-identical
/// JSON artifacts.
#[test]
fn cli_artifacts_are_deterministic() {
    let _g = serial();
    let t0 = Instant::now();

    let tmp = TempDir::new().unwrap();
    let connect_cfg = tmp.path().join("connect.json");
    fs::write(
        &connect_cfg,
        serde_json::to_string_pretty(&json!({
            "spacetime": {"zoo": "godel", "params": {"omega": 1.0}},
            "command": {
                "name": "connect",
                "from": {"x": [0.0, 0.0], "y": 0.0, "t": 0.0},
                "to": {"x": [0.4, 0.2], "y": 0.5, "t": 0.8},
                "segments": 48
            },
            "output": {"dir": "unused"}
        }))
        .unwrap(),
    )
    .unwrap();
    let check_cfg = tmp.path().join("check.json");
    fs::write(
        &check_cfg,
        serde_json::to_string_pretty(&json!({
            "spacetime": {"zoo": "godel", "params": {"omega": 1.0}},
            "command": {
                "name": "check",
                "condition": "all",
                "region": {"center": [0.0, 0.0], "radii": [1.0, 2.0], "samples_per_shell": 8},
                "witness": {"lambda": 1.0, "k": 1.0}
            },
            "output": {"dir": "unused"}
        }))
        .unwrap(),
    )
    .unwrap();

    let run = |cfg: &Path, out: &Path| {
        let result = Command::new(env!("CARGO_BIN_EXE_gts"))
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .expect("binary runs");
        assert!(
            result.status.success(),
            "{}",
            String::from_utf8_lossy(&result.stderr)
        );
    };

    let mut identical = true;
    for (cfg, artifact) in [(&connect_cfg, "connect.json"), (&check_cfg, "check.json")] {
        let out_a = tmp.path().join(format!("a_{artifact}"));
        let out_b = tmp.path().join(format!("b_{artifact}"));
        run(cfg, &out_a);
        run(cfg, &out_b);
        identical &=
            fs::read(out_a.join(artifact)).unwrap() == fs::read(out_b.join(artifact)).unwrap();
    }

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = identical && elapsed < 10.0;
    line(
        10,
        pass,
        &format!("connect.json and check.json byte-identical across reruns; {elapsed:.1}s"),
    );
    assert!(identical, "artifacts differ between identical runs");
    assert!(elapsed < 10.0, "runtime budget exceeded: {elapsed:.1}s");
}
