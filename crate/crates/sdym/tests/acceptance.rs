//! Acceptance suite: one test per release criterion, each printing a single
//! pass/fail line with its measured value and the tolerance pinned here.
//!
//! The identity criteria (1–7) drive the public verification suites and
//! assert the named checks against the tolerances required for release,
//! independent of the (equal or tighter) tolerances the checks pin
//! internally.  The solver criteria (8–9) run the integrators directly at
//! the required resolutions, and criterion 10 exercises the installed
//! binary end to end.

use num_complex::Complex64;
use sdym::connections::{pure_gauge_connection, CoordinateRole};
use sdym::equations::{pde_residual, system_relative, EquationId, EquationParams, FieldMap};
use sdym::fields::Grid;
use sdym::report::{reports_equal_ignoring_meta, CheckOutcome, VerifyReport};
use sdym::residuals::sdym_residual;
use sdym::sampling::FieldSampler;
use sdym::solvers::{
    kp_line_soliton, mi_soliton, nls_soliton, solve_kp, solve_mi, solve_nls, solve_zakharov,
    time_derivative5, zakharov_soliton, Evolution, SolverConfig,
};
use sdym::verify::run_suite;
use std::f64::consts::PI;
use std::time::Instant;

const SEED: u64 = 42;

/// Run a suite and pull one named check out of its report.
fn suite_check(suite: &str, name: &str) -> CheckOutcome {
    let report = run_suite(suite, SEED, 1.0).expect("suite runs");
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("suite {suite} has no check named {name}"))
        .clone()
}

fn announce(criterion: &str, measured: f64, tolerance: f64, what: &str) {
    let verdict = if measured <= tolerance { "PASS" } else { "FAIL" };
    println!("{criterion}: {verdict} — {what} (measured {measured:.3e}, tolerance {tolerance:.1e})");
    assert!(
        measured <= tolerance,
        "{criterion}: {what} measured {measured:.3e} exceeds {tolerance:.1e}"
    );
}

fn announce_time(criterion: &str, secs: f64, budget: f64) {
    let verdict = if secs <= budget { "PASS" } else { "FAIL" };
    println!("{criterion}: {verdict} — runtime {secs:.2} s within {budget:.0} s budget");
    assert!(secs <= budget, "{criterion}: runtime {secs:.2} s exceeds {budget:.0} s");
}

#[test]
fn c01_zakharov_matrix_residual_is_the_declared_combination() {
    const TOL: f64 = 1e-10;
    const BUDGET_SECS: f64 = 10.0;
    let started = Instant::now();
    let check = suite_check("reductions", "zakharov_offshell_equivalence");
    let secs = started.elapsed().as_secs_f64();
    announce(
        "criterion 1",
        check.residual,
        TOL,
        "Zakharov connection curvature equals its fixed combination of the scalar \
         residuals on 20 random (phi, v) draws at 128x128",
    );
    announce_time("criterion 1", secs, BUDGET_SECS);
}

#[test]
fn c02_spin_matrix_residual_is_the_declared_combination() {
    const TOL: f64 = 1e-10;
    let check = suite_check("reductions", "m1_spin_offshell_equivalence");
    announce(
        "criterion 2",
        check.residual,
        TOL,
        "spin connection curvature equals its fixed combination of the scalar \
         residuals on 20 random (s, u) draws at 128x128",
    );
}

#[test]
fn c03_lambda_graded_pencils_collapse_to_fixed_linear_maps() {
    const TOL: f64 = 1e-9;
    let report = run_suite("lax", SEED, 1.0).expect("lax suite runs");
    let pencils = [
        "zakharov_pencil_grading",
        "spin_pencil_grading",
        "derivative_family_grading",
        "two_potential_grading",
    ];
    let mut worst: f64 = 0.0;
    for name in pencils {
        let check = report
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("lax suite has no check named {name}"));
        // Each grading check folds two independent draws and compares the
        // extracted weights against fixed references and each other, so one
        // residual covers both halves of the criterion.
        worst = worst.max(check.residual);
    }
    announce(
        "criterion 3",
        worst,
        TOL,
        "every lambda-power coefficient of all four operator pencils matches its \
         fixed linear image of the scalar residuals, consistently across two draws",
    );
}

#[test]
fn c04_pure_gauge_connections_are_flat_at_high_resolution() {
    const TOL: f64 = 1e-9;
    let l = 2.0 * PI;
    let grid = Grid::new(&[64, 64, 64], &[l, l, l]).expect("grid");
    let mut sampler = FieldSampler::new(SEED);
    let g = sampler.su2_field(&grid, 0.6);
    let conn = pure_gauge_connection(
        &g,
        [
            CoordinateRole::Axis(0),
            CoordinateRole::Axis(1),
            CoordinateRole::Axis(2),
            CoordinateRole::Absent,
        ],
    )
    .expect("pure-gauge connection");
    let residual = sdym_residual(&conn).expect("residual");
    let linf = residual.components().iter().map(|c| c.linf()).fold(0.0, f64::max);
    announce(
        "criterion 4",
        linf,
        TOL,
        "self-duality residual Linf of a pure-gauge four-potential connection at \
         64 points per axis",
    );
}

#[test]
fn c05_quadruple_system_reproduces_the_curvature_components() {
    const TOL: f64 = 1e-10;
    let check = suite_check("curvature", "quadruple_lambda_encoding");
    announce(
        "criterion 5",
        check.residual,
        TOL,
        "lambda-coefficient matching of the quadruple linear system reproduces all \
         three self-duality components",
    );
}

#[test]
fn c06_nonisospectral_parameter_drift_satisfies_its_closed_forms() {
    const TOL: f64 = 1e-12;
    let report = run_suite("nonisospectral", SEED, 1.0).expect("suite runs");
    let mut worst: f64 = 0.0;
    for name in ["four_coordinate_drift_closure", "reduced_drift_closure"] {
        let check = report
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("nonisospectral suite has no check named {name}"));
        worst = worst.max(check.residual);
    }
    announce(
        "criterion 6",
        worst,
        TOL,
        "closed-form spectral-parameter profiles satisfy the four-coordinate and \
         reduced drift laws with analytic derivatives",
    );
}

#[test]
fn c07_gauge_map_carries_solutions_and_preserves_invariants() {
    const TOL_RESIDUAL: f64 = 1e-8;
    const TOL_INVARIANT: f64 = 1e-13;
    let report = run_suite("gauge", SEED, 1.0).expect("gauge suite runs");
    let find = |name: &str| {
        report
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("gauge suite has no check named {name}"))
    };
    announce(
        "criterion 7a",
        find("gauge_map_preserves_solutions").residual,
        TOL_RESIDUAL,
        "transformed fields satisfy the target derivative-Schrodinger system on 10 \
         on-shell draws",
    );
    announce(
        "criterion 7b",
        find("gauge_map_invariants").residual,
        TOL_INVARIANT,
        "the product q'p' equals qp pointwise and the transforming factor stays \
         unimodular",
    );
}

#[test]
fn c08a_nls_soliton_holds_shape_over_one_transit_period() {
    const TOL_SHAPE: f64 = 1e-4;
    const TOL_MASS_PER_TIME: f64 = 1e-10;
    const BUDGET_SECS: f64 = 5.0;
    let l = 16.0 * PI;
    let grid = Grid::new(&[256], &[l]).expect("grid");
    let (amplitude, speed) = (1.0, 1.0);
    let phi0 = nls_soliton(&grid, amplitude, speed, 0.0).expect("initial soliton");
    // One transit of the torus returns the envelope to its start.
    let t_end = l / speed;
    let dt = t_end / 50266.0;
    let config = SolverConfig { dt, t_end, frames: 2 };
    let started = Instant::now();
    let run = solve_nls(&phi0, 1.0, &config).expect("nls run");
    let secs = started.elapsed().as_secs_f64();
    let exact = nls_soliton(&grid, amplitude, speed, t_end).expect("exact state");
    let last = run.frames.last().expect("frames").fields.get_opt("phi").expect("phi");
    let envelope = |f: &sdym::fields::ScalarField| f.map(|z| Complex64::new(z.norm(), 0.0));
    let shape = envelope(last)
        .sub(&envelope(&exact))
        .expect("same grid")
        .norms()
        .l2
        / exact.norms().l2;
    announce(
        "criterion 8a",
        shape,
        TOL_SHAPE,
        "relative L2 envelope error of the cubic-Schrodinger soliton after one \
         transit of the 256-point torus",
    );
    let mass_per_time = run.series("mass").expect("mass series").drift() / t_end;
    announce("criterion 8a", mass_per_time, TOL_MASS_PER_TIME, "mass drift per unit time");
    announce_time("criterion 8a", secs, BUDGET_SECS);
}

#[test]
fn c08b_zakharov_soliton_tracks_its_exact_motion() {
    const TOL: f64 = 1e-3;
    const BUDGET_SECS: f64 = 60.0;
    let l = 16.0 * PI;
    let grid = Grid::new(&[64, 64], &[l, l]).expect("grid");
    // Amplitude 0.5 keeps the diagonal sech spectrum inside the 64-point
    // band; the carrier speed satisfies the periodicity constraint.
    let (amplitude, speed) = (0.5, 0.5);
    let phi0 = zakharov_soliton(&grid, amplitude, speed, 0.0).expect("initial soliton");
    let config = SolverConfig { dt: 1e-3, t_end: 1.0, frames: 2 };
    let started = Instant::now();
    let run = solve_zakharov(&phi0, 1.0, &config).expect("zakharov run");
    let secs = started.elapsed().as_secs_f64();
    let exact = zakharov_soliton(&grid, amplitude, speed, 1.0).expect("exact state");
    let last = run.frames.last().expect("frames").fields.get_opt("phi").expect("phi");
    let rel = last.sub(&exact).expect("same grid").norms().l2 / exact.norms().l2;
    announce(
        "criterion 8b",
        rel,
        TOL,
        "relative L2 error against the co-moving diagonal soliton at t = 1 on 64x64",
    );
    announce_time("criterion 8b", secs, BUDGET_SECS);
}

#[test]
fn c08c_kp_line_soliton_tracks_its_exact_motion() {
    const TOL: f64 = 1e-4;
    let grid = Grid::new(&[256, 32], &[32.0, 32.0]).expect("grid");
    let kappa = 1.0;
    let u0 = kp_line_soliton(&grid, kappa, 0.0).expect("initial soliton");
    let config = SolverConfig { dt: 4e-3, t_end: 0.5, frames: 2 };
    let run = solve_kp(&u0, 1.0, &config).expect("kp run");
    let exact = kp_line_soliton(&grid, kappa, 0.5).expect("exact state");
    let last = run.frames.last().expect("frames").fields.get_opt("k").expect("k");
    let rel = last.sub(&exact).expect("same grid").norms().l2 / exact.norms().l2;
    announce(
        "criterion 8c",
        rel,
        TOL,
        "relative L2 error against the co-moving line soliton at t = 0.5 on 256x32",
    );
}

#[test]
fn c08d_spin_solver_keeps_unit_norm_before_projection() {
    const TOL: f64 = 1e-8;
    let l = 16.0 * PI;
    let grid = Grid::new(&[128, 128], &[l, l]).expect("grid");
    let s0 = mi_soliton(&grid, 0.5, 0.5).expect("initial spins");
    let config = SolverConfig { dt: 2e-3, t_end: 0.05, frames: 2 };
    let run = solve_mi(&s0, &config).expect("spin run");
    let drift = run
        .diagnostic("max_norm_sq_drift_per_step")
        .expect("norm drift diagnostic");
    announce(
        "criterion 8d",
        drift,
        TOL,
        "worst per-step deviation of |S|^2 from 1 in un-renormalized stage \
         output (bounds the norm deviation itself)",
    );
}

/// Difference five interior frames for the time derivatives, then feed the
/// middle state back through the equation's own residual evaluator.
fn closure_residual(
    run: &Evolution,
    id: EquationId,
    differenced: &[&str],
    direct: &[&str],
) -> f64 {
    let h = run.frame_spacing();
    let mut fields = FieldMap::new();
    for name in differenced {
        let grab = |j: usize| {
            run.frames[j]
                .fields
                .get_opt(name)
                .unwrap_or_else(|| panic!("frame is missing {name}"))
        };
        let ddt = time_derivative5(grab(10), grab(11), grab(13), grab(14), h)
            .expect("stencil applies");
        fields.insert(format!("{name}_t"), ddt);
        fields.insert(*name, grab(12).clone());
    }
    for name in direct {
        fields.insert(
            *name,
            run.frames[12]
                .fields
                .get_opt(name)
                .unwrap_or_else(|| panic!("frame is missing {name}"))
                .clone(),
        );
    }
    let residual = pde_residual(id, &fields, &EquationParams::default()).expect("residual");
    system_relative(&residual)
}

#[test]
fn c09_recorded_trajectories_satisfy_their_own_equations() {
    const TOL: f64 = 1e-5;
    let l = 16.0 * PI;
    let fine = SolverConfig { dt: 5e-4, t_end: 0.012, frames: 25 };

    let g1 = Grid::new(&[256], &[l]).expect("grid");
    let phi0 = nls_soliton(&g1, 1.0, 1.0, 0.0).expect("soliton");
    let nls = solve_nls(&phi0, 1.0, &fine).expect("nls run");
    let worst_nls = closure_residual(&nls, EquationId::Nls, &["phi"], &[]);
    announce("criterion 9", worst_nls, TOL, "cubic-Schrodinger frames close their equation");

    let g2 = Grid::new(&[128, 128], &[l, l]).expect("grid");
    let phi0 = zakharov_soliton(&g2, 0.5, 0.5, 0.0).expect("soliton");
    let zak = solve_zakharov(&phi0, 1.0, &fine).expect("zakharov run");
    let worst_zak = closure_residual(&zak, EquationId::Zakharov, &["phi"], &["v"]);
    announce("criterion 9", worst_zak, TOL, "Zakharov frames close their system");

    let gk = Grid::new(&[256, 32], &[32.0, 32.0]).expect("grid");
    let u0 = kp_line_soliton(&gk, 1.0, 0.0).expect("soliton");
    let kp_cfg = SolverConfig { dt: 1e-3, t_end: 0.024, frames: 25 };
    let kp = solve_kp(&u0, 1.0, &kp_cfg).expect("kp run");
    let worst_kp = closure_residual(&kp, EquationId::Kp, &["k"], &["m3"]);
    announce("criterion 9", worst_kp, TOL, "KP frames close their equation");

    let s0 = mi_soliton(&g2, 0.5, 0.5).expect("spins");
    let mi_cfg = SolverConfig { dt: 2e-3, t_end: 0.048, frames: 25 };
    let mi = solve_mi(&s0, &mi_cfg).expect("spin run");
    let worst_mi =
        closure_residual(&mi, EquationId::M1Spin, &["s1", "s2", "s3"], &["u"]);
    announce("criterion 9", worst_mi, TOL, "spin-flow frames close their system");
}

#[test]
fn c10_verification_reports_are_reproducible() {
    let exe = env!("CARGO_BIN_EXE_sdym");
    let base = std::env::temp_dir().join(format!("sdym-acceptance-{}", std::process::id()));
    let mut jsons = Vec::new();
    for label in ["first", "second"] {
        let out = base.join(label);
        let status = std::process::Command::new(exe)
            .args(["verify", "--suite", "all", "--seed", "42", "--out"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::null())
            .status()
            .expect("binary runs");
        assert_eq!(status.code(), Some(0), "verify --suite all --seed 42 must exit 0");
        let text = std::fs::read_to_string(out.join("verify-all.json")).expect("report file");
        jsons.push(text);
    }
    let identical =
        reports_equal_ignoring_meta(&jsons[0], &jsons[1]).expect("reports parse");
    let report: VerifyReport = serde_json::from_str(&jsons[0]).expect("report parses");
    let verdict = if identical && report.passed { "PASS" } else { "FAIL" };
    println!(
        "criterion 10: {verdict} — two seeded full-suite runs give byte-identical \
         reports outside the wall-clock block, all {} checks green",
        report.checks_passed
    );
    std::fs::remove_dir_all(&base).ok();
    assert!(identical, "reports differ outside their meta block");
    assert!(report.passed, "full suite must pass at seed 42");
}
