//! End-to-end tests of the installed binary: exit codes, file outputs,
//! config-file precedence, and the snapshot round trip from `simulate`
//! into `residual`.

use sdym::report::{ResidualReport, SimulationSummary, VerifyReport};
use sdym::snapshot::read_scalar;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdym"))
}

/// Per-test scratch directory, removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("sdym-cli-{}-{name}", std::process::id()));
        std::fs::remove_dir_all(&dir).ok();
        std::fs::create_dir_all(&dir).expect("scratch dir");
        Scratch(dir)
    }

    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json<T: serde::de::DeserializeOwned>(out: &Output) -> T {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not the expected JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn verify_passes_and_writes_its_report() {
    let scratch = Scratch::new("verify-pass");
    let out_dir = scratch.path().join("reports");
    let out = run(&[
        "verify",
        "--suite",
        "nonisospectral",
        "--seed",
        "7",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: VerifyReport = stdout_json(&out);
    assert!(report.passed, "nonisospectral suite must pass");
    assert_eq!(report.suite, "nonisospectral");
    assert_eq!(report.seed, 7);
    let file = std::fs::read_to_string(out_dir.join("verify-nonisospectral.json"))
        .expect("report file written");
    assert_eq!(file, String::from_utf8_lossy(&out.stdout), "file and stdout agree");
}

#[test]
fn verify_rejects_unknown_suites_with_a_usage_exit() {
    let scratch = Scratch::new("verify-bogus");
    let out = run(&["verify", "--suite", "bogus", "--out", scratch.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown suite"), "stderr names the problem: {err}");
}

#[test]
fn config_file_fills_gaps_and_flags_override_it() {
    let scratch = Scratch::new("config");
    let config = scratch.path().join("run.json");
    std::fs::write(&config, r#"{"suite": "lax", "seed": 3}"#).expect("config written");
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "verify",
        "--suite",
        "nonisospectral",
        "--out",
        scratch.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: VerifyReport = stdout_json(&out);
    assert_eq!(report.suite, "nonisospectral", "command line overrides the file");
    assert_eq!(report.seed, 3, "file supplies what the command line omits");
}

#[test]
fn config_files_with_unknown_keys_are_usage_errors() {
    let scratch = Scratch::new("config-bad");
    let config = scratch.path().join("run.json");
    std::fs::write(&config, r#"{"sute": "lax"}"#).expect("config written");
    let out = run(&["--config", config.to_str().unwrap(), "verify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn environment_variable_supplies_the_default_output_directory() {
    let scratch = Scratch::new("env-out");
    let out = bin()
        .env("SDYM_OUT_DIR", scratch.path())
        .args(["verify", "--suite", "nonisospectral"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(
        scratch.path().join("verify-nonisospectral.json").is_file(),
        "report lands under $SDYM_OUT_DIR"
    );
}

#[test]
fn zero_scenario_snapshots_are_identically_zero() {
    let scratch = Scratch::new("zak-zero");
    let out = run(&[
        "simulate",
        "--eq",
        "zakharov",
        "--scenario",
        "zero",
        "--out",
        scratch.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: SimulationSummary = stdout_json(&out);
    assert_eq!(summary.equation, "zakharov");
    assert_eq!(summary.errors[0].name, "final_state_linf");
    assert_eq!(summary.errors[0].value, 0.0, "zero data is a bitwise fixed point");
    let dir = scratch.path().join("zakharov-zero");
    let last = summary.frames - 1;
    for name in ["phi", "v"] {
        let (header, field) =
            read_scalar(&dir.join(format!("{name}-{last:04}.snap"))).expect("snapshot reads");
        assert_eq!(header.name, name);
        assert_eq!(field.linf(), 0.0, "{name} stays exactly zero");
    }
    let csv = std::fs::read_to_string(dir.join("conserved.csv")).expect("csv written");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,name,value"), "csv header");
    assert!(csv.lines().count() > 1, "csv has samples");
}

#[test]
fn simulate_rejects_unknown_equations_and_missing_solvers() {
    let scratch = Scratch::new("sim-bad");
    let out_arg = scratch.path().to_str().unwrap().to_owned();
    let out = run(&["simulate", "--eq", "bogus", "--scenario", "zero", "--out", &out_arg]);
    assert_eq!(out.status.code(), Some(2), "unknown equation");
    let out = run(&["simulate", "--eq", "ds", "--scenario", "zero", "--out", &out_arg]);
    assert_eq!(out.status.code(), Some(2), "equation without a packaged integrator");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no solver"), "stderr names the problem: {err}");
    let out = run(&["simulate", "--eq", "nls", "--scenario", "line_soliton", "--out", &out_arg]);
    assert_eq!(out.status.code(), Some(2), "scenario not defined for the equation");
}

#[test]
fn snapshots_round_trip_into_a_passing_residual_check() {
    let scratch = Scratch::new("roundtrip");
    let out = run(&[
        "simulate",
        "--eq",
        "nls",
        "--scenario",
        "sech_soliton",
        "--dt",
        "5e-4",
        "--t-end",
        "0.012",
        "--frames",
        "25",
        "--out",
        scratch.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let dir = scratch.path().join("nls-sech_soliton");
    let files: Vec<String> = (10..15)
        .map(|i| dir.join(format!("phi-{i:04}.snap")).to_str().unwrap().to_owned())
        .collect();
    let out = run(&["residual", "--eq", "nls", "--files", &files.join(",")]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: ResidualReport = stdout_json(&out);
    assert!(report.passed);
    assert!(
        report.max_relative < 1e-5,
        "five-frame differencing closes the equation, got {:.3e}",
        report.max_relative
    );
}

#[test]
fn residual_of_zero_fields_is_exactly_zero() {
    let scratch = Scratch::new("residual-zero");
    let out = run(&[
        "simulate",
        "--eq",
        "nls",
        "--scenario",
        "zero",
        "--out",
        scratch.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dir = scratch.path().join("nls-zero");
    let files: Vec<String> = (0..5)
        .map(|i| dir.join(format!("phi-{i:04}.snap")).to_str().unwrap().to_owned())
        .collect();
    let out = run(&["residual", "--eq", "nls", "--files", &files.join(",")]);
    assert_eq!(out.status.code(), Some(0));
    let report: ResidualReport = stdout_json(&out);
    assert_eq!(report.max_relative, 0.0, "zero fields give a bitwise-zero residual");
}

#[test]
fn residual_rejects_mixed_grids_and_bad_group_sizes() {
    let scratch = Scratch::new("residual-bad");
    let out_arg = scratch.path().to_str().unwrap().to_owned();
    for (eq, scenario) in [("nls", "zero"), ("zakharov", "zero")] {
        let out = run(&["simulate", "--eq", eq, "--scenario", scenario, "--out", &out_arg]);
        assert_eq!(out.status.code(), Some(0));
    }
    let nls_phi = scratch.path().join("nls-zero/phi-0000.snap");
    let zak_v = scratch.path().join("zakharov-zero/v-0000.snap");
    let files = format!("{},{}", nls_phi.display(), zak_v.display());
    let out = run(&["residual", "--eq", "zakharov", "--files", &files]);
    assert_eq!(out.status.code(), Some(2), "1-d and 2-d snapshots cannot mix");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grids differ"), "stderr names the problem: {err}");

    let two = format!(
        "{},{}",
        scratch.path().join("nls-zero/phi-0000.snap").display(),
        scratch.path().join("nls-zero/phi-0001.snap").display()
    );
    let out = run(&["residual", "--eq", "nls", "--files", &two]);
    assert_eq!(out.status.code(), Some(2), "two snapshots of one field are ambiguous");

    let out = run(&["residual", "--eq", "nls"]);
    assert_eq!(out.status.code(), Some(2), "no files is a usage error");

    let missing = scratch.path().join("nls-zero/phi-9999.snap");
    let out = run(&["residual", "--eq", "nls", "--files", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "unreadable snapshot aborts");
}

#[test]
fn failing_residuals_exit_one() {
    let scratch = Scratch::new("residual-fail");
    let out = run(&[
        "simulate",
        "--eq",
        "zakharov",
        "--scenario",
        "sech_soliton",
        "--out",
        scratch.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dir = scratch.path().join("zakharov-sech_soliton");
    // Coarse frame spacing leaves a visible differencing error; an
    // unreasonably tight tolerance must turn into exit code 1, not a crash.
    let files: Vec<String> = (8..13)
        .map(|i| dir.join(format!("phi-{i:04}.snap")).to_str().unwrap().to_owned())
        .chain(std::iter::once(
            dir.join("v-0010.snap").to_str().unwrap().to_owned(),
        ))
        .collect();
    let out = run(&["residual", "--eq", "zakharov", "--files", &files.join(","), "--tol", "1e-12"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: ResidualReport = stdout_json(&out);
    assert!(!report.passed);
}
