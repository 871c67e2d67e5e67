//! Command-line interface: verification suites, desk-scale simulations, and
//! file-based residual evaluation.
//!
//! Three subcommands share one configuration model:
//!
//! * `verify --suite S --seed N --tol T --out DIR` runs a suite of seeded
//!   identity checks and writes/prints a JSON report.
//! * `simulate --eq E --scenario SC --grid NX[,NY] --dt DT --t-end T --out
//!   DIR` evolves one of the packaged flows, writing per-frame snapshots, a
//!   conserved-quantity CSV (`t,name,value`), and a summary JSON.
//! * `residual --eq E --files F1,F2,... --tol T` evaluates an equation's
//!   residual on snapshot files and prints a JSON report.
//!
//! Every flag can instead come from a JSON config file (`--config FILE`);
//! precedence is command line > config file > built-in defaults.  The
//! default output directory comes from the `SDYM_OUT_DIR` environment
//! variable when set.
//!
//! Exit codes: 0 all checks/residuals passed, 1 a residual or check failed
//! its tolerance, 2 usage or configuration error, 3 I/O or numerical abort.
//! For a fixed configuration and seed, reports are byte-identical across
//! runs apart from their `meta` block.

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::equations::{pde_residual, system_relative, EquationId, EquationParams, FieldMap};
use crate::fields::{Grid, ScalarField};
use crate::report::{
    ComponentNorms, ReportMeta, ResidualReport, ScenarioError, SimulationSummary,
};
use crate::sampling::FieldSampler;
use crate::snapshot::{read_scalar, write_scalar};
use crate::solvers::{
    kp_line_soliton, mi_soliton, nls_plane_wave, nls_soliton, solve_kp, solve_mi, solve_nls,
    solve_zakharov, time_derivative5, zakharov_soliton, Evolution, SolverConfig, SolverError,
};
use crate::vector3::Vec3Field;
use crate::verify::{run_suite, VerifyError};

/// Exit code when everything passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code when a residual or check exceeded its tolerance.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for usage or configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for I/O failures or numerical aborts.
pub const EXIT_ABORT: i32 = 3;

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "SDYM_OUT_DIR";

/// Equations with a packaged time integrator.
const SIM_EQUATIONS: [&str; 4] = ["nls", "zakharov", "kp", "m1_spin"];

#[derive(Parser)]
#[command(
    name = "sdym",
    version,
    about = "Verification suites, simulations and residual checks for \
             (2+1)-dimensional integrable flows tied to the self-dual \
             Yang-Mills system",
    propagate_version = true
)]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite of seeded identity checks and write a JSON report.
    Verify {
        /// Suite: curvature, reductions, lax, gauge, nonisospectral, or all.
        #[arg(long)]
        suite: Option<String>,
        /// Seed for the random field draws (fully determines the report).
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplier on every check's pinned tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Output directory for the report (default: $SDYM_OUT_DIR or ./sdym-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve one of the packaged flows; write snapshots, CSV, and summary.
    Simulate {
        /// Equation: nls, zakharov, kp, or m1_spin.
        #[arg(long)]
        eq: Option<String>,
        /// Scenario: zero, plane_wave, sech_soliton, line_soliton, or random.
        #[arg(long)]
        scenario: Option<String>,
        /// Grid points per axis, e.g. 256 or 128,128.
        #[arg(long, value_name = "NX[,NY]")]
        grid: Option<String>,
        /// Time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Final time.
        #[arg(long, value_name = "T")]
        t_end: Option<f64>,
        /// Frames to store (must make steps divisible by frames − 1;
        /// chosen automatically when omitted).
        #[arg(long)]
        frames: Option<usize>,
        /// Seed for the random scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Field amplitude (or spin deviation) for the random scenario.
        #[arg(long)]
        amplitude: Option<f64>,
        /// Output directory (default: $SDYM_OUT_DIR or ./sdym-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an equation's residual on snapshot files.
    ///
    /// Files are grouped by the field name in their headers.  A group of
    /// five snapshots at uniformly spaced times provides the field and its
    /// time derivative (fourth-order differencing) at the middle time; a
    /// group of one provides the field directly.
    Residual {
        /// Equation whose residual to evaluate (e.g. nls, zakharov, kp).
        #[arg(long)]
        eq: Option<String>,
        /// Snapshot files, comma-separated or repeated.
        #[arg(long, value_delimiter = ',', value_name = "F1,F2,...")]
        files: Vec<PathBuf>,
        /// Pass threshold on the worst relative component norm.
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Optional values a JSON config file may supply for any subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    suite: Option<String>,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    eq: Option<String>,
    scenario: Option<String>,
    grid: Option<Vec<usize>>,
    dt: Option<f64>,
    t_end: Option<f64>,
    frames: Option<usize>,
    amplitude: Option<f64>,
    files: Option<Vec<PathBuf>>,
}

/// A failure with its exit-code class.
#[derive(Debug)]
enum CliError {
    /// Bad flags, config, or inputs of the wrong shape (exit 2).
    Usage(String),
    /// I/O failure or numerical abort (exit 3).
    Abort(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Abort(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Abort(_) => EXIT_ABORT,
        }
    }
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn abort(m: impl fmt::Display) -> CliError {
    CliError::Abort(m.to_string())
}

/// Solver failures split by class: configuration problems are usage errors,
/// anything at run time is a numerical abort.
fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::BadConfig { .. } => CliError::Usage(e.to_string()),
        other => CliError::Abort(other.to_string()),
    }
}

/// Parse and dispatch `std::env::args`, returning the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Prints help/version to stdout (exit 0) or the usage error to
            // stderr (exit 2).
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Verify { suite, seed, tol, out } => cmd_verify(
            suite.or(file.suite).unwrap_or_else(|| "all".into()),
            seed.or(file.seed).unwrap_or(42),
            tol.or(file.tol).unwrap_or(1.0),
            resolve_out(out.or(file.out)),
        ),
        Command::Simulate {
            eq,
            scenario,
            grid,
            dt,
            t_end,
            frames,
            seed,
            amplitude,
            out,
        } => {
            let sizes = match grid {
                Some(s) => Some(parse_grid(&s)?),
                None => file.grid,
            };
            cmd_simulate(SimulateArgs {
                eq: eq.or(file.eq).ok_or_else(|| usage("simulate needs --eq"))?,
                scenario: scenario
                    .or(file.scenario)
                    .ok_or_else(|| usage("simulate needs --scenario"))?,
                sizes,
                dt: dt.or(file.dt),
                t_end: t_end.or(file.t_end),
                frames: frames.or(file.frames),
                seed: seed.or(file.seed).unwrap_or(1),
                amplitude: amplitude.or(file.amplitude).unwrap_or(0.5),
                out: resolve_out(out.or(file.out)),
            })
        }
        Command::Residual { eq, files, tol } => cmd_residual(
            eq.or(file.eq).ok_or_else(|| usage("residual needs --eq"))?,
            if files.is_empty() { file.files.unwrap_or_default() } else { files },
            tol.or(file.tol).unwrap_or(1e-5),
        ),
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("config file {}: {e}", path.display())))
}

fn resolve_out(chosen: Option<PathBuf>) -> PathBuf {
    chosen
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sdym-out"))
}

fn parse_grid(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad grid component {part:?}; expected NX or NX,NY")))
        })
        .collect()
}

fn parse_equation(name: &str) -> Result<EquationId, CliError> {
    EquationId::ALL
        .into_iter()
        .find(|id| id.as_str() == name)
        .ok_or_else(|| usage(format!("unknown equation \"{name}\"")))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(suite: String, seed: u64, tol: f64, out: PathBuf) -> Result<i32, CliError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(usage(format!("--tol must be positive and finite, got {tol}")));
    }
    let report = run_suite(&suite, seed, tol).map_err(|e| match e {
        VerifyError::UnknownSuite(_) => usage(e.to_string()),
        other => abort(other),
    })?;
    let json = report.to_json().map_err(abort)?;
    std::fs::create_dir_all(&out).map_err(|e| abort(format!("{}: {e}", out.display())))?;
    let path = out.join(format!("verify-{suite}.json"));
    std::fs::write(&path, &json).map_err(|e| abort(format!("{}: {e}", path.display())))?;
    print!("{json}");
    eprintln!(
        "verify {suite}: {}/{} checks passed, report {}",
        report.checks_passed,
        report.checks_passed + report.checks_failed,
        path.display()
    );
    Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    eq: String,
    scenario: String,
    sizes: Option<Vec<usize>>,
    dt: Option<f64>,
    t_end: Option<f64>,
    frames: Option<usize>,
    seed: u64,
    amplitude: f64,
    out: PathBuf,
}

/// Fixed per-scenario choices: grid shape and duration defaults plus the
/// profile parameters that make the scenario's oracle exact.
#[derive(Debug)]
struct ScenarioPlan {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
    dt: f64,
    t_end: f64,
}

fn scenario_plan(eq: &str, scenario: &str) -> Result<ScenarioPlan, CliError> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let l8 = 8.0 * two_pi; // 16π, the tuned torus for the Schrödinger flows
    let plan = match (eq, scenario) {
        ("nls", "zero") => ScenarioPlan {
            sizes: vec![256],
            lengths: vec![l8],
            dt: 1e-3,
            t_end: 0.02,
        },
        ("nls", "plane_wave") => ScenarioPlan {
            sizes: vec![256],
            lengths: vec![l8],
            dt: 1e-3,
            t_end: 0.5,
        },
        ("nls", "sech_soliton") => ScenarioPlan {
            sizes: vec![256],
            lengths: vec![l8],
            dt: 1e-3,
            t_end: 1.0,
        },
        ("nls", "random") => ScenarioPlan {
            sizes: vec![256],
            lengths: vec![l8],
            dt: 1e-3,
            t_end: 0.05,
        },
        ("zakharov", "zero") => ScenarioPlan {
            sizes: vec![128, 128],
            lengths: vec![l8, l8],
            dt: 1e-3,
            t_end: 0.02,
        },
        ("zakharov", "sech_soliton") => ScenarioPlan {
            sizes: vec![128, 128],
            lengths: vec![l8, l8],
            dt: 1e-3,
            t_end: 0.2,
        },
        ("zakharov", "random") => ScenarioPlan {
            sizes: vec![128, 128],
            lengths: vec![l8, l8],
            dt: 1e-3,
            t_end: 0.05,
        },
        ("kp", "zero") => ScenarioPlan {
            sizes: vec![256, 32],
            lengths: vec![32.0, 32.0],
            dt: 1e-3,
            t_end: 0.02,
        },
        ("kp", "line_soliton") => ScenarioPlan {
            sizes: vec![256, 32],
            lengths: vec![32.0, 32.0],
            dt: 4e-3,
            t_end: 0.5,
        },
        ("kp", "random") => ScenarioPlan {
            sizes: vec![256, 32],
            lengths: vec![32.0, 32.0],
            dt: 1e-3,
            t_end: 0.05,
        },
        ("m1_spin", "zero") => ScenarioPlan {
            sizes: vec![128, 128],
            lengths: vec![l8, l8],
            dt: 1e-3,
            t_end: 0.02,
        },
        ("m1_spin", "sech_soliton") => ScenarioPlan {
            sizes: vec![128, 128],
            lengths: vec![l8, l8],
            dt: 2e-3,
            t_end: 0.05,
        },
        ("m1_spin", "random") => ScenarioPlan {
            sizes: vec![128, 128],
            lengths: vec![l8, l8],
            dt: 1e-3,
            t_end: 0.02,
        },
        _ => {
            return Err(usage(format!(
                "no scenario \"{scenario}\" for equation \"{eq}\"; equations with solvers \
                 are {} with scenarios zero, plane_wave (nls), sech_soliton (nls, zakharov, \
                 m1_spin), line_soliton (kp), and random",
                SIM_EQUATIONS.join(", ")
            )))
        }
    };
    Ok(plan)
}

/// Fixed profile parameters for the oracle scenarios, chosen so every
/// carrier is periodic on the default torus.
const NLS_WAVE_AMPLITUDE: f64 = 0.8;
const NLS_WAVE_MODE: i32 = 3;
const NLS_SOLITON_AMPLITUDE: f64 = 1.0;
const NLS_SOLITON_SPEED: f64 = 1.0;
const ZE_SOLITON_AMPLITUDE: f64 = 1.0;
const ZE_SOLITON_SPEED: f64 = 0.5;
const KP_SOLITON_KAPPA: f64 = 1.0;
const MI_SOLITON_AMPLITUDE: f64 = 0.5;
const MI_SOLITON_SPEED: f64 = 0.5;
const COUPLING_R2: f64 = 1.0;
const KP_ALPHA: f64 = 1.0;

fn cmd_simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let started = Instant::now();
    if !SIM_EQUATIONS.contains(&args.eq.as_str()) {
        // Distinguish "not an equation at all" from "no solver for it".
        parse_equation(&args.eq)?;
        return Err(usage(format!(
            "no solver for \"{}\"; equations with solvers: {}",
            args.eq,
            SIM_EQUATIONS.join(", ")
        )));
    }
    let plan = scenario_plan(&args.eq, &args.scenario)?;
    let sizes = args.sizes.unwrap_or_else(|| plan.sizes.clone());
    if sizes.len() != plan.sizes.len() {
        return Err(usage(format!(
            "equation \"{}\" needs {} grid axis(es), got {}",
            args.eq,
            plan.sizes.len(),
            sizes.len()
        )));
    }
    let grid = Grid::new(&sizes, &plan.lengths).map_err(|e| usage(e.to_string()))?;
    let dt = args.dt.unwrap_or(plan.dt);
    let t_end = args.t_end.unwrap_or(plan.t_end);
    let (steps, _) =
        SolverConfig { dt, t_end, frames: 2 }.plan().map_err(solver_error)?;
    let frames = args.frames.unwrap_or_else(|| {
        (2..=25).rev().find(|f| steps % (f - 1) == 0).unwrap_or(2)
    });
    let config = SolverConfig { dt, t_end, frames };

    let mut sampler = FieldSampler::new(args.seed);
    let (run, errors, field_names): (Evolution, Vec<ScenarioError>, &[&str]) =
        match (args.eq.as_str(), args.scenario.as_str()) {
            ("nls", scenario) => {
                let phi0 = match scenario {
                    "zero" => ScalarField::zeros(&grid),
                    "plane_wave" => {
                        nls_plane_wave(&grid, NLS_WAVE_AMPLITUDE, NLS_WAVE_MODE, COUPLING_R2, 0.0)
                            .map_err(solver_error)?
                    }
                    "sech_soliton" => {
                        nls_soliton(&grid, NLS_SOLITON_AMPLITUDE, NLS_SOLITON_SPEED, 0.0)
                            .map_err(solver_error)?
                    }
                    _ => sampler.complex_field(&grid, args.amplitude),
                };
                let run = solve_nls(&phi0, COUPLING_R2, &config).map_err(solver_error)?;
                let exact = match scenario {
                    "plane_wave" => Some(
                        nls_plane_wave(&grid, NLS_WAVE_AMPLITUDE, NLS_WAVE_MODE, COUPLING_R2, t_end)
                            .map_err(solver_error)?,
                    ),
                    "sech_soliton" => Some(
                        nls_soliton(&grid, NLS_SOLITON_AMPLITUDE, NLS_SOLITON_SPEED, t_end)
                            .map_err(solver_error)?,
                    ),
                    _ => None,
                };
                let errors = final_errors(&run, &["phi"], scenario, exact.as_ref(), "phi")?;
                (run, errors, &["phi"][..])
            }
            ("zakharov", scenario) => {
                let phi0 = match scenario {
                    "zero" => ScalarField::zeros(&grid),
                    "sech_soliton" => {
                        zakharov_soliton(&grid, ZE_SOLITON_AMPLITUDE, ZE_SOLITON_SPEED, 0.0)
                            .map_err(solver_error)?
                    }
                    _ => sampler.complex_field(&grid, args.amplitude),
                };
                let run = solve_zakharov(&phi0, COUPLING_R2, &config).map_err(solver_error)?;
                let exact = match scenario {
                    "sech_soliton" => Some(
                        zakharov_soliton(&grid, ZE_SOLITON_AMPLITUDE, ZE_SOLITON_SPEED, t_end)
                            .map_err(solver_error)?,
                    ),
                    _ => None,
                };
                let errors = final_errors(&run, &["phi", "v"], scenario, exact.as_ref(), "phi")?;
                (run, errors, &["phi", "v"][..])
            }
            ("kp", scenario) => {
                let u0 = match scenario {
                    "zero" => ScalarField::zeros(&grid),
                    "line_soliton" => {
                        kp_line_soliton(&grid, KP_SOLITON_KAPPA, 0.0).map_err(solver_error)?
                    }
                    _ => sampler.real_field_no_x_mean(&grid, args.amplitude),
                };
                let run = solve_kp(&u0, KP_ALPHA, &config).map_err(solver_error)?;
                let exact = match scenario {
                    "line_soliton" => Some(
                        kp_line_soliton(&grid, KP_SOLITON_KAPPA, t_end).map_err(solver_error)?,
                    ),
                    _ => None,
                };
                let errors = final_errors(&run, &["k", "m3"], scenario, exact.as_ref(), "k")?;
                (run, errors, &["k", "m3"][..])
            }
            ("m1_spin", scenario) => {
                let s0: Vec3Field = match scenario {
                    "zero" => [
                        ScalarField::zeros(&grid),
                        ScalarField::zeros(&grid),
                        ScalarField::constant(&grid, Complex64::new(1.0, 0.0)),
                    ],
                    "sech_soliton" => {
                        mi_soliton(&grid, MI_SOLITON_AMPLITUDE, MI_SOLITON_SPEED)
                            .map_err(solver_error)?
                    }
                    _ => sampler.unit_spin(&grid, args.amplitude),
                };
                let run = solve_mi(&s0, &config).map_err(solver_error)?;
                let errors = if scenario == "zero" {
                    // The uniform ground state is stationary: measure the
                    // final deviation from it.
                    let last = run.frames.last().expect("at least two frames");
                    let mut dev: f64 = 0.0;
                    for (name, shift) in
                        [("s1", 0.0), ("s2", 0.0), ("s3", 1.0), ("u", 0.0)]
                    {
                        let f = frame_field(last, name)?;
                        dev = dev.max(f.map(|z| z - Complex64::new(shift, 0.0)).linf());
                    }
                    vec![ScenarioError { name: "final_state_linf".into(), value: dev }]
                } else {
                    Vec::new()
                };
                (run, errors, &["s1", "s2", "s3", "u"][..])
            }
            _ => unreachable!("pairings validated by scenario_plan"),
        };

    let dir = args.out.join(format!("{}-{}", args.eq, args.scenario));
    std::fs::create_dir_all(&dir).map_err(|e| abort(format!("{}: {e}", dir.display())))?;
    for (idx, frame) in run.frames.iter().enumerate() {
        for name in field_names {
            let field = frame_field(frame, name)?;
            let path = dir.join(format!("{name}-{idx:04}.snap"));
            write_scalar(&path, name, frame.t, field)
                .map_err(|e| abort(format!("{}: {e}", path.display())))?;
        }
    }

    let mut csv = String::from("t,name,value\n");
    for series in &run.conserved {
        for (t, value) in &series.samples {
            csv.push_str(&format!("{t},{},{value}\n", series.name));
        }
    }
    let csv_path = dir.join("conserved.csv");
    std::fs::write(&csv_path, csv).map_err(|e| abort(format!("{}: {e}", csv_path.display())))?;

    let summary = SimulationSummary {
        meta: ReportMeta::now(started.elapsed().as_millis() as u64),
        equation: args.eq.clone(),
        scenario: args.scenario.clone(),
        grid: grid.sizes().to_vec(),
        lengths: grid.lengths().to_vec(),
        dt,
        t_end,
        steps: run.steps,
        frames: run.frames.len(),
        conserved: run
            .conserved
            .iter()
            .map(|s| crate::report::DriftEntry {
                name: s.name.clone(),
                initial: s.samples.first().map_or(0.0, |x| x.1),
                drift: s.drift(),
            })
            .collect(),
        errors,
        diagnostics: run
            .diagnostics
            .iter()
            .map(|(name, value)| ScenarioError { name: name.clone(), value: *value })
            .collect(),
    };
    let json = summary.to_json().map_err(abort)?;
    let summary_path = dir.join("summary.json");
    std::fs::write(&summary_path, &json)
        .map_err(|e| abort(format!("{}: {e}", summary_path.display())))?;
    print!("{json}");
    eprintln!(
        "simulate {} {}: {} steps, {} frames, output {}",
        args.eq,
        args.scenario,
        run.steps,
        run.frames.len(),
        dir.display()
    );
    Ok(EXIT_PASS)
}

fn frame_field<'a>(
    frame: &'a crate::solvers::Frame,
    name: &str,
) -> Result<&'a ScalarField, CliError> {
    frame
        .fields
        .get_opt(name)
        .ok_or_else(|| abort(format!("solver frame is missing field \"{name}\"")))
}

/// Scenario-oracle errors at the final frame: exact relative L² distance
/// where a closed-form solution exists, plain L∞ for the zero state.
fn final_errors(
    run: &Evolution,
    zero_fields: &[&str],
    scenario: &str,
    exact: Option<&ScalarField>,
    compare: &str,
) -> Result<Vec<ScenarioError>, CliError> {
    let last = run.frames.last().expect("at least two frames");
    if scenario == "zero" {
        let mut worst: f64 = 0.0;
        for name in zero_fields {
            worst = worst.max(frame_field(last, name)?.linf());
        }
        return Ok(vec![ScenarioError { name: "final_state_linf".into(), value: worst }]);
    }
    let Some(exact) = exact else { return Ok(Vec::new()) };
    let got = frame_field(last, compare)?;
    let diff = got.sub(exact).map_err(abort)?;
    let scale = exact.norms().l2.max(1e-300);
    Ok(vec![ScenarioError {
        name: "final_state_relative_l2".into(),
        value: diff.norms().l2 / scale,
    }])
}

// ---------------------------------------------------------------------------
// residual
// ---------------------------------------------------------------------------

/// Relative slack for matching snapshot times and stencil spacings.
const TIME_MATCH_TOL: f64 = 1e-9;

fn cmd_residual(eq: String, files: Vec<PathBuf>, tol: f64) -> Result<i32, CliError> {
    let started = Instant::now();
    let id = parse_equation(&eq)?;
    if files.is_empty() {
        return Err(usage("residual needs --files with at least one snapshot"));
    }

    let mut loaded: Vec<(String, f64, ScalarField)> = Vec::with_capacity(files.len());
    for path in &files {
        let (header, field) = read_scalar(path)
            .map_err(|e| abort(format!("{}: {e}", path.display())))?;
        loaded.push((header.name, header.time, field));
    }
    let reference = loaded[0].2.grid().clone();
    for (name, _, field) in &loaded {
        let g = field.grid();
        if g.sizes() != reference.sizes() || g.lengths() != reference.lengths() {
            return Err(usage(format!(
                "snapshot grids differ: \"{name}\" has {:?}/{:?}, first file has {:?}/{:?}",
                g.sizes(),
                g.lengths(),
                reference.sizes(),
                reference.lengths()
            )));
        }
    }

    let mut groups: BTreeMap<String, Vec<(f64, ScalarField)>> = BTreeMap::new();
    for (name, time, field) in loaded {
        groups.entry(name).or_default().push((time, field));
    }

    let mut fields = FieldMap::new();
    let mut stencil: Option<(f64, f64)> = None; // (center time, spacing)
    let mut singles: Vec<(String, f64, ScalarField)> = Vec::new();
    for (name, mut group) in groups {
        group.sort_by(|a, b| a.0.total_cmp(&b.0));
        match group.len() {
            1 => {
                let (time, field) = group.pop().expect("one entry");
                singles.push((name, time, field));
            }
            5 => {
                let h = group[1].0 - group[0].0;
                if h <= 0.0 {
                    return Err(usage(format!(
                        "field \"{name}\": snapshot times must be strictly increasing"
                    )));
                }
                for w in group.windows(2) {
                    if ((w[1].0 - w[0].0) - h).abs() > TIME_MATCH_TOL * h.max(1.0) {
                        return Err(usage(format!(
                            "field \"{name}\": snapshot times must be uniformly spaced \
                             for time differencing"
                        )));
                    }
                }
                let center = group[2].0;
                if let Some((c0, h0)) = stencil {
                    if (center - c0).abs() > TIME_MATCH_TOL * c0.abs().max(1.0)
                        || (h - h0).abs() > TIME_MATCH_TOL * h0.max(1.0)
                    {
                        return Err(usage(
                            "all five-snapshot groups must share the same times".to_string(),
                        ));
                    }
                } else {
                    stencil = Some((center, h));
                }
                let ddt =
                    time_derivative5(&group[0].1, &group[1].1, &group[3].1, &group[4].1, h)
                        .map_err(solver_error)?;
                fields.insert(format!("{name}_t"), ddt);
                fields.insert(name, group.swap_remove(2).1);
            }
            n => {
                return Err(usage(format!(
                    "field \"{name}\": supply exactly one snapshot (the field at the \
                     evaluation time) or five (for time differencing), got {n}"
                )));
            }
        }
    }
    if let Some((center, _)) = stencil {
        for (name, time, _) in &singles {
            if (time - center).abs() > TIME_MATCH_TOL * center.abs().max(1.0) {
                return Err(usage(format!(
                    "snapshot \"{name}\" is at t = {time} but the stencil evaluates at \
                     t = {center}"
                )));
            }
        }
    } else if let Some((_, t0, _)) = singles.first() {
        let t0 = *t0;
        for (name, time, _) in &singles {
            if (time - t0).abs() > TIME_MATCH_TOL * t0.abs().max(1.0) {
                return Err(usage(format!(
                    "snapshot \"{name}\" is at t = {time}, others at t = {t0}"
                )));
            }
        }
    }
    for (name, _, field) in singles {
        fields.insert(name, field);
    }

    let components = pde_residual(id, &fields, &EquationParams::default())
        .map_err(|e| usage(e.to_string()))?;
    let max_relative = system_relative(&components);
    let passed = max_relative.is_finite() && max_relative <= tol;
    let report = ResidualReport {
        meta: ReportMeta::now(started.elapsed().as_millis() as u64),
        equation: eq,
        files: files.iter().map(|p| p.display().to_string()).collect(),
        tolerance: tol,
        passed,
        max_relative,
        components: components
            .iter()
            .map(|c| ComponentNorms {
                name: c.name.clone(),
                l2: c.l2(),
                linf: c.linf(),
                relative: c.relative(),
            })
            .collect(),
    };
    let json = report.to_json().map_err(abort)?;
    print!("{json}");
    eprintln!(
        "residual {}: worst relative {max_relative:.3e} vs tolerance {tol:.1e} -> {}",
        report.equation,
        if passed { "pass" } else { "FAIL" }
    );
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_strings_parse_or_reject() {
        assert_eq!(parse_grid("256").unwrap(), vec![256]);
        assert_eq!(parse_grid("128,64").unwrap(), vec![128, 64]);
        assert!(matches!(parse_grid("128,x").unwrap_err(), CliError::Usage(_)));
        assert!(matches!(parse_grid("").unwrap_err(), CliError::Usage(_)));
    }

    #[test]
    fn equations_parse_by_catalog_name() {
        assert_eq!(parse_equation("nls").unwrap(), EquationId::Nls);
        assert_eq!(parse_equation("m1_spin").unwrap(), EquationId::M1Spin);
        assert!(matches!(parse_equation("bogus").unwrap_err(), CliError::Usage(_)));
    }

    #[test]
    fn pairings_are_validated() {
        assert!(scenario_plan("nls", "sech_soliton").is_ok());
        assert!(scenario_plan("kp", "line_soliton").is_ok());
        assert!(matches!(
            scenario_plan("nls", "line_soliton").unwrap_err(),
            CliError::Usage(_)
        ));
        assert!(matches!(
            scenario_plan("kp", "plane_wave").unwrap_err(),
            CliError::Usage(_)
        ));
    }

    #[test]
    fn config_files_reject_unknown_keys() {
        let ok: ConfigFile = serde_json::from_str(r#"{"suite": "lax", "seed": 3}"#).unwrap();
        assert_eq!(ok.suite.as_deref(), Some("lax"));
        assert_eq!(ok.seed, Some(3));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"sute": "lax"}"#).is_err());
    }

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(usage("x").code(), EXIT_USAGE);
        assert_eq!(abort("x").code(), EXIT_ABORT);
        let bad = SolverError::BadConfig { context: "t", detail: "d".into() };
        assert_eq!(solver_error(bad).code(), EXIT_USAGE);
        let blow = SolverError::Blowup { equation: "e", t: 0.0, detail: "d".into() };
        assert_eq!(solver_error(blow).code(), EXIT_ABORT);
    }
}
