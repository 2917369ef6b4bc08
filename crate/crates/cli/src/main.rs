//! Scenario runner for the `mecshift` engine.
//!
//! Subcommands:
//! - `sweep`: evaluate the frequency shift / relaxation observables over a
//!   one-dimensional parameter grid, emitting CSV plus a side-car manifest
//!   from which the run can be reproduced byte-for-byte.
//! - `discharge`: per-pump-setting precession-frequency-vs-voltage lines and
//!   their pairwise intersections.
//! - `fid-fit`: nonlinear least-squares extraction of the free-induction
//!   decay parameters from a two-column CSV trace.
//! - `verify`: run the cross-module identity checks and report pass/fail.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 non-convergence,
//! 3 verification failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mecshift::fid::{self, FidError};
use mecshift::quantities::{load_config, Config};
use mecshift::sweep::{
    discharge_lines, rows_to_csv, run_section, run_sweep, sweep_manifest, DischargeModel,
    GridSpec, SweepAxis, SweepSpec,
};
use mecshift::verify::{verify, CheckStatus};

const EXIT_USAGE_IO: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mecshift",
    about = "Light-induced frequency shift and relaxation of ³He nuclear spin precession",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter axis and emit observables as CSV (+ manifest).
    Sweep(SweepArgs),
    /// Frequency-vs-discharge-voltage lines for several pump settings.
    Discharge(DischargeArgs),
    /// Fit the FID model to a two-column (time, signal) CSV trace.
    FidFit(FidFitArgs),
    /// Run the cross-module verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PumpFlag {
    On,
    Off,
}

#[derive(Args)]
struct SweepArgs {
    /// Configuration document (TOML); defaults apply when omitted. A sweep
    /// manifest is itself a valid configuration, so passing one re-runs it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Axis to vary: field | detuning | intensity | discharge.
    /// Falls back to the manifest [run] section when omitted.
    #[arg(long)]
    axis: Option<String>,
    /// Grid as min:max:count:lin|log (axis units: T, Hz, mW/cm², V).
    /// Falls back to the manifest [run] section when omitted.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Pump light on or off (off forces the light-shift fields to zero).
    #[arg(long, value_enum)]
    pump: Option<PumpFlag>,
    /// Seed echoed into the manifest (sweeps themselves are deterministic).
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when omitted. With -o FILE, the manifest is
    /// written next to it as FILE with extension `.manifest.toml`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DischargeArgs {
    /// Configuration document (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Discharge-voltage grid as min:max:count:lin|log [V].
    #[arg(long, default_value = "0.05:0.5:46:lin")]
    grid: String,
    /// JSON output path; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FidFitArgs {
    /// Two-column CSV trace: header row, then time_s,signal.
    input: PathBuf,
    /// Freeze a parameter at a value, e.g. --freeze s1=0 (repeatable;
    /// names: s0, f0, phi, t2, s1, t1).
    #[arg(long, value_name = "NAME=VALUE")]
    freeze: Vec<String>,
    /// JSON report path; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Configuration document (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON report path; a human-readable summary always goes to stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Errors that map to exit code 1 (usage / I/O / malformed input).
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are successful exits; anything else is usage.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE_IO,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Discharge(a) => cmd_discharge(&a),
        Command::FidFit(a) => cmd_fid_fit(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE_IO)
        }
    }
}

/// Load the configuration file, or the all-defaults configuration.
fn load(config: &Option<PathBuf>) -> Result<(Config, String), UsageError> {
    let text = match config {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| UsageError(format!("reading {}: {e}", p.display())))?,
        None => String::new(),
    };
    let cfg = load_config(&text)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok((cfg, text))
}

fn emit(out: &Option<PathBuf>, payload: &str) -> Result<(), UsageError> {
    match out {
        Some(p) => fs::write(p, payload)
            .map_err(|e| UsageError(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.toml")
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8, UsageError> {
    let (config, text) = load(&a.config)?;
    // Flags win; a manifest [run] section fills whatever was omitted.
    let recorded = run_section(&text)?;
    let axis: SweepAxis = match (&a.axis, &recorded) {
        (Some(s), _) => s.parse()?,
        (None, Some((axis, _, _))) => *axis,
        (None, None) => return Err(UsageError("--axis is required (no manifest [run] section to fall back on)".into())),
    };
    let grid: GridSpec = match (&a.grid, &recorded) {
        (Some(s), _) => s.parse()?,
        (None, Some((_, grid, _))) => *grid,
        (None, None) => return Err(UsageError("--grid is required (no manifest [run] section to fall back on)".into())),
    };
    let pump = match (a.pump, &recorded) {
        (Some(p), _) => p == PumpFlag::On,
        (None, Some((_, _, pump))) => *pump,
        (None, None) => true,
    };
    let spec = SweepSpec {
        config,
        axis,
        grid,
        pump,
    };
    let rows = run_sweep(&spec)?;
    let csv = rows_to_csv(axis, &rows);
    emit(&a.out, &csv)?;
    if let Some(out) = &a.out {
        let manifest = sweep_manifest(&spec, a.seed);
        fs::write(manifest_path(out), manifest)
            .map_err(|e| UsageError(format!("writing manifest: {e}")))?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed}/{} grid points failed to evaluate", rows.len());
        return Ok(EXIT_NO_CONVERGENCE);
    }
    Ok(0)
}

fn cmd_discharge(a: &DischargeArgs) -> Result<u8, UsageError> {
    let (config, _) = load(&a.config)?;
    let grid: GridSpec = a.grid.parse()?;
    let model = match &config.discharge {
        Some(m) => m.clone(),
        // documented default: extinction at 0.035 V, 1/T slope 3 s⁻¹/V
        None => DischargeModel::new(0.035, 3.0)?,
    };
    // Three pump settings: dark, the configured laser, and the configured
    // laser at 60% intensity — three distinct slopes, one common crossing.
    let mut settings = vec![config.laser.clone(); 3];
    settings[0].intensity = 0.0;
    settings[2].intensity *= 0.6;
    let analysis = discharge_lines(&model, &config, &settings, &grid.values())?;
    let mut payload = serde_json::to_string_pretty(&analysis)?;
    payload.push('\n');
    emit(&a.out, &payload)?;
    Ok(0)
}

/// Parameter order used throughout the fitter.
const PARAM_NAMES: [&str; 6] = ["s0", "f0", "phi", "t2", "s1", "t1"];

fn parse_freeze(specs: &[String]) -> Result<[Option<f64>; 6], UsageError> {
    let mut frozen = [None; 6];
    for s in specs {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--freeze '{s}' must be NAME=VALUE")))?;
        let idx = PARAM_NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| {
                UsageError(format!(
                    "unknown parameter '{name}' (expected one of {})",
                    PARAM_NAMES.join(", ")
                ))
            })?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|e| UsageError(format!("--freeze '{s}': {e}")))?;
        frozen[idx] = Some(v);
    }
    Ok(frozen)
}

fn cmd_fid_fit(a: &FidFitArgs) -> Result<u8, UsageError> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| UsageError(format!("reading {}: {e}", a.input.display())))?;
    let trace = fid::trace_from_csv(&text)?;
    let frozen = parse_freeze(&a.freeze)?;

    let mut guess = match fid::initial_guess(&trace) {
        Ok(g) => g,
        Err(FidError::NoPeak { ratio }) => {
            eprintln!("no spectral peak found (peak/floor ratio {ratio:.2})");
            return Ok(EXIT_NO_CONVERGENCE);
        }
        Err(e) => return Err(e.into()),
    };
    let mut arr = guess.to_array();
    let mut free = [true; 6];
    for i in 0..6 {
        if let Some(v) = frozen[i] {
            arr[i] = v;
            free[i] = false;
        }
    }
    guess = fid::FidParams::from_array(arr);

    let report = fid::fit_with_mask(&trace, &guess, &free)?;
    let mut payload = serde_json::to_string_pretty(&report)?;
    payload.push('\n');
    emit(&a.out, &payload)?;
    if !report.converged {
        eprintln!(
            "fit did not converge in {} iterations (residual rms {:.3e})",
            report.iterations, report.residual_rms
        );
        return Ok(EXIT_NO_CONVERGENCE);
    }
    eprintln!(
        "f0 = {:.6} Hz, T2 = {:.3} s ({} iterations, residual rms {:.3e})",
        report.params.f0, report.params.t2, report.iterations, report.residual_rms
    );
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8, UsageError> {
    let (config, _) = load(&a.config)?;
    let report = verify(&config);
    let mut summary = String::new();
    for c in &report.checks {
        let tag = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Warn => "WARN",
            CheckStatus::Fail => "FAIL",
        };
        let _ = writeln!(
            summary,
            "{tag}  {:<24} err {:.3e} (tol {:.1e})  {}",
            c.name, c.measured_error, c.tolerance, c.detail
        );
    }
    print!("{summary}");
    if let Some(out) = &a.out {
        let mut payload = serde_json::to_string_pretty(&report)?;
        payload.push('\n');
        fs::write(out, payload).map_err(|e| UsageError(format!("writing {}: {e}", out.display())))?;
    }
    if report.passed {
        Ok(0)
    } else {
        Ok(EXIT_VERIFY_FAILED)
    }
}
