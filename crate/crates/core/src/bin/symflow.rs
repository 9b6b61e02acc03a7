use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use symflow::config::RunConfig;
use symflow::fit::{fit_asymptotics, FitKind};
use symflow::flow::{RescaleKind, StopReason};
use symflow::runner::{self, CONFIG_FILE, DIAGNOSTICS_FILE};
use symflow::scenario::Preset;
use symflow::snapshot::Snapshot;
use symflow::spd::sol_limit_data_real;
use symflow::mat2::Mat2;
use symflow::verify::{verify_bounds, Check, Tolerances, ALL_CHECKS};
use symflow::FlowError;

const EXIT_VERIFY: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "symflow", version, about = "Ricci flow on warped products and torus bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its output directory.
    Run {
        /// Configuration file.
        config: Option<PathBuf>,
        /// Start from a preset instead of a file.
        #[arg(long, conflicts_with = "config")]
        preset: Option<Preset>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Print the resolved configuration and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Check the bounds and identities of a finished run.
    Verify {
        run_dir: PathBuf,
        /// Comma-separated check names; defaults to the run's configuration.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<Check>>,
        #[arg(long)]
        json: bool,
    },
    /// Fit an asymptotic law to a finished run.
    Fit {
        run_dir: PathBuf,
        #[arg(long)]
        kind: FitKind,
        /// Expected limit of L²/t; read from the gluing matrix when omitted.
        #[arg(long)]
        oracle_slope: Option<f64>,
    },
    /// Parabolically rescale a finished run into a new directory.
    Rescale {
        run_dir: PathBuf,
        #[arg(long)]
        factor: f64,
        #[arg(long)]
        kind: RescaleKind,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<FlowError>() {
        Some(
            FlowError::NonSpdMetric { .. }
            | FlowError::NonPositiveBase { .. }
            | FlowError::NonFinite { .. }
            | FlowError::NonPositiveProfile { .. }
            | FlowError::NotSpd
            | FlowError::StepUnderflow { .. }
            | FlowError::NoBlowup
            | FlowError::NegativeDensity { .. },
        ) => EXIT_NUMERICAL,
        Some(FlowError::InsufficientSamples(_)) => EXIT_VERIFY,
        _ => EXIT_CONFIG,
    }
}

fn load_config(run_dir: &Path) -> anyhow::Result<Option<RunConfig>> {
    let path = run_dir.join(CONFIG_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(RunConfig::parse(&text)?))
}

fn cmd_run(
    config: Option<PathBuf>,
    preset: Option<Preset>,
    output_dir: Option<PathBuf>,
    dump: bool,
) -> anyhow::Result<u8> {
    let mut cfg = match (config, preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text)?
        }
        (None, Some(p)) => RunConfig::preset(p),
        (None, None) => return Err(FlowError::Config("give a configuration file or --preset".into()).into()),
    };
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    if dump {
        print!("{}", cfg.to_text());
        return Ok(0);
    }
    let outcome = runner::execute(&cfg)?;
    runner::write_outputs(&outcome, &cfg.output_dir)?;
    let meta = &outcome.meta;
    println!(
        "{}: {} rows, stop {} (expected {}), output in {}",
        meta.scenario,
        outcome.records.len(),
        meta.stop_reason,
        meta.expected_stop,
        cfg.output_dir.display()
    );
    if let Some(p) = &outcome.profile {
        println!(
            "singularity: T ≈ {:.9}, (T−t)·max R in [{:.6}, {:.6}]",
            p.t_est, p.normalized_range.0, p.normalized_range.1
        );
    }
    if let Some(r) = &outcome.report {
        print!("{}", r.to_text());
    }
    if meta.stop_reason != meta.expected_stop {
        return Ok(if meta.stop_reason == StopReason::StepUnderflow { EXIT_NUMERICAL } else { EXIT_VERIFY });
    }
    Ok(if outcome.report.as_ref().is_none_or(|r| r.passed()) { 0 } else { EXIT_VERIFY })
}

fn cmd_verify(run_dir: &Path, checks: Option<Vec<Check>>, json: bool) -> anyhow::Result<u8> {
    let records = runner::read_diagnostics(&run_dir.join(DIAGNOSTICS_FILE))?;
    let meta = runner::read_meta(run_dir)?;
    let cfg = load_config(run_dir)?;
    let tol = cfg.as_ref().map_or_else(Tolerances::default, |c| c.verify.tolerances.clone());
    let checks = checks.or_else(|| cfg.map(|c| c.verify.checks)).unwrap_or_else(|| ALL_CHECKS.to_vec());
    let report = verify_bounds(&records, &meta, &checks, &tol)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.passed() { 0 } else { EXIT_VERIFY })
}

fn oracle_slope(run_dir: &Path) -> anyhow::Result<f64> {
    let snaps = runner::read_snapshot_file(run_dir)?;
    let Some(Snapshot::Bundle { twist, .. }) = snaps.first() else {
        return Err(FlowError::InvalidArgument("sol-power needs a bundle run".into()).into());
    };
    let lim = sol_limit_data_real(&Mat2::new(twist[0], twist[1], twist[2], twist[3]))?;
    Ok(lim.slope_conjugation_invariant)
}

fn cmd_fit(run_dir: &Path, kind: FitKind, oracle: Option<f64>) -> anyhow::Result<u8> {
    let records = runner::read_diagnostics(&run_dir.join(DIAGNOSTICS_FILE))?;
    let slope = match (kind, oracle) {
        (FitKind::SolPower, None) => Some(oracle_slope(run_dir)?),
        (_, s) => s,
    };
    let report = fit_asymptotics(&records, kind, slope)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.passed { 0 } else { EXIT_VERIFY })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { config, preset, output_dir, dump_config } => cmd_run(config, preset, output_dir, dump_config),
        Command::Verify { run_dir, checks, json } => cmd_verify(&run_dir, checks, json),
        Command::Fit { run_dir, kind, oracle_slope } => cmd_fit(&run_dir, kind, oracle_slope),
        Command::Rescale { run_dir, factor, kind, out } => {
            runner::rescale_outputs(&run_dir, &out, factor, kind).map(|_| 0).map_err(Into::into)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
