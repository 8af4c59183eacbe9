//! `bpm-isac` command line: seeded link simulations for the
//! beam-pattern-modulated ISAC transceiver.
//!
//! Exit status: 0 on success, 1 on usage or configuration errors, 2 when
//! validation checks fail, 3 on numerical failures inside a run.

use bpm_isac_sim::apep_curve::run_apep_curve;
use bpm_isac_sim::beamscan::run_beampattern;
use bpm_isac_sim::config::{ExperimentConfig, Scheme};
use bpm_isac_sim::output::{emit, records_to_csv, records_to_json, table_to_csv};
use bpm_isac_sim::runner::{run_ber_sweep, run_tradeoff_sweep, SweepOutcome};
use bpm_isac_sim::validate::run_validation;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bpm-isac",
    version,
    about = "Link-level simulator for beam-pattern-modulated ISAC over hybrid mmWave arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON mirror of the CSV records.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker thread count (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Channel realizations per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Transmission scheme: bpm, pbpm, or gbm.
    #[arg(long)]
    scheme: Option<String>,
    /// Place channel paths on the beamspace grid.
    #[arg(long = "on-grid")]
    on_grid: Option<bool>,
    /// SNR grid in dB: "start:step:stop" or a single value.
    #[arg(long)]
    snr: Option<String>,
    /// Comma-separated sensing-tolerance weights in [0, 1].
    #[arg(long)]
    mu: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Bit-error-rate sweep over the SNR grid.
    Ber {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sensing/communication trade-off versus the weight at one SNR.
    Tradeoff {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Normalized transmit beampattern over the angle grid.
    Beampattern {
        #[command(flatten)]
        common: CommonArgs,
        /// Which sensing direction to activate (slot into the sensing set).
        #[arg(long, default_value_t = 0)]
        sensing_slot: usize,
    },
    /// Analytic error-rate curve over the SNR grid.
    Apep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the built-in property checks and report machine-readable results.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(AppError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum AppError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<bpm_isac_core::Error> for AppError {
    fn from(e: bpm_isac_core::Error) -> Self {
        use bpm_isac_core::Error::*;
        match e {
            SingularMatrix | NonMonotoneObjective { .. } => AppError::Numerical(e.to_string()),
            _ => AppError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

fn run(cli: Cli) -> Result<ExitCode, AppError> {
    match cli.command {
        Command::Ber { common } => {
            let cfg = build_config(&common)?;
            let mu_list = parse_mu_list(&common, vec![cfg.optimizer.mu])?;
            if let Some(n) = common.threads {
                init_threads(n)?;
            }
            let ctx = cfg.context()?;
            let outcome = run_ber_sweep(&ctx, &mu_list)?;
            report_sweep(&outcome);
            write_records(&outcome, &common)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tradeoff { common } => {
            let cfg = build_config(&common)?;
            let default_mu: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
            let mu_list = parse_mu_list(&common, default_mu)?;
            if let Some(n) = common.threads {
                init_threads(n)?;
            }
            let snr_db = cfg.snr_grid_db.first().copied().unwrap_or(0.0);
            let ctx = cfg.context()?;
            let outcome = run_tradeoff_sweep(&ctx, &mu_list, snr_db)?;
            report_sweep(&outcome);
            write_records(&outcome, &common)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Beampattern {
            common,
            sensing_slot,
        } => {
            let cfg = build_config(&common)?;
            let mu_list = parse_mu_list(&common, vec![1.0])?;
            let ctx = cfg.context()?;
            let rows = run_beampattern(&ctx, mu_list[0], sensing_slot)?;
            emit(&table_to_csv("theta_rad,gain", &rows), common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Apep { common } => {
            let cfg = build_config(&common)?;
            let ctx = cfg.context()?;
            let rows = run_apep_curve(&ctx)?;
            emit(&table_to_csv("snr_db,apep", &rows), common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { common } => {
            let cfg = build_config(&common)?;
            if let Some(n) = common.threads {
                init_threads(n)?;
            }
            let ctx = cfg.context()?;
            let checks = run_validation(&ctx)?;
            let mut report = String::new();
            for check in &checks {
                report.push_str(&check.to_json_line());
                report.push('\n');
            }
            let all_pass = checks.iter().all(|c| c.pass);
            report.push_str(&format!(
                "{{\"overall\":\"{}\"}}\n",
                if all_pass { "pass" } else { "fail" }
            ));
            emit(&report, common.out.as_deref())?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

/// Defaults, then the config file, then flag overrides.
fn build_config(common: &CommonArgs) -> Result<ExperimentConfig, AppError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(scheme) = &common.scheme {
        cfg.scheme = Scheme::parse(scheme)?;
    }
    if let Some(on_grid) = common.on_grid {
        cfg.channel.on_grid = on_grid;
    }
    if let Some(snr) = &common.snr {
        cfg.snr_grid_db = parse_snr_grid(snr)?;
    }
    Ok(cfg)
}

/// "start:step:stop" inclusive grid, or one plain value.
fn parse_snr_grid(text: &str) -> Result<Vec<f64>, AppError> {
    let bad = || AppError::Usage(format!("cannot parse SNR grid '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![single.trim().parse::<f64>().map_err(|_| bad())?]),
        [start, step, stop] => {
            let start: f64 = start.trim().parse().map_err(|_| bad())?;
            let step: f64 = step.trim().parse().map_err(|_| bad())?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
            if step <= 0.0 || stop < start {
                return Err(bad());
            }
            let mut grid = Vec::new();
            let mut v = start;
            while v <= stop + 1e-9 {
                grid.push(v);
                v += step;
            }
            Ok(grid)
        }
        _ => Err(bad()),
    }
}

fn parse_mu_list(common: &CommonArgs, default: Vec<f64>) -> Result<Vec<f64>, AppError> {
    let Some(text) = &common.mu else {
        return Ok(default);
    };
    let mut out = Vec::new();
    for part in text.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| AppError::Usage(format!("cannot parse weight '{part}'")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(AppError::Usage(format!("weight {v} outside [0, 1]")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(AppError::Usage("empty weight list".into()));
    }
    Ok(out)
}

fn init_threads(n: usize) -> Result<(), AppError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| AppError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn report_sweep(outcome: &SweepOutcome) {
    for record in &outcome.records {
        eprintln!(
            "point snr={} dB scheme={} mu={}: ber={:.3e} ({}/{} bits), wall={:.2}s",
            record.snr_db,
            record.scheme,
            record.mu,
            record.ber,
            record.bit_errors,
            record.bits_sent,
            record.wall_time
        );
    }
    let frac = outcome.skipped_fraction();
    eprintln!(
        "trials: {} completed, {} skipped ({:.2}%)",
        outcome.trials_completed,
        outcome.trials_skipped,
        100.0 * frac
    );
}

fn write_records(outcome: &SweepOutcome, common: &CommonArgs) -> Result<(), AppError> {
    emit(&records_to_csv(&outcome.records), common.out.as_deref())?;
    if let Some(json_path) = &common.json {
        std::fs::write(json_path, records_to_json(&outcome.records))?;
    }
    Ok(())
}
