use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use swipt_core::experiment::{aggregate, parse_config, run_experiment, write_csv, SweepKind};

/// Monte-Carlo secrecy-rate sweeps for the wireless-powered jammer system.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Flat `key = value` experiment description.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Overrides the sweep named in the config (qbar|p|d1|p_d1).
    #[arg(long)]
    sweep: Option<SweepKind>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(s) = cli.sweep {
        cfg.sweep = s;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    let rows = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = write_csv(&rows, &cli.out) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    println!("{:<16} {:>10} {:<9} {:>12} {:>10} {:>9}", "sweep", "value", "scheme", "mean_bits", "ci95", "feasible");
    for a in aggregate(&rows) {
        println!(
            "{:<16} {:>10} {:<9} {:>12.4} {:>10.4} {:>9.2}",
            a.sweep_name, a.sweep_value, a.scheme, a.mean_rate, a.ci_half_width, a.feasible_fraction
        );
    }
    eprintln!("wrote {} rows to {}", rows.len(), cli.out.display());
    ExitCode::SUCCESS
}
