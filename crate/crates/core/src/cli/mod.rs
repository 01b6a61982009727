//! The `spraylab` command-line driver: reads a TOML scenario, runs it over
//! seeded samples and writes NDJSON records plus a text summary.

pub mod config;
pub mod report;
pub mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use config::{ConfigError, Scenario, ScenarioConfig};
pub use report::{AggregateRecord, Check, CheckSummary, Comparison, ENGINE_VERSION};
pub use run::{run, ExitStatus, RunOutput};

#[derive(Debug, Parser)]
#[command(
    name = "spraylab",
    version,
    about = "Numerical checks for sprays and Finsler metrizability"
)]
pub struct Args {
    /// Scenario configuration (TOML).
    pub config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write NDJSON records here instead of the configured output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the configured number of samples.
    #[arg(long)]
    pub samples: Option<usize>,
}

/// Loads the config, applies command-line overrides, runs it and writes the
/// outputs. Returns the process exit code.
pub fn execute(args: &Args) -> i32 {
    let mut cfg = match ScenarioConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::ConfigError.code();
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.num_samples = samples;
    }
    if let Some(out) = &args.out {
        cfg.output_path = Some(out.clone());
    }
    let output = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::ConfigError.code();
        }
    };
    if let Err(e) = write_outputs(&cfg, &output) {
        eprintln!("error: {e}");
        return ExitStatus::ConfigError.code();
    }
    output.status.code()
}

fn write_outputs(cfg: &ScenarioConfig, output: &RunOutput) -> std::io::Result<()> {
    if let (Some(path), Some(csv)) = (&cfg.geodesics.csv_path, &output.csv) {
        std::fs::write(path, csv)?;
    }
    match &cfg.output_path {
        Some(path) => {
            std::fs::write(path, &output.ndjson)?;
            print!("{}", output.summary);
        }
        None => {
            std::io::stdout().write_all(output.ndjson.as_bytes())?;
            eprint!("{}", output.summary);
        }
    }
    Ok(())
}
