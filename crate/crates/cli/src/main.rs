use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use simctl::{load, run_experiment, Kind, RunOptions};

/// Runs a contact-process random-walk experiment from a TOML configuration.
#[derive(Debug, Parser)]
#[command(name = "simctl", version)]
struct Cli {
    kind: Kind,
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the configuration.
    #[arg(long, env = "SIMCTL_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Output subdirectory name; defaults to `run-<unix seconds>`.
    #[arg(long)]
    label: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output root; overrides the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let loaded = match load(&cli.config, cli.kind) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("simctl: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        seed: cli.seed,
        replicas: cli.replicas,
        label: cli.label,
        workers: cli.workers,
        output: cli.output,
    };
    match run_experiment(&loaded, &opts) {
        Ok(summary) => {
            println!("{}", summary.directory.display());
            for e in &summary.artifacts.errors {
                eprintln!("replica {} (seed {}): {}", e.replica, e.seed, e.message);
            }
            if summary.failed() {
                eprintln!("simctl: {} finished with failures", cli.kind.name());
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("simctl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
