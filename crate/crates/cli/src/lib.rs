//! Experiment runner for the `cpwalk` engine.
//!
//! An experiment is a TOML file plus a kind. Replica `i` draws everything
//! from `split_seed(master, kind, i)` and results are merged in replica
//! order, so the artifacts do not depend on the worker count.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

pub use config::{load, load_declared, ConfigError, ExperimentConfig, Kind, LoadedConfig};
pub use experiments::Artifacts;
pub use output::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation: {0}")]
    Simulation(#[from] cpwalk::Error),
    #[error("{0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub label: Option<String>,
    /// Zero means one per available core.
    pub workers: usize,
    /// Replaces the configured output directory.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub artifacts: Artifacts,
    pub manifest: Manifest,
}

impl RunSummary {
    /// Replica errors or a failed check.
    pub fn failed(&self) -> bool {
        self.artifacts.violation || !self.artifacts.errors.is_empty()
    }
}

/// Applies the overrides to a loaded configuration.
pub fn effective_config(loaded: &LoadedConfig, opts: &RunOptions) -> Result<LoadedConfig, ConfigError> {
    let mut config = loaded.config.clone();
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    if let Some(r) = opts.replicas {
        config.replicas = r;
    }
    if let Some(o) = &opts.output {
        config.output = o.clone();
    }
    config.kind = Some(loaded.kind);
    config::prepare(config, loaded.kind, loaded.base_dir.clone())
}

/// Computes an experiment's artifacts without touching the disk.
pub fn compute(loaded: &LoadedConfig, workers: usize) -> Result<Artifacts, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    let ctx = experiments::Context {
        loaded,
        seed: loaded.config.seed,
        replicas: loaded.config.replicas,
    };
    pool.install(|| experiments::run(&ctx))
}

/// Runs the experiment and writes its output directory.
pub fn run_experiment(loaded: &LoadedConfig, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let loaded = effective_config(loaded, opts)?;
    let artifacts = compute(&loaded, opts.workers)?;
    let output = if loaded.config.output.is_relative() && opts.output.is_none() {
        std::env::current_dir()?.join(&loaded.config.output)
    } else {
        loaded.config.output.clone()
    };
    let directory = output::run_directory(&output, loaded.kind.name(), opts.label.as_deref());
    let digest = loaded.tables.as_ref().map(|t| t.digest());
    let manifest = output::write_artifacts(&directory, &artifacts, &loaded.config, loaded.kind.name(), digest)?;
    Ok(RunSummary {
        directory,
        artifacts,
        manifest,
    })
}
