//! Experiment configuration files.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use cpwalk::RateTable;
use serde::{Deserialize, Serialize};

/// Problems with the configuration; the binary exits with status 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("rate table {path}: {message}")]
    RateTable { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Validate,
    Simulate,
    RegenStats,
    Clt,
    Survival,
    Speed,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Validate => "validate",
            Kind::Simulate => "simulate",
            Kind::RegenStats => "regen-stats",
            Kind::Clt => "clt",
            Kind::Survival => "survival",
            Kind::Speed => "speed",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Kind::Validate => 1,
            Kind::Simulate => 2,
            Kind::RegenStats => 3,
            Kind::Clt => 4,
            Kind::Survival => 5,
            Kind::Speed => 6,
        }
    }
}

/// Initial environment of walk experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    Empty,
    Full,
    /// Upper equilibrium truncated at `equilibrium_time`.
    Equilibrium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub lambda: f64,
    /// Rate table file, relative to the configuration file.
    #[serde(default)]
    pub rate_table: Option<PathBuf>,
    /// Overrides the table's `Mprime`.
    #[serde(default)]
    pub mprime: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default = "default_environment")]
    pub environment: Environment,
    #[serde(default = "default_equilibrium_time")]
    pub equilibrium_time: f64,
    /// Explicit walk window `[left, right]`; sized from the rates when absent.
    #[serde(default)]
    pub window: Option<(i64, i64)>,
    /// Environment sites kept beyond the walker's reach.
    #[serde(default = "default_window_margin")]
    pub window_margin: u64,
}

fn default_environment() -> Environment {
    Environment::Equilibrium
}
fn default_equilibrium_time() -> f64 {
    10.0
}
fn default_window_margin() -> u64 {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    /// Horizons at which endpoints are read; the walk runs to the largest.
    pub horizons: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_validate_radius")]
    pub radius: u64,
    #[serde(default = "default_validate_horizon")]
    pub horizon: f64,
    #[serde(default = "default_validate_lambdas")]
    pub lambdas: Vec<f64>,
}

fn default_instances() -> usize {
    1000
}
fn default_validate_radius() -> u64 {
    20
}
fn default_validate_horizon() -> f64 {
    10.0
}
fn default_validate_lambdas() -> Vec<f64> {
    vec![0.5, 2.0]
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            instances: default_instances(),
            radius: default_validate_radius(),
            horizon: default_validate_horizon(),
            lambdas: default_validate_lambdas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurvivalSection {
    pub t_grid: Vec<f64>,
    #[serde(default = "default_survival_margin")]
    pub margin: f64,
}

fn default_survival_margin() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedSection {
    pub horizons: Vec<f64>,
}

/// Desk-scale overrides of the run parameters; absent values use the
/// literal scale formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegenSection {
    pub n: u32,
    #[serde(default)]
    pub burn_in: Option<f64>,
    #[serde(default)]
    pub stage1_radius: Option<u64>,
    #[serde(default)]
    pub stage1_gap: Option<usize>,
    #[serde(default)]
    pub stage3_radius: Option<u64>,
    #[serde(default)]
    pub stage3_gap: Option<usize>,
    #[serde(default)]
    pub inner_radius: Option<u64>,
    /// Mass constant; estimated from singleton survivors when absent.
    #[serde(default)]
    pub h1: Option<f64>,
    #[serde(default)]
    pub p_budget: Option<usize>,
    /// Independent `nu` samples for the density comparison.
    #[serde(default = "default_nu_samples")]
    pub nu_samples: usize,
    /// Renewal segments to build; zero skips the renewal sequence.
    #[serde(default)]
    pub renewal_segments: usize,
}

fn default_nu_samples() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<Kind>,
    pub seed: u64,
    pub replicas: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub model: ModelSection,
    #[serde(default)]
    pub walk: Option<WalkSection>,
    #[serde(default)]
    pub validate: Option<ValidateSection>,
    #[serde(default)]
    pub survival: Option<SurvivalSection>,
    #[serde(default)]
    pub speed: Option<SpeedSection>,
    #[serde(default)]
    pub regen: Option<RegenSection>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// A configuration with its rate table loaded.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub kind: Kind,
    /// Directory of the configuration file; relative paths resolve here.
    pub base_dir: PathBuf,
    pub tables: Option<RateTable>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

/// Reads, checks and completes a configuration for experiment `kind`.
pub fn load(path: &Path, kind: Kind) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config = ExperimentConfig::parse(&text, path)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    prepare(config, kind, base_dir)
}

/// Like [`load`], taking the kind from the file's `kind` key.
pub fn load_declared(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let kind = ExperimentConfig::parse(&text, path)?
        .kind
        .ok_or_else(|| ConfigError::Invalid(format!("{} has no `kind` key", path.display())))?;
    load(path, kind)
}

/// Checks an already parsed configuration.
pub fn prepare(config: ExperimentConfig, kind: Kind, base_dir: PathBuf) -> Result<LoadedConfig, ConfigError> {
    let invalid = |m: String| Err(ConfigError::Invalid(m));
    if let Some(k) = config.kind {
        if k != kind {
            return invalid(format!("file is for `{}`, not `{}`", k.name(), kind.name()));
        }
    }
    if config.replicas == 0 {
        return invalid("replicas must be at least 1".into());
    }
    let lambda = config.model.lambda;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return invalid(format!("lambda must be finite and non-negative, got {lambda}"));
    }
    let tables = match &config.model.rate_table {
        Some(rel) => {
            let path = base_dir.join(rel);
            let table = RateTable::load(&path).map_err(|e| ConfigError::RateTable {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let table = match config.model.mprime {
                Some(mp) => table.with_mprime(mp).map_err(|e| ConfigError::RateTable {
                    path: path.clone(),
                    message: e.to_string(),
                })?,
                None => table,
            };
            Some(table)
        }
        None => None,
    };
    if let (Some(m), Some(t)) = (config.model.m, &tables) {
        if !(m > t.mprime()) {
            return invalid(format!("M = {m} must exceed Mprime = {}", t.mprime()));
        }
    }
    let needs_tables = matches!(kind, Kind::Simulate | Kind::Clt | Kind::RegenStats);
    if needs_tables && tables.is_none() {
        return invalid(format!("`{}` needs model.rate_table", kind.name()));
    }
    let section = |present: bool, name: &str| {
        if present {
            Ok(())
        } else {
            Err(ConfigError::Invalid(format!("`{}` needs a [{name}] section", kind.name())))
        }
    };
    match kind {
        Kind::Simulate | Kind::Clt => {
            section(config.walk.is_some(), "walk")?;
            let walk = config.walk.as_ref().unwrap();
            if walk.horizons.is_empty() || walk.horizons.iter().any(|h| !(*h > 0.0)) {
                return invalid("walk.horizons must be positive and non-empty".into());
            }
            if kind == Kind::Clt && config.replicas < 2 {
                return invalid("clt needs at least 2 replicas".into());
            }
        }
        Kind::Survival => section(config.survival.is_some(), "survival")?,
        Kind::Speed => {
            section(config.speed.is_some(), "speed")?;
            if config.replicas < 2 {
                return invalid("speed needs at least 2 replicas".into());
            }
        }
        Kind::RegenStats => {
            section(config.regen.is_some(), "regen")?;
            if config.model.m.is_none() {
                return invalid("regen-stats needs model.m".into());
            }
        }
        Kind::Validate => {}
    }
    Ok(LoadedConfig {
        config,
        kind,
        base_dir,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 3
replicas = 4

[model]
lambda = 2.0

[survival]
t_grid = [1.0, 2.0]
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::parse(MINIMAL, Path::new("x.toml")).unwrap();
        assert_eq!(c.model.environment, Environment::Equilibrium);
        let again = ExperimentConfig::parse(&c.to_toml(), Path::new("y.toml")).unwrap();
        assert_eq!(again, c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::parse("seed = 1\nreplicas = 1\ncolour = 2\n[model]\nlambda = 1.0\n", Path::new("x")).is_err());
        let c = ExperimentConfig::parse(MINIMAL, Path::new("x.toml")).unwrap();
        assert!(prepare(ExperimentConfig { replicas: 0, ..c.clone() }, Kind::Survival, PathBuf::new()).is_err());
        assert!(prepare(c.clone(), Kind::Speed, PathBuf::new()).is_err(), "missing [speed]");
        assert!(prepare(c.clone(), Kind::Clt, PathBuf::new()).is_err(), "missing rate table");
        assert!(prepare(ExperimentConfig { kind: Some(Kind::Clt), ..c.clone() }, Kind::Survival, PathBuf::new()).is_err());
        assert!(prepare(c, Kind::Survival, PathBuf::new()).is_ok());
    }

    #[test]
    fn missing_rate_table_is_a_config_error() {
        let text = format!("{MINIMAL}\n");
        let mut c = ExperimentConfig::parse(&text, Path::new("x.toml")).unwrap();
        c.model.rate_table = Some(PathBuf::from("does/not/exist.txt"));
        assert!(matches!(prepare(c, Kind::Survival, PathBuf::new()), Err(ConfigError::RateTable { .. })));
    }
}
