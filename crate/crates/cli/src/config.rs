//! Optional JSON project file. Command-line flags take precedence over its
//! fields; relative paths are resolved against the file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use elliptical_pareto::inference::LikelihoodKind;
use elliptical_pareto::numerics::QmcConfig;
use elliptical_pareto::simulate::RiskKind;
use elliptical_pareto::study::StudyConfig;
use elliptical_pareto::ParamVector;

use crate::error::{Classify, CliError, CliResult};

pub const DEFAULT_QUANTILE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskSpec {
    pub kind: RiskKind,
    /// Per-site thresholds u; a single value is broadcast.
    #[serde(default)]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectConfig {
    pub sites_file: Option<PathBuf>,
    pub data_file: Option<PathBuf>,
    pub threshold_quantile: Option<f64>,
    pub likelihood: Option<LikelihoodKind>,
    pub init: Option<ParamVector>,
    pub risk: Option<RiskSpec>,
    pub qmc: Option<QmcConfig>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub study: Option<StudyConfig>,
}

impl ProjectConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).config_err(format!("cannot read config {}", path.display()))?;
        let mut cfg: ProjectConfig = serde_json::from_str(&text).config_err(format!("{}: invalid config", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.sites_file, &mut cfg.data_file, &mut cfg.output_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in [&cfg.sites_file, &cfg.data_file].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::config(format!("{}: referenced file {} does not exist", path.display(), p.display())));
            }
        }
        if let Some(q) = cfg.threshold_quantile {
            check_quantile(q)?;
        }
        if let Some(qmc) = &cfg.qmc {
            qmc.validate().config_err(format!("{}: qmc settings", path.display()))?;
        }
        Ok(cfg)
    }
}

pub fn check_quantile(q: f64) -> CliResult<f64> {
    if q > 0.5 && q < 1.0 {
        Ok(q)
    } else {
        Err(CliError::config(format!("threshold quantile {q} must lie in (0.5, 1)")))
    }
}

/// The flag if given, else the config value, else an error naming both.
pub fn required_path(flag: Option<PathBuf>, from_config: &Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    flag.or_else(|| from_config.clone()).ok_or_else(|| CliError::config(format!("--{name} is required (or set it in the config file)")))
}
