//! On-disk run and sweep configuration.
//!
//! Both documents are JSON with unknown keys rejected, so a typo fails
//! before any computation. Paths are resolved relative to the directory
//! containing the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mvfs::solver::SolverConfig;
use mvfs::{Error, Result};

/// Masking settings of a run: ratio and seed of the draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSettings {
    pub ratio: f64,
    pub seed: u64,
}

/// Clustering-evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSettings {
    /// Cluster count; defaults to the number of distinct labels.
    #[serde(default)]
    pub clusters: Option<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
}

pub fn default_restarts() -> usize {
    30
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            clusters: None,
            restarts: default_restarts(),
            seed: 0,
        }
    }
}

/// One `select` run: dataset manifest, optional mask draw, solver settings,
/// optional evaluation settings, output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub manifest: String,
    #[serde(default)]
    pub mask: Option<MaskSettings>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub evaluation: Option<EvalSettings>,
    pub output_dir: String,
}

/// A sweep: the Cartesian product of the parameter lists, run on one
/// dataset with per-cell masking and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfigFile {
    pub manifest: String,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub fractions: Vec<f64>,
    pub ratios: Vec<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub evaluation: EvalSettings,
    /// Master seed; per-cell mask seeds derive from it.
    #[serde(default)]
    pub seed: u64,
    pub output_dir: String,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Resolve `relative` against the directory containing `config_path`.
pub fn resolve(config_path: &Path, relative: &str) -> PathBuf {
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));
    base.join(relative)
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
