use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{Layout, SynthParams};
use crate::error::{Error, Result};
use crate::features::Feature;
use crate::model_selection::DEFAULT_FOLDS;
use crate::path_analysis::{Objective, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};

pub const DEFAULT_K_MAX: usize = 10;

/// Where the curves come from. Exactly one source per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        layout: Layout,
    },
    Synthetic(SynthParams),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResponseMode {
    /// `y_i = g(x_i)` with the configured feature.
    #[default]
    FromFeature,
    /// Named column of a headed CSV with one row per sample, in dataset order.
    CsvColumn { path: PathBuf, column: String },
}

/// A single case-study run. Relative paths resolve against the directory
/// of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSource,
    /// JSON split sidecar; when set, only the training rows are used.
    #[serde(default)]
    pub split: Option<PathBuf>,
    pub feature: Feature,
    #[serde(default)]
    pub response: ResponseMode,
    #[serde(default)]
    pub objective: Objective,
    /// Absolute λ bounds for the closest-point search. Default
    /// `[1e-10·s₁², 1e8·s₁²]`.
    #[serde(default)]
    pub lambda_range: Option<[f64; 2]>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Explicit CV λ grid. Default 60 log points over `[1e-8·s₁², 1e4·s₁²]`.
    #[serde(default)]
    pub cv_lambda_grid: Option<Vec<f64>>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub zscore: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("linfeat-out")
}

fn config_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        msg: msg.into(),
    }
}

impl RunConfig {
    /// Parses and validates a JSON config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde_json names the offending key in backticks
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("<document>")
                .to_owned();
            config_err(&field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let DataSource::Synthetic(p) = &self.data {
            if p.n == 0 || p.p == 0 {
                return Err(config_err("data.synthetic", "n and p must be positive"));
            }
            if p.rank == 0 || p.rank > p.n.min(p.p) {
                return Err(config_err(
                    "data.synthetic.rank",
                    "rank must be in 1..=min(n, p)",
                ));
            }
            if !(p.smoothness > 0.0 && p.smoothness.is_finite()) {
                return Err(config_err("data.synthetic.smoothness", "must be positive"));
            }
            if !(p.noise_std >= 0.0 && p.noise_std.is_finite()) {
                return Err(config_err(
                    "data.synthetic.noise_std",
                    "must be non-negative",
                ));
            }
        }
        self.feature
            .validate(None)
            .map_err(|e| config_err("feature", e.to_string()))?;
        if let Some([lo, hi]) = self.lambda_range {
            if !(lo >= 0.0 && hi.is_finite() && lo < hi) {
                return Err(config_err("lambda_range", "need 0 <= lo < hi"));
            }
        }
        if self.grid_points < MIN_GRID_POINTS {
            return Err(config_err(
                "grid_points",
                format!("must be at least {MIN_GRID_POINTS}"),
            ));
        }
        if let Some(grid) = &self.cv_lambda_grid {
            if grid.is_empty() || grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                return Err(config_err(
                    "cv_lambda_grid",
                    "must be a non-empty list of non-negative λ",
                ));
            }
        }
        if self.k_max == 0 {
            return Err(config_err("k_max", "must be at least 1"));
        }
        if self.folds < 2 {
            return Err(config_err("folds", "must be at least 2"));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path.to_path_buf(),
        }
    }
}
