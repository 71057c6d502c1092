//! JSON run configuration.

use std::path::{Path, PathBuf};

use qbessel_core::{QGrid, SumDomain, VParams};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_SERIES_TOL: f64 = 1e-17;
pub const DEFAULT_REPORT_PATH: &str = "verify_report.json";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub q: f64,
    pub alpha: f64,
    pub n_index: u32,
    #[serde(default)]
    pub n_min: Option<i32>,
    #[serde(default)]
    pub n_max: Option<i32>,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    #[serde(default)]
    pub report_path: Option<String>,
    #[serde(default)]
    pub nonnegative_only: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_series_tol() -> f64 {
    DEFAULT_SERIES_TOL
}

/// Window used when the config leaves `n_min`/`n_max` out.
pub fn default_window(q: f64) -> (i32, i32) {
    if q <= 0.6 {
        (-5, 60)
    } else if q < 0.85 {
        (-12, 150)
    } else {
        (-16, 200)
    }
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub config: Config,
    pub v: VParams,
    /// Full-window grid; Jackson sums run over every index.
    pub grid: QGrid,
    pub report_path: PathBuf,
}

impl Settings {
    pub fn from_config(config: Config) -> CliResult<Self> {
        let v = VParams::new(config.alpha, config.n_index)?;
        let (d_lo, d_hi) = default_window(config.q);
        let n_min = config.n_min.unwrap_or(d_lo);
        let n_max = config.n_max.unwrap_or(d_hi);
        let grid = QGrid::new(config.q, n_min, n_max)?;
        if !(config.series_tol > 0.0 && config.series_tol.is_finite()) {
            return Err(CliError::Validation(format!(
                "series_tol must be positive and finite, got {}",
                config.series_tol
            )));
        }
        let report_path = PathBuf::from(config.report_path.as_deref().unwrap_or(DEFAULT_REPORT_PATH));
        Ok(Self {
            config,
            v,
            grid,
            report_path,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let config: Config =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
        Self::from_config(config)
    }

    /// The grid whose Jackson sums follow `nonnegative_only`.
    pub fn domain(&self) -> SumDomain {
        if self.config.nonnegative_only {
            SumDomain::NonNegative
        } else {
            SumDomain::Lattice
        }
    }

    pub fn q(&self) -> f64 {
        self.grid.q()
    }
}
