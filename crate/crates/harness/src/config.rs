//! Experiment configuration.
//!
//! The file format is TOML. Every table rejects unknown keys so that a
//! misspelled hyperparameter is an error instead of a silent default.
//!
//! ```toml
//! seed = 20170601
//! monte_carlo_runs = 200
//! samples_per_run = 600
//! passes = 200                # passes over the training set (default 1)
//! recording = "per_pass"      # or "per_sample" (default)
//! snr_db = [10.0, 20.0, 30.0, 40.0]
//!
//! [metrics]                   # optional
//! tail_fraction = 0.25
//! margin_db = 1.0
//!
//! [plant]
//! coeffs = [0.9, 0.3, -0.1]
//!
//! [[algorithm]]
//! kind = "rvss-flms"          # "lms" | "flms" | "rvss-flms"
//! [algorithm.filter]
//! tap_count = 3
//! frac_order = 0.5
//! # ... every FilterConfig field
//! ```

use std::path::Path;

use fraclms::{Algorithm, FilterConfig, Recording};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub monte_carlo_runs: usize,
    pub samples_per_run: usize,
    #[serde(default = "default_passes")]
    pub passes: usize,
    #[serde(default = "default_recording")]
    pub recording: Recording,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    pub plant: PlantConfig,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmSpec>,
}

fn default_passes() -> usize {
    1
}

fn default_recording() -> Recording {
    Recording::PerSample
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    pub tail_fraction: f64,
    pub margin_db: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            tail_fraction: 0.25,
            margin_db: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub kind: Algorithm,
    pub filter: FilterConfig<f64>,
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|source| HarnessError::ConfigParse {
            path: origin.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Every violated invariant, each prefixed with where it occurs.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.monte_carlo_runs == 0 {
            out.push("monte_carlo_runs must be at least 1".to_string());
        }
        if self.passes == 0 {
            out.push("passes must be at least 1".to_string());
        }
        if self.snr_db.is_empty() {
            out.push("snr_db must list at least one level".to_string());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            out.push("snr_db entries must be finite".to_string());
        }
        for (i, a) in self.snr_db.iter().enumerate() {
            if self.snr_db[..i].contains(a) {
                out.push(format!("snr_db lists {a} more than once"));
            }
        }
        if !(self.metrics.tail_fraction > 0.0 && self.metrics.tail_fraction <= 1.0) {
            out.push(format!(
                "metrics.tail_fraction = {} must lie in (0, 1]",
                self.metrics.tail_fraction
            ));
        }
        if !(self.metrics.margin_db > 0.0 && self.metrics.margin_db.is_finite()) {
            out.push(format!(
                "metrics.margin_db = {} must be positive",
                self.metrics.margin_db
            ));
        }
        let plant_power: f64 = self.plant.coeffs.iter().map(|a| a * a).sum();
        if self.plant.coeffs.is_empty() || self.plant.coeffs.iter().any(|a| !a.is_finite()) {
            out.push("plant.coeffs must be non-empty and finite".to_string());
        } else if plant_power <= 0.0 {
            out.push("plant.coeffs must not all be zero".to_string());
        }
        if self.algorithms.is_empty() {
            out.push("at least one [[algorithm]] is required".to_string());
        }
        for (i, spec) in self.algorithms.iter().enumerate() {
            let label = spec.kind.label();
            if self.algorithms[..i].iter().any(|s| s.kind == spec.kind) {
                out.push(format!("algorithm {label} is listed more than once"));
            }
            let f = &spec.filter;
            out.extend(f.violations().into_iter().map(|v| format!("{label}: {v}")));
            if f.tap_count != self.plant.coeffs.len() {
                out.push(format!(
                    "{label}: tap_count = {} must equal the plant length {}",
                    f.tap_count,
                    self.plant.coeffs.len()
                ));
            }
            if self.samples_per_run < f.tap_count {
                out.push(format!(
                    "samples_per_run = {} must be at least tap_count = {} ({label})",
                    self.samples_per_run, f.tap_count
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Validation(v))
        }
    }

    /// Number of points on each learning curve.
    pub fn curve_len(&self) -> usize {
        match self.recording {
            Recording::PerSample => self.samples_per_run * self.passes,
            Recording::PerPass => self.passes,
        }
    }
}
