//! Run configuration: strict TOML schema, flag overrides, and the
//! resolved-config echo.
//!
//! A config file holds one section per subcommand. Unknown keys are
//! rejected outright. Command-line flags override file values field by
//! field, defaults fill the rest, and the fully resolved configuration is
//! written next to the outputs so any run can be reproduced from its own
//! echo.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tipscan_core::ensemble::FitAggregation;
use tipscan_core::extremes::Tail;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_model: Option<ScanModelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_data: Option<ScanDataSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rescale: Option<RescaleSection>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config '{}'", path.display()))?;
        let file: ConfigFile = toml::from_str(&text)
            .with_context(|| format!("invalid config '{}'", path.display()))?;
        if let Some(v) = &file.schema_version {
            if v != SCHEMA_VERSION {
                bail!("unsupported schema_version '{v}' (expected '{SCHEMA_VERSION}')");
            }
        }
        Ok(file)
    }

    /// Write a resolved single-section echo.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).context("cannot serialize resolved config")?;
        std::fs::write(path, text)
            .with_context(|| format!("cannot write '{}'", path.display()))?;
        Ok(())
    }
}

/// Model parameters as they appear in configs: one of the two toy models,
/// tagged by name. The swept parameter must be absent in scan configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSection {
    Shear {
        mu: f64,
        nu: f64,
        dt: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        noise_u: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        laminar_threshold: Option<f64>,
    },
    DoubleWell {
        a: f64,
        dt: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<Tail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_extremes: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_escapes: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<FitAggregation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_extremes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDataSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_extremes: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSection {
    pub bin_length: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_extremes: Option<usize>,
}

/// `flag.or(file_value).unwrap_or(default)` for the common merge pattern.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`pick`] but without a default: the field is mandatory.
pub fn require<T>(flag: Option<T>, file: Option<T>, what: &str) -> Result<T> {
    flag.or(file)
        .with_context(|| format!("missing required parameter '{what}' (flag or config)"))
}
