//! The JSON model document.
//!
//! Documents are written canonically: keys sorted, floats rounded to 9
//! significant digits and printed in shortest form, two-space indentation,
//! trailing newline. Reading and re-writing a canonical document reproduces
//! it byte for byte.

use std::path::Path;

use blockfade::markov::{RateTable, Transition};
use blockfade::synthesis::{BlockageModel, DrawCoupling};
use blockfade::{AttenuationModel, DistributionFit, StateModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub hpbw_deg: f64,
    pub kind: StateModel,
    pub sample_interval_s: f64,
    pub rates: Vec<Transition>,
    pub fits: Fits,
    pub attenuation_model: Option<AttenuationModel>,
    #[serde(default)]
    pub coupling: DrawCoupling,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fits {
    pub t_d_ms: DistributionFit,
    pub se_mean_db: DistributionFit,
    pub r_decay_db_per_ms: DistributionFit,
    pub r_rise_db_per_ms: DistributionFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// SHA-256 of the input files the model was fitted from.
    pub source_sha256: Option<String>,
    pub tool_version: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(source_sha256: Option<String>, seed: Option<u64>) -> Self {
        Self {
            source_sha256,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }
}

impl ModelFile {
    pub fn from_model(model: &BlockageModel, provenance: Provenance) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            hpbw_deg: model.hpbw_deg,
            kind: model.state_model(),
            sample_interval_s: model.rate_table.sample_interval_used,
            rates: model.rate_table.transitions(),
            fits: Fits {
                t_d_ms: model.dist_t_d,
                se_mean_db: model.dist_se_mean,
                r_decay_db_per_ms: model.dist_r_decay,
                r_rise_db_per_ms: model.dist_r_rise,
            },
            attenuation_model: model.attenuation_model,
            coupling: model.coupling,
            provenance,
        }
    }

    pub fn to_model(&self) -> Result<BlockageModel, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Invalid(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if !(self.sample_interval_s > 0.0) {
            return Err(CliError::Invalid(format!("sample_interval_s must be > 0, got {}", self.sample_interval_s)));
        }
        let rate_table = RateTable::from_transition_list(self.kind, self.sample_interval_s, &self.rates)?;
        if let Some(a) = self.attenuation_model {
            AttenuationModel::new(a.b)?;
        }
        let model = BlockageModel {
            hpbw_deg: self.hpbw_deg,
            rate_table,
            dist_t_d: self.fits.t_d_ms,
            dist_se_mean: self.fits.se_mean_db,
            dist_r_decay: self.fits.r_decay_db_per_ms,
            dist_r_rise: self.fits.r_rise_db_per_ms,
            attenuation_model: self.attenuation_model,
            coupling: self.coupling,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("model file: {e}")))?;
        file.to_model()?;
        Ok(file)
    }

    pub fn to_canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("model file serializes");
        canonicalize(&mut value);
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_canonical_json()).map_err(|e| CliError::io(path, e))
    }
}

/// Rounds every float to 9 significant digits. Keys are already sorted
/// because `serde_json::Map` is ordered.
fn canonicalize(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = n.as_f64().unwrap_or(0.0);
            if let Some(r) = serde_json::Number::from_f64(round_sig9(v)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

pub fn round_sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

/// Hex SHA-256 over the concatenated contents of `paths`.
pub fn sha256_of_files(paths: &[&Path]) -> Result<String, CliError> {
    let mut hasher = Sha256::new();
    for path in paths {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        hasher.update(&bytes);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
