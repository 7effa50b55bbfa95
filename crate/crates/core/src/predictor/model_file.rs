//! Versioned JSON model files.
//!
//! ```json
//! {"format_version": 1,
//!  "config": {...},
//!  "layers": [{"inputs": 14, "outputs": 50, "weights": [[...], ...], "biases": [...]}, ...],
//!  "metadata": {...}}
//! ```
//!
//! `weights` has `inputs` rows of `outputs` values each.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::network::{Dense, Network};
use super::train::{TrainedModel, TrainingMetadata};
use super::{ModelConfig, PredictorError, FEATURES};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    inputs: usize,
    outputs: usize,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format_version: u64,
    config: ModelConfig,
    layers: Vec<LayerDoc>,
    metadata: TrainingMetadata,
}

fn corrupt(found: Option<u64>, detail: impl Into<String>) -> PredictorError {
    PredictorError::FormatVersion {
        found,
        detail: detail.into(),
    }
}

impl TrainedModel {
    pub fn to_json_string(&self) -> String {
        let doc = ModelDoc {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            layers: self
                .network
                .layers
                .iter()
                .map(|l| LayerDoc {
                    inputs: l.inputs(),
                    outputs: l.outputs(),
                    weights: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    biases: l.biases.to_vec(),
                })
                .collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string(&doc).expect("model serializes")
    }

    pub fn from_json_str(text: &str) -> Result<TrainedModel, PredictorError> {
        let value: Value = serde_json::from_str(text).map_err(|e| corrupt(None, e.to_string()))?;
        let version = value.get("format_version").and_then(Value::as_u64);
        if version != Some(FORMAT_VERSION) {
            return Err(corrupt(version, format!("expected format_version {FORMAT_VERSION}")));
        }
        let doc: ModelDoc = serde_json::from_value(value).map_err(|e| corrupt(version, e.to_string()))?;
        doc.config.validate().map_err(|e| corrupt(version, e.to_string()))?;

        let expected_widths: Vec<usize> = std::iter::once(FEATURES)
            .chain(doc.config.hidden_layers.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        if doc.layers.len() + 1 != expected_widths.len() {
            return Err(corrupt(version, "layer count does not match config"));
        }
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (k, l) in doc.layers.into_iter().enumerate() {
            if l.inputs != expected_widths[k] || l.outputs != expected_widths[k + 1] {
                return Err(corrupt(version, format!("layer {k} has shape {}x{}", l.inputs, l.outputs)));
            }
            if l.weights.len() != l.inputs || l.weights.iter().any(|r| r.len() != l.outputs) || l.biases.len() != l.outputs {
                return Err(corrupt(version, format!("layer {k} arrays disagree with its shape")));
            }
            let flat: Vec<f64> = l.weights.into_iter().flatten().collect();
            if flat.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(corrupt(version, format!("layer {k} has non-finite parameters")));
            }
            layers.push(Dense {
                weights: Array2::from_shape_vec((l.inputs, l.outputs), flat).expect("checked shape"),
                biases: Array1::from(l.biases),
            });
        }
        Ok(TrainedModel {
            network: Network {
                layers,
                activation: doc.config.activation,
            },
            config: doc.config,
            metadata: doc.metadata,
        })
    }
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<(), PredictorError> {
    fs::write(path, model.to_json_string()).map_err(|e| PredictorError::Io(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<TrainedModel, PredictorError> {
    let text = fs::read_to_string(path).map_err(|e| PredictorError::Io(format!("{}: {e}", path.display())))?;
    TrainedModel::from_json_str(&text)
}
