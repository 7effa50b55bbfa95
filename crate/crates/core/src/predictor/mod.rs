//! Match-winner prediction: a multi-layer perceptron over two alliances'
//! effectiveness vectors (14 features, red then blue) with a binary
//! "red won" target.

mod grid;
mod model_file;
mod network;
mod train;
mod validation;

use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicator::{IndicatorVector, TeamId, AXES};
use crate::ingest::{EventDataset, Winner};
use crate::stats::{ProfileSet, StatsError};

pub use grid::{grid_search, GridEntry, GridReport, ParamGrid};
pub use model_file::{load_model, save_model, FORMAT_VERSION};
pub use network::{Activation, Dense, Gradients, Network};
pub use train::{train, TrainedModel, TrainingMetadata};
pub use validation::{accuracy, cross_validate, split_dataset, stratified_folds, CvReport};

/// Two alliances' indicator vectors.
pub const FEATURES: usize = 2 * AXES;

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("feature {index} = {value} is not a normalized value")]
    InvalidFeature { index: usize, value: f64 },
    #[error("expected {expected} features, got {found}")]
    Shape { expected: usize, found: usize },
    #[error("loss became non-finite at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("model output is not a number")]
    NonFiniteOutput,
    #[error("{folds}-fold cross-validation needs at least {folds} samples, got {samples}")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("parameter grid has no combinations")]
    EmptyGrid,
    #[error("model file version {found:?} is not supported: {detail}")]
    FormatVersion { found: Option<u64>, detail: String },
    #[error("model file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Sgd,
    Adam,
    /// Full-batch limited-memory BFGS with a backtracking Armijo line search.
    Lbfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningRate {
    Constant,
    /// Halve the step size after two consecutive epochs without improvement.
    Adaptive,
}

fn default_lr_init() -> f64 {
    1e-3
}
fn default_batch() -> usize {
    64
}
fn default_epochs() -> usize {
    500
}
fn default_tol() -> f64 {
    1e-4
}
fn default_no_change() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub solver: Solver,
    /// L2 penalty.
    pub alpha: f64,
    pub learning_rate: LearningRate,
    #[serde(default = "default_lr_init")]
    pub learning_rate_init: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub max_epochs: usize,
    /// Minimum relative loss improvement that resets the no-change counter.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_no_change")]
    pub n_iter_no_change: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ModelConfig {
    /// The best configuration from the hyperparameter search: four hidden
    /// layers of 50, tanh, Adam, alpha 1e-4, constant learning rate.
    fn default() -> Self {
        ModelConfig {
            hidden_layers: vec![50, 50, 50, 50],
            activation: Activation::Tanh,
            solver: Solver::Adam,
            alpha: 1e-4,
            learning_rate: LearningRate::Constant,
            learning_rate_init: default_lr_init(),
            batch_size: default_batch(),
            max_epochs: default_epochs(),
            tol: default_tol(),
            n_iter_no_change: default_no_change(),
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), PredictorError> {
        let bad = |m: &str| Err(PredictorError::InvalidConfig(m.to_string()));
        if self.hidden_layers.iter().any(|&w| w == 0) {
            return bad("hidden layer widths must be at least 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha must be finite and non-negative");
        }
        if !(self.learning_rate_init.is_finite() && self.learning_rate_init > 0.0) {
            return bad("learning_rate_init must be positive");
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return bad("tol must be finite and non-negative");
        }
        if self.n_iter_no_change == 0 {
            return bad("n_iter_no_change must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSample {
    pub features: [f64; FEATURES],
    /// `true` when red won.
    pub label: bool,
}

impl PredictionSample {
    pub fn new(red: &IndicatorVector, blue: &IndicatorVector, label: bool) -> Self {
        PredictionSample {
            features: join_features(red, blue),
            label,
        }
    }

    pub fn red(&self) -> IndicatorVector {
        let mut v = [0.0; AXES];
        v.copy_from_slice(&self.features[..AXES]);
        IndicatorVector(v)
    }

    pub fn blue(&self) -> IndicatorVector {
        let mut v = [0.0; AXES];
        v.copy_from_slice(&self.features[AXES..]);
        IndicatorVector(v)
    }
}

pub fn join_features(red: &IndicatorVector, blue: &IndicatorVector) -> [f64; FEATURES] {
    let mut f = [0.0; FEATURES];
    f[..AXES].copy_from_slice(red.values());
    f[AXES..].copy_from_slice(blue.values());
    f
}

pub(crate) fn check_features(features: &[f64]) -> Result<(), PredictorError> {
    if features.len() != FEATURES {
        return Err(PredictorError::Shape {
            expected: FEATURES,
            found: features.len(),
        });
    }
    for (index, &value) in features.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(PredictorError::InvalidFeature { index, value });
        }
    }
    Ok(())
}

pub(crate) fn design_matrix(samples: &[&PredictionSample]) -> (Array2<f64>, ndarray::Array1<f64>) {
    let x = Array2::from_shape_fn((samples.len(), FEATURES), |(i, j)| samples[i].features[j]);
    let y = samples.iter().map(|s| if s.label { 1.0 } else { 0.0 }).collect();
    (x, y)
}

/// Samples joined from match results and robot profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub samples: Vec<PredictionSample>,
    pub ties_excluded: usize,
}

/// One sample per decided match: red effectiveness then blue, labelled by
/// whether red won. Tied matches are counted and dropped.
pub fn build_training_set(datasets: &[EventDataset], profiles: &ProfileSet) -> Result<TrainingSet, PredictorError> {
    let mut samples = Vec::new();
    let mut ties_excluded = 0;
    for ds in datasets {
        for m in &ds.matches {
            let red = profiles.effectiveness(&m.red_teams)?;
            let blue = profiles.effectiveness(&m.blue_teams)?;
            match m.winner {
                Winner::Tie => ties_excluded += 1,
                w => samples.push(PredictionSample::new(&red, &blue, w == Winner::Red)),
            }
        }
    }
    Ok(TrainingSet { samples, ties_excluded })
}

/// Teams that appear in `datasets` but have no profile.
pub fn missing_profiles(datasets: &[EventDataset], profiles: &ProfileSet) -> BTreeSet<TeamId> {
    datasets
        .iter()
        .flat_map(|d| d.matches.iter())
        .flat_map(|m| m.all_teams())
        .filter(|t| !profiles.profiles.contains_key(*t))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Probability that red wins.
    pub probability: f64,
    pub red_wins: bool,
}

/// Win probability for red against blue.
pub fn predict(model: &TrainedModel, red: &IndicatorVector, blue: &IndicatorVector) -> Result<Prediction, PredictorError> {
    model.predict_features(&join_features(red, blue))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_match_value;
    use crate::stats::{RawProfile, normalize_profiles};
    use serde_json::json;
    use std::collections::BTreeMap;

    fn profiles() -> ProfileSet {
        let raw: BTreeMap<TeamId, RawProfile> = (1..=6)
            .map(|i| {
                let v = i as f64;
                (
                    TeamId::new(i.to_string()),
                    RawProfile {
                        match_count: 1,
                        raw_means: IndicatorVector([v, v, v, v, v, -v, -v]),
                    },
                )
            })
            .collect();
        normalize_profiles(2019, &raw)
    }

    fn ds(results: &[(u32, u32)]) -> EventDataset {
        let matches = results
            .iter()
            .enumerate()
            .map(|(i, (r, b))| {
                parse_match_value(&json!({
                    "key": format!("2019tst_qm{i}"), "event_key": "2019tst",
                    "alliances": {
                        "red": {"team_keys": ["frc4", "frc5", "frc6"], "score": r},
                        "blue": {"team_keys": ["frc1", "frc2", "frc3"], "score": b}
                    },
                    "score_breakdown": {"red": {}, "blue": {}}
                }))
                .unwrap()
            })
            .collect();
        EventDataset {
            event_key: "2019tst".into(),
            year: 2019,
            matches,
            skipped: vec![],
        }
    }

    #[test]
    fn ties_are_dropped_and_labels_follow_winner() {
        let set = build_training_set(&[ds(&[(50, 10), (20, 20), (5, 30)])], &profiles()).unwrap();
        assert_eq!(set.ties_excluded, 1);
        assert_eq!(set.samples.len(), 2);
        assert!(set.samples[0].label);
        assert!(!set.samples[1].label);
        let p = profiles();
        let red = p.effectiveness(&[TeamId::new("4"), TeamId::new("5"), TeamId::new("6")]).unwrap();
        assert_eq!(set.samples[0].red(), red);
    }

    #[test]
    fn missing_profile_is_named() {
        let mut p = profiles();
        p.profiles.remove(&TeamId::new("5"));
        let err = build_training_set(&[ds(&[(1, 0)])], &p).unwrap_err();
        assert!(err.to_string().contains('5'), "{err}");
        assert_eq!(missing_profiles(&[ds(&[(1, 0)])], &p).len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        let c = ModelConfig {
            max_epochs: 0,
            ..ModelConfig::default()
        };
        assert!(c.validate().is_err());
        let c = ModelConfig {
            hidden_layers: vec![10, 0],
            ..ModelConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn feature_checks() {
        assert!(matches!(check_features(&[0.5; 13]), Err(PredictorError::Shape { found: 13, .. })));
        let mut f = [0.5; FEATURES];
        f[3] = 1.2;
        assert!(matches!(check_features(&f), Err(PredictorError::InvalidFeature { index: 3, .. })));
    }
}
