use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::validation::{cross_validate, CvReport};
use super::{Activation, LearningRate, ModelConfig, PredictionSample, PredictorError, Solver};

fn default_folds() -> usize {
    10
}

fn default_epochs() -> Vec<usize> {
    vec![500]
}

fn default_lr_init() -> f64 {
    1e-3
}

fn default_batch() -> usize {
    64
}

/// Hyperparameter values to combine. Enumeration order is hidden layers,
/// activation, solver, alpha, learning-rate schedule, then epoch budget, with
/// the last list varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub hidden_layer_sizes: Vec<Vec<usize>>,
    pub activation: Vec<Activation>,
    pub solver: Vec<Solver>,
    pub alpha: Vec<f64>,
    pub learning_rate: Vec<LearningRate>,
    #[serde(default = "default_epochs")]
    pub max_epochs: Vec<usize>,
    #[serde(default = "default_lr_init")]
    pub learning_rate_init: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
}

impl ParamGrid {
    /// The full published search space: 4 · 2 · 3 · 2 · 2 = 96 combinations.
    pub fn table_one() -> ParamGrid {
        ParamGrid {
            hidden_layer_sizes: vec![vec![50, 50, 50], vec![50, 100, 50], vec![100], vec![50, 50, 50, 50]],
            activation: vec![Activation::Tanh, Activation::Relu],
            solver: vec![Solver::Sgd, Solver::Adam, Solver::Lbfgs],
            alpha: vec![1e-4, 0.05],
            learning_rate: vec![LearningRate::Constant, LearningRate::Adaptive],
            max_epochs: default_epochs(),
            learning_rate_init: default_lr_init(),
            batch_size: default_batch(),
            folds: default_folds(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<ParamGrid, PredictorError> {
        serde_json::from_str(text).map_err(|e| PredictorError::InvalidConfig(format!("grid: {e}")))
    }

    pub fn len(&self) -> usize {
        self.hidden_layer_sizes.len()
            * self.activation.len()
            * self.solver.len()
            * self.alpha.len()
            * self.learning_rate.len()
            * self.max_epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every combination in enumeration order, all sharing `seed`.
    pub fn configs(&self, seed: u64) -> Vec<ModelConfig> {
        let mut out = Vec::with_capacity(self.len());
        for hidden in &self.hidden_layer_sizes {
            for &activation in &self.activation {
                for &solver in &self.solver {
                    for &alpha in &self.alpha {
                        for &learning_rate in &self.learning_rate {
                            for &max_epochs in &self.max_epochs {
                                out.push(ModelConfig {
                                    hidden_layers: hidden.clone(),
                                    activation,
                                    solver,
                                    alpha,
                                    learning_rate,
                                    learning_rate_init: self.learning_rate_init,
                                    batch_size: self.batch_size,
                                    max_epochs,
                                    seed,
                                    ..ModelConfig::default()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub config: ModelConfig,
    /// 0 when the combination failed to train.
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub mean_epochs: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub folds: usize,
    pub seed: u64,
    pub entries: Vec<GridEntry>,
    pub best_index: usize,
    pub best: ModelConfig,
    /// How each solver is realized, so results can be read honestly.
    pub solver_notes: Vec<String>,
}

/// The settings that actually influence training. L-BFGS is full batch with
/// its own step control, so its schedule, initial rate and batch size are
/// irrelevant and combinations differing only there train identically.
fn effective(config: &ModelConfig) -> ModelConfig {
    match config.solver {
        Solver::Lbfgs => ModelConfig {
            learning_rate: LearningRate::Constant,
            learning_rate_init: default_lr_init(),
            batch_size: default_batch(),
            ..config.clone()
        },
        Solver::Sgd | Solver::Adam => config.clone(),
    }
}

/// Cross-validates every combination and returns the one with the highest
/// mean accuracy; the earliest combination wins ties. Combinations run in
/// parallel and each is deterministic, so the report does not depend on
/// scheduling.
pub fn grid_search(grid: &ParamGrid, samples: &[PredictionSample], seed: u64) -> Result<GridReport, PredictorError> {
    if grid.is_empty() {
        return Err(PredictorError::EmptyGrid);
    }
    if grid.folds < 2 || samples.len() < grid.folds {
        return Err(PredictorError::TooFewSamples {
            samples: samples.len(),
            folds: grid.folds,
        });
    }
    let configs = grid.configs(seed);
    let mut distinct: Vec<ModelConfig> = Vec::new();
    let slots: Vec<usize> = configs
        .iter()
        .map(|c| {
            let e = effective(c);
            distinct.iter().position(|d| *d == e).unwrap_or_else(|| {
                distinct.push(e);
                distinct.len() - 1
            })
        })
        .collect();
    let results: Vec<Result<CvReport, PredictorError>> = distinct
        .par_iter()
        .map(|c| cross_validate(c, samples, grid.folds, seed))
        .collect();

    let entries: Vec<GridEntry> = configs
        .into_iter()
        .zip(slots)
        .map(|(config, slot)| match &results[slot] {
            Ok(cv) => GridEntry {
                config,
                mean_accuracy: cv.mean_accuracy,
                fold_accuracies: cv.fold_accuracies.clone(),
                mean_epochs: cv.mean_epochs,
                error: None,
            },
            Err(e) => GridEntry {
                config,
                mean_accuracy: 0.0,
                fold_accuracies: Vec::new(),
                mean_epochs: 0.0,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let mut best_index = 0;
    for (i, e) in entries.iter().enumerate() {
        if e.mean_accuracy > entries[best_index].mean_accuracy {
            best_index = i;
        }
    }
    Ok(GridReport {
        folds: grid.folds,
        seed,
        best: entries[best_index].config.clone(),
        best_index,
        entries,
        solver_notes: vec![
            format!("sgd: minibatch ({}) with Nesterov momentum 0.9", grid.batch_size),
            format!("adam: minibatch ({}), beta1 0.9, beta2 0.999", grid.batch_size),
            "lbfgs: full-batch L-BFGS, memory 10, backtracking Armijo line search; learning-rate settings \
             do not apply, so combinations differing only in them share one cross-validation run"
                .into(),
        ],
    })
}
