use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::train::{accuracy_of, train_refs};
use super::{design_matrix, ModelConfig, PredictionSample, PredictorError};

/// Seeded shuffle, then the first `round(fraction·n)` samples train and the
/// rest test. The train size is clamped to `1..=n-1` so neither side is empty.
pub fn split_dataset(
    samples: &[PredictionSample],
    fraction: f64,
    seed: u64,
) -> (Vec<PredictionSample>, Vec<PredictionSample>) {
    let n = samples.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut n_train = (fraction * n as f64).round() as usize;
    if n >= 2 {
        n_train = n_train.clamp(1, n - 1);
    } else {
        n_train = n_train.min(n);
    }
    let train = order[..n_train].iter().map(|&i| samples[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| samples[i].clone()).collect();
    (train, test)
}

/// Label-stratified fold assignment. Each label's indices are shuffled and
/// dealt round-robin; negatives continue where positives stopped, so fold
/// sizes differ by at most one overall and per label.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut out = vec![Vec::new(); folds];
    for (k, &i) in pos.iter().chain(neg.iter()).enumerate() {
        out[k % folds].push(i);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub mean_epochs: f64,
}

pub fn accuracy(model: &super::TrainedModel, samples: &[PredictionSample]) -> f64 {
    let refs: Vec<&PredictionSample> = samples.iter().collect();
    let (x, y) = design_matrix(&refs);
    accuracy_of(&model.network, x.view(), y.view())
}

/// k-fold cross-validation with label-stratified folds; each fold is held
/// out once while the model trains on the rest.
pub fn cross_validate(
    config: &ModelConfig,
    samples: &[PredictionSample],
    folds: usize,
    seed: u64,
) -> Result<CvReport, PredictorError> {
    config.validate()?;
    if folds < 2 || samples.len() < folds {
        return Err(PredictorError::TooFewSamples {
            samples: samples.len(),
            folds,
        });
    }
    let labels: Vec<bool> = samples.iter().map(|s| s.label).collect();
    let assignment = stratified_folds(&labels, folds, seed);
    let mut fold_accuracies = Vec::with_capacity(folds);
    let mut epochs = 0usize;
    let mut held_out = vec![false; samples.len()];
    for fold in &assignment {
        held_out.iter_mut().for_each(|h| *h = false);
        fold.iter().for_each(|&i| held_out[i] = true);
        let train: Vec<&PredictionSample> = samples
            .iter()
            .zip(&held_out)
            .filter(|(_, &h)| !h)
            .map(|(s, _)| s)
            .collect();
        let test: Vec<&PredictionSample> = fold.iter().map(|&i| &samples[i]).collect();
        let model = train_refs(config, &train)?;
        epochs += model.metadata.epochs_run;
        let (x, y) = design_matrix(&test);
        fold_accuracies.push(accuracy_of(&model.network, x.view(), y.view()));
    }
    Ok(CvReport {
        mean_accuracy: fold_accuracies.iter().sum::<f64>() / folds as f64,
        fold_accuracies,
        mean_epochs: epochs as f64 / folds as f64,
    })
}
