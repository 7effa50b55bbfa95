use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{sigmoid, Gradients, Network};
use super::{check_features, design_matrix, LearningRate, ModelConfig, Prediction, PredictionSample, PredictorError, Solver, FEATURES};

const MOMENTUM: f64 = 0.9;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const LBFGS_MEMORY: usize = 10;
/// L-BFGS also stops once the relative loss decrease of a single step falls
/// below this, the usual quasi-Newton default.
const LBFGS_FTOL: f64 = 2.220446049250313e-9;
/// Adaptive schedules halve the rate after this many non-improving epochs.
const ADAPTIVE_PATIENCE: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub epochs_run: usize,
    pub final_loss: f64,
    /// True when training stopped on the no-improvement rule rather than the epoch cap.
    pub converged: bool,
    pub train_samples: usize,
    pub train_accuracy: f64,
    #[serde(default)]
    pub test_accuracy: Option<f64>,
    #[serde(default)]
    pub loss_curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub network: Network,
    pub metadata: TrainingMetadata,
}

impl TrainedModel {
    pub fn predict_features(&self, features: &[f64]) -> Result<Prediction, PredictorError> {
        if self.network.input_width() != FEATURES {
            return Err(PredictorError::Shape {
                expected: FEATURES,
                found: self.network.input_width(),
            });
        }
        check_features(features)?;
        let x = ArrayView2::from_shape((1, FEATURES), features).expect("row of features");
        let logit = self.network.logits(x)[0];
        if logit.is_nan() {
            return Err(PredictorError::NonFiniteOutput);
        }
        let probability = sigmoid(logit);
        Ok(Prediction {
            probability,
            red_wins: probability > 0.5,
        })
    }

    /// Red-win probabilities for many samples at once.
    pub fn probabilities(&self, samples: &[PredictionSample]) -> Vec<f64> {
        let refs: Vec<&PredictionSample> = samples.iter().collect();
        let (x, _) = design_matrix(&refs);
        self.network.probabilities(x.view()).to_vec()
    }
}

/// Tracks the relative-improvement stopping rule and the adaptive schedule.
struct Convergence {
    best: f64,
    no_improvement: usize,
    stalled: usize,
    tol: f64,
    patience: usize,
}

impl Convergence {
    fn new(config: &ModelConfig) -> Self {
        Convergence {
            best: f64::INFINITY,
            no_improvement: 0,
            stalled: 0,
            tol: config.tol,
            patience: config.n_iter_no_change,
        }
    }

    /// Records an epoch loss; returns true once training should stop.
    fn observe(&mut self, loss: f64) -> bool {
        if self.best.is_finite() && loss > self.best - self.tol * self.best.abs() {
            self.no_improvement += 1;
            self.stalled += 1;
        } else {
            self.no_improvement = 0;
            self.stalled = 0;
        }
        self.best = self.best.min(loss);
        self.no_improvement >= self.patience
    }

    fn take_stall(&mut self) -> bool {
        if self.stalled >= ADAPTIVE_PATIENCE {
            self.stalled = 0;
            true
        } else {
            false
        }
    }
}

struct Minibatch {
    kind: Solver,
    lr: f64,
    step: i32,
    first: Gradients,
    second: Gradients,
}

fn zeros_like(net: &Network) -> Gradients {
    Gradients {
        weights: net.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
        biases: net.layers.iter().map(|l| Array1::zeros(l.biases.raw_dim())).collect(),
    }
}

impl Minibatch {
    fn new(kind: Solver, lr: f64, net: &Network) -> Self {
        Minibatch {
            kind,
            lr,
            step: 0,
            first: zeros_like(net),
            second: zeros_like(net),
        }
    }

    fn update(&mut self, net: &mut Network, grads: &Gradients) {
        self.step += 1;
        let lr = self.lr;
        let t = self.step;
        let adam_step = lr * (1.0 - BETA2.powi(t)).sqrt() / (1.0 - BETA1.powi(t));
        for (l, layer) in net.layers.iter_mut().enumerate() {
            let blocks = [
                (
                    flat_mut(layer.weights.as_slice_mut()),
                    flat_mut(self.first.weights[l].as_slice_mut()),
                    flat_mut(self.second.weights[l].as_slice_mut()),
                    grads.weights[l].as_slice().expect("standard layout"),
                ),
                (
                    flat_mut(layer.biases.as_slice_mut()),
                    flat_mut(self.first.biases[l].as_slice_mut()),
                    flat_mut(self.second.biases[l].as_slice_mut()),
                    grads.biases[l].as_slice().expect("standard layout"),
                ),
            ];
            for (p, m, v, g) in blocks {
                match self.kind {
                    // Nesterov momentum; `m` is the velocity.
                    Solver::Sgd => {
                        for ((p, m), &g) in p.iter_mut().zip(m.iter_mut()).zip(g) {
                            *m = MOMENTUM * *m - lr * g;
                            *p += MOMENTUM * *m - lr * g;
                        }
                    }
                    Solver::Adam => {
                        for (((p, m), v), &g) in p.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(g) {
                            *m = BETA1 * *m + (1.0 - BETA1) * g;
                            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                            *p -= adam_step * *m / (v.sqrt() + ADAM_EPS);
                        }
                    }
                    Solver::Lbfgs => unreachable!("L-BFGS is full batch"),
                }
            }
        }
    }
}

fn flat_mut(slice: Option<&mut [f64]>) -> &mut [f64] {
    slice.expect("standard layout")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn train_minibatch(
    config: &ModelConfig,
    net: &mut Network,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, bool), PredictorError> {
    let n = x.nrows();
    let batch = config.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut opt = Minibatch::new(config.solver, config.learning_rate_init, net);
    let mut conv = Convergence::new(config);
    let mut curve = Vec::new();
    for epoch in 0..config.max_epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            let xb = x.select(Axis(0), chunk);
            let yb = y.select(Axis(0), chunk);
            let (loss, grads) = net.loss_and_gradient(xb.view(), yb.view(), config.alpha);
            total += loss * chunk.len() as f64;
            opt.update(net, &grads);
        }
        let loss = total / n as f64;
        if !loss.is_finite() {
            return Err(PredictorError::Divergence { epoch });
        }
        curve.push(loss);
        if conv.observe(loss) {
            return Ok((curve, true));
        }
        if config.learning_rate == LearningRate::Adaptive && conv.take_stall() {
            opt.lr /= 2.0;
        }
    }
    Ok((curve, false))
}

/// Full-batch L-BFGS. One iteration counts as one epoch. Besides the shared
/// no-improvement rule it stops when every gradient component is within `tol`
/// of zero or a step barely lowers the loss.
fn train_lbfgs(
    config: &ModelConfig,
    net: &mut Network,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
) -> Result<(Vec<f64>, bool), PredictorError> {
    let eval = |net: &mut Network, params: &[f64]| {
        net.set_flat(params);
        let (loss, g) = net.loss_and_gradient(x, y, config.alpha);
        (loss, g.flatten())
    };
    let mut params = net.flatten();
    let (mut loss, mut grad) = eval(net, &params);
    let mut history: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    let mut conv = Convergence::new(config);
    let mut curve = Vec::new();

    for epoch in 0..config.max_epochs {
        if !loss.is_finite() {
            return Err(PredictorError::Divergence { epoch });
        }
        // Two-loop recursion for the quasi-Newton direction.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(yv).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, yv, _)) = history.back() {
            let gamma = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        } else {
            let norm = dot(&grad, &grad).sqrt().max(1e-12);
            q.iter_mut().for_each(|qi| *qi /= norm.max(1.0));
        }
        for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(yv, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut direction: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            history.clear();
            direction = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &direction);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = params.iter().zip(&direction).map(|(p, d)| p + step * d).collect();
            let (l, g) = eval(net, &trial);
            if l.is_finite() && l <= loss + 1e-4 * step * slope {
                accepted = Some((trial, l, g));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_loss, next_grad)) = accepted else {
            net.set_flat(&params);
            return Ok((curve, true));
        };
        let s: Vec<f64> = next.iter().zip(&params).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-10 {
            if history.len() == LBFGS_MEMORY {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        let decrease = (loss - next_loss) / loss.abs().max(next_loss.abs()).max(1.0);
        params = next;
        loss = next_loss;
        grad = next_grad;
        curve.push(loss);
        let flat = grad.iter().all(|g| g.abs() <= config.tol);
        if conv.observe(loss) || flat || decrease <= LBFGS_FTOL {
            net.set_flat(&params);
            return Ok((curve, true));
        }
    }
    net.set_flat(&params);
    Ok((curve, false))
}

pub(crate) fn accuracy_of(net: &Network, x: ArrayView2<f64>, y: ArrayView1<f64>) -> f64 {
    if x.nrows() == 0 {
        return 0.0;
    }
    let logits = net.logits(x);
    let correct = logits
        .iter()
        .zip(y.iter())
        .filter(|(&z, &t)| (sigmoid(z) > 0.5) == (t > 0.5))
        .count();
    correct as f64 / x.nrows() as f64
}

/// Fits a network to `train_set`. Identical inputs and seed give an identical model.
pub fn train(config: &ModelConfig, train_set: &[PredictionSample]) -> Result<TrainedModel, PredictorError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(PredictorError::EmptyTrainingSet);
    }
    for s in train_set {
        check_features(&s.features)?;
    }
    let refs: Vec<&PredictionSample> = train_set.iter().collect();
    train_refs(config, &refs)
}

pub(crate) fn train_refs(config: &ModelConfig, train_set: &[&PredictionSample]) -> Result<TrainedModel, PredictorError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(PredictorError::EmptyTrainingSet);
    }
    let (x, y) = design_matrix(train_set);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = Network::init(FEATURES, &config.hidden_layers, config.activation, &mut rng);
    let (curve, converged) = match config.solver {
        Solver::Lbfgs => train_lbfgs(config, &mut net, x.view(), y.view())?,
        Solver::Sgd | Solver::Adam => train_minibatch(config, &mut net, x.view(), y.view(), &mut rng)?,
    };
    let final_loss = curve.last().copied().unwrap_or_else(|| net.loss(x.view(), y.view(), config.alpha));
    let train_accuracy = accuracy_of(&net, x.view(), y.view());
    Ok(TrainedModel {
        config: config.clone(),
        network: net,
        metadata: TrainingMetadata {
            epochs_run: curve.len(),
            final_loss,
            converged,
            train_samples: train_set.len(),
            train_accuracy,
            test_accuracy: None,
            loss_curve: curve,
        },
    })
}
