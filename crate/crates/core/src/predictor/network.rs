//! Dense feed-forward network with a single sigmoid output unit.
//!
//! Weights are stored `inputs × outputs` so a batch forward pass is
//! `A_{l+1} = act(A_l · W_l + b_l)`. The loss is mean binary cross-entropy on
//! the output logit plus `alpha / (2·n) · Σ‖W‖²` (biases are not penalized).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        let Some(values) = z.as_slice_memory_order_mut() else {
            return z.mapv_inplace(|v| self.eval(v));
        };
        match self {
            Activation::Tanh => values.iter_mut().for_each(|v| *v = tanh(*v)),
            Activation::Relu => values.iter_mut().for_each(|v| *v = v.max(0.0)),
        }
    }

    fn eval(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => tanh(v),
            Activation::Relu => v.max(0.0),
        }
    }

    /// Multiplies `delta` by the derivative, expressed through the activation output.
    fn backprop(self, delta: &mut Array2<f64>, out: &Array2<f64>) {
        if !delta.is_standard_layout() {
            *delta = delta.as_standard_layout().into_owned();
        }
        let out = out.as_standard_layout();
        let d = delta.as_slice_mut().expect("standard layout");
        let o = out.as_slice().expect("standard layout");
        match self {
            Activation::Tanh => d.iter_mut().zip(o).for_each(|(d, &a)| *d *= 1.0 - a * a),
            Activation::Relu => d.iter_mut().zip(o).for_each(|(d, &a)| {
                if a <= 0.0 {
                    *d = 0.0
                }
            }),
        }
    }
}

/// `e^y` for `0 <= y <= 40`: range reduction by `ln 2` and a degree-12
/// Taylor polynomial. Branch-free so activation loops vectorize.
#[inline(always)]
fn exp_reduced(y: f64) -> f64 {
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // Adding 1.5·2^52 rounds to an integer that can be read back from the bits.
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    let t = y * std::f64::consts::LOG2_E + SHIFT;
    let k = t - SHIFT;
    let r = (y - k * LN2_HI) - k * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    for c in [
        1.0 / 39_916_800.0,
        1.0 / 3_628_800.0,
        1.0 / 362_880.0,
        1.0 / 40_320.0,
        1.0 / 5_040.0,
        1.0 / 720.0,
        1.0 / 120.0,
        1.0 / 24.0,
        1.0 / 6.0,
        0.5,
        1.0,
        1.0,
    ] {
        p = p * r + c;
    }
    let exponent = t.to_bits().wrapping_sub(SHIFT.to_bits()).wrapping_add(1023) << 52;
    p * f64::from_bits(exponent)
}

/// Hyperbolic tangent with absolute error below 1e-15, several times faster
/// than `f64::tanh` on a slice.
#[inline(always)]
fn tanh(x: f64) -> f64 {
    const SIGN: u64 = 1 << 63;
    let bits = x.to_bits();
    let a = f64::from_bits(bits & !SIGN);
    // tanh(20) rounds to 1.
    let a = if a > 20.0 { 20.0 } else { a };
    let e = exp_reduced(2.0 * a);
    f64::from_bits((1.0 - 2.0 / (e + 1.0)).to_bits() | (bits & SIGN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }
}

/// Parameter gradients, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Dense>,
    pub activation: Activation,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-[y·ln σ(z) + (1-y)·ln(1-σ(z))]`, evaluated without overflow.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl Network {
    /// Glorot-uniform initialization: every weight and bias of a layer is drawn
    /// from `±sqrt(6 / (fan_in + fan_out))`.
    pub fn init(inputs: usize, hidden: &[usize], activation: Activation, rng: &mut impl Rng) -> Network {
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(inputs);
        widths.extend_from_slice(hidden);
        widths.push(1);
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Dense {
                    weights: Array2::from_shape_simple_fn((fan_in, fan_out), || rng.gen_range(-bound..bound)),
                    biases: Array1::from_shape_simple_fn(fan_out, || rng.gen_range(-bound..bound)),
                }
            })
            .collect();
        Network { layers, activation }
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, Dense::inputs)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Layer outputs for a batch; the last entry holds the output logits.
    fn forward_all(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut outs: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let input = if l == 0 { x } else { outs[l - 1].view() };
            let mut z = input.dot(&layer.weights);
            z += &layer.biases;
            if l != last {
                self.activation.apply(&mut z);
            }
            outs.push(z);
        }
        outs
    }

    /// Output logits, one per row of `x`.
    pub fn logits(&self, x: ArrayView2<f64>) -> Array1<f64> {
        let outs = self.forward_all(x);
        outs.into_iter().last().expect("network has layers").column(0).to_owned()
    }

    pub fn probabilities(&self, x: ArrayView2<f64>) -> Array1<f64> {
        self.logits(x).mapv(sigmoid)
    }

    fn l2_penalty(&self, alpha: f64, n: usize) -> f64 {
        let sq: f64 = self.layers.iter().map(|l| l.weights.iter().map(|w| w * w).sum::<f64>()).sum();
        0.5 * alpha * sq / n as f64
    }

    /// Regularized mean loss over a batch.
    pub fn loss(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, alpha: f64) -> f64 {
        let n = x.nrows();
        let z = self.logits(x);
        let data: f64 = z.iter().zip(y.iter()).map(|(&z, &y)| bce_with_logit(z, y)).sum::<f64>() / n as f64;
        data + self.l2_penalty(alpha, n)
    }

    /// Loss and its gradient with respect to every weight and bias.
    pub fn loss_and_gradient(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, alpha: f64) -> (f64, Gradients) {
        let n = x.nrows();
        let nf = n as f64;
        let outs = self.forward_all(x);
        let logits = outs.last().expect("network has layers");

        let mut data_loss = 0.0;
        let mut delta = Array2::<f64>::zeros((n, 1));
        for ((d, &z), &t) in delta.iter_mut().zip(logits.column(0).iter()).zip(y.iter()) {
            data_loss += bce_with_logit(z, t);
            *d = (sigmoid(z) - t) / nf;
        }
        let loss = data_loss / nf + self.l2_penalty(alpha, n);

        let depth = self.layers.len();
        let mut gw = Vec::with_capacity(depth);
        let mut gb = Vec::with_capacity(depth);
        for l in (0..depth).rev() {
            let layer = &self.layers[l];
            let input = if l == 0 { x } else { outs[l - 1].view() };
            let mut w_grad = input.t().dot(&delta);
            w_grad.scaled_add(alpha / nf, &layer.weights);
            gw.push(w_grad);
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut next = delta.dot(&layer.weights.t());
                self.activation.backprop(&mut next, &outs[l - 1]);
                delta = next;
            }
        }
        gw.reverse();
        gb.reverse();
        (
            loss,
            Gradients {
                weights: gw,
                biases: gb,
            },
        )
    }

    /// All parameters, layer by layer: weights (row-major) then biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.biases.iter());
        }
        out
    }

    /// Inverse of [`Network::flatten`].
    pub fn set_flat(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count(), "parameter vector length");
        let mut at = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = params[at];
                at += 1;
            }
            for b in l.biases.iter_mut() {
                *b = params[at];
                at += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_chain_from_inputs_to_one_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Network::init(14, &[50, 100, 50], Activation::Tanh, &mut rng);
        let shapes: Vec<_> = net.layers.iter().map(|l| (l.inputs(), l.outputs())).collect();
        assert_eq!(shapes, [(14, 50), (50, 100), (100, 50), (50, 1)]);
        assert_eq!(net.param_count(), 14 * 50 + 50 + 50 * 100 + 100 + 100 * 50 + 50 + 50 + 1);
    }

    #[test]
    fn init_respects_glorot_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Network::init(14, &[50], Activation::Relu, &mut rng);
        let bound = (6.0f64 / 64.0).sqrt();
        assert!(net.layers[0].weights.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn tanh_matches_libm() {
        let mut worst = 0.0f64;
        for i in -400_000..=400_000 {
            let x = i as f64 * 5e-5;
            worst = worst.max((tanh(x) - x.tanh()).abs());
        }
        assert!(worst < 1e-15, "{worst:e}");
        assert_eq!(tanh(0.0), 0.0);
        assert_eq!(tanh(f64::INFINITY), 1.0);
        assert_eq!(tanh(-40.0), -1.0);
        assert!(tanh(f64::NAN).is_nan());
    }

    #[test]
    fn stable_cross_entropy() {
        assert!((bce_with_logit(0.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert!(bce_with_logit(800.0, 1.0).abs() < 1e-300);
        assert!((bce_with_logit(-800.0, 1.0) - 800.0).abs() < 1e-9);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    #[test]
    fn flatten_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Network::init(3, &[4], Activation::Tanh, &mut rng);
        let mut other = Network::init(3, &[4], Activation::Tanh, &mut rng);
        other.set_flat(&net.flatten());
        assert_eq!(net, other);
        let x = array![[0.1, 0.2, 0.3]];
        assert_eq!(net.logits(x.view()), other.logits(x.view()));
    }
}
