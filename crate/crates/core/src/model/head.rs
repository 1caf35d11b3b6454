use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricKind;

/// Hidden layer widths.
pub const DEFAULT_HIDDEN: [usize; 2] = [120, 84];

/// Logit bound; keeps the output strictly inside (0, 1) in f64.
const MAX_LOGIT: f64 = 36.0;

/// Fully connected layer, `weights` row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    fn same_shape(&self, other: &Dense) -> bool {
        self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.weights.len() == other.weights.len()
            && self.bias.len() == other.bias.len()
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.bias).map(|(row, b)| {
            row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b
        }));
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.bias)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

/// Three dense layers: `input_dim -> h1 -> h2 -> 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionHead {
    pub metric: MetricKind,
    pub input_dim: usize,
    pub layers: [Dense; 3],
}

/// Parameter-shaped gradient buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: [Dense; 3],
}

/// Velocity buffers for momentum SGD, zero-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub layers: [Dense; 3],
}

fn zeros_like(layers: &[Dense; 3]) -> [Dense; 3] {
    layers.each_ref().map(|l| Dense::zeros(l.inputs, l.outputs))
}

impl Gradients {
    pub fn zeros_like(head: &RegressionHead) -> Self {
        Self { layers: zeros_like(&head.layers) }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(Dense::params)
    }
}

impl MomentumState {
    pub fn new(head: &RegressionHead) -> Self {
        Self { layers: zeros_like(&head.layers) }
    }
}

/// Head with default hidden sizes.
pub fn init_head(metric: MetricKind, input_dim: usize, seed: u64) -> RegressionHead {
    init_head_with(metric, input_dim, DEFAULT_HIDDEN, seed)
}

/// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
pub fn init_head_with(metric: MetricKind, input_dim: usize, hidden: [usize; 2], seed: u64) -> RegressionHead {
    assert!(input_dim > 0 && hidden.iter().all(|&h| h > 0), "layer sizes must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer = |inputs: usize, outputs: usize| {
        let bound = 1.0 / (inputs as f64).sqrt();
        let mut d = Dense::zeros(inputs, outputs);
        d.weights.iter_mut().for_each(|w| *w = rng.random_range(-bound..=bound));
        d
    };
    let layers = [layer(input_dim, hidden[0]), layer(hidden[0], hidden[1]), layer(hidden[1], 1)];
    RegressionHead { metric, input_dim, layers }
}

fn relu(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z.clamp(-MAX_LOGIT, MAX_LOGIT)).exp())
}

/// Intermediate values of one forward pass.
struct Trace {
    z1: Vec<f64>,
    h1: Vec<f64>,
    z2: Vec<f64>,
    h2: Vec<f64>,
    out: f64,
}

impl RegressionHead {
    pub fn hidden_sizes(&self) -> [usize; 2] {
        [self.layers[0].outputs, self.layers[1].outputs]
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(Dense::params)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(Dense::params_mut)
    }

    pub fn n_params(&self) -> usize {
        self.params().count()
    }

    /// Checks layer chaining and that every parameter is finite.
    pub fn validate(&self) -> Result<()> {
        let [l1, l2, l3] = &self.layers;
        let chained = l1.inputs == self.input_dim && l2.inputs == l1.outputs && l3.inputs == l2.outputs && l3.outputs == 1;
        let sized = self.layers.iter().all(|l| l.weights.len() == l.inputs * l.outputs && l.bias.len() == l.outputs);
        if !chained || !sized {
            return Err(Error::Format(format!("{} head has inconsistent layer shapes", self.metric)));
        }
        if self.params().any(|p| !p.is_finite()) {
            return Err(Error::Format(format!("{} head has non-finite parameters", self.metric)));
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension { expected: self.input_dim, actual: x.len() });
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let [l1, l2, l3] = &self.layers;
        let mut z1 = Vec::with_capacity(l1.outputs);
        l1.affine(x, &mut z1);
        let mut h1 = z1.clone();
        relu(&mut h1);
        let mut z2 = Vec::with_capacity(l2.outputs);
        l2.affine(&h1, &mut z2);
        let mut h2 = z2.clone();
        relu(&mut h2);
        let z3 = l3.weights.iter().zip(&h2).map(|(w, v)| w * v).sum::<f64>() + l3.bias[0];
        Trace { z1, h1, z2, h2, out: sigmoid(z3) }
    }

    /// `sigmoid(W3 relu(W2 relu(W1 x + b1) + b2) + b3)`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.trace(x).out)
    }

    /// Gradients of `(forward(x) - target)^2` with respect to every
    /// parameter. ReLU's derivative at 0 is taken as 0.
    pub fn backward(&self, x: &[f64], target: f64) -> Result<Gradients> {
        let mut g = Gradients::zeros_like(self);
        self.backward_into(x, target, &mut g)?;
        Ok(g)
    }

    /// [`backward`](Self::backward) into a preallocated buffer; returns the
    /// squared error at `x`.
    pub fn backward_into(&self, x: &[f64], target: f64, grads: &mut Gradients) -> Result<f64> {
        self.check_input(x)?;
        let t = self.trace(x);
        let [_, l2, l3] = &self.layers;
        let [g1, g2, g3] = &mut grads.layers;

        let residual = t.out - target;
        let dz3 = 2.0 * residual * t.out * (1.0 - t.out);
        g3.bias[0] = dz3;
        for (g, h) in g3.weights.iter_mut().zip(&t.h2) {
            *g = dz3 * h;
        }

        let dz2: Vec<f64> = (0..l2.outputs)
            .map(|j| if t.z2[j] > 0.0 { l3.weights[j] * dz3 } else { 0.0 })
            .collect();
        for (j, &d) in dz2.iter().enumerate() {
            g2.bias[j] = d;
            for (g, h) in g2.weights[j * l2.inputs..(j + 1) * l2.inputs].iter_mut().zip(&t.h1) {
                *g = d * h;
            }
        }

        let n1 = l2.inputs;
        let mut dz1 = vec![0.0; n1];
        for (j, &d) in dz2.iter().enumerate() {
            if d != 0.0 {
                for (acc, w) in dz1.iter_mut().zip(&l2.weights[j * n1..(j + 1) * n1]) {
                    *acc += w * d;
                }
            }
        }
        for (i, d) in dz1.iter_mut().enumerate() {
            if t.z1[i] <= 0.0 {
                *d = 0.0;
            }
        }
        let n0 = self.input_dim;
        for (i, &d) in dz1.iter().enumerate() {
            g1.bias[i] = d;
            for (g, v) in g1.weights[i * n0..(i + 1) * n0].iter_mut().zip(x) {
                *g = d * v;
            }
        }
        Ok(residual * residual)
    }
}

/// Classical momentum: `v <- momentum * v + g; p <- p - lr * v`.
pub fn sgd_momentum_step(
    head: &mut RegressionHead,
    grads: &Gradients,
    state: &mut MomentumState,
    lr: f64,
    momentum: f64,
) -> Result<()> {
    for ((p, g), v) in head.layers.iter().zip(&grads.layers).zip(&state.layers) {
        if !p.same_shape(g) || !p.same_shape(v) {
            return Err(Error::Dimension { expected: p.weights.len(), actual: g.weights.len().min(v.weights.len()) });
        }
    }
    for ((p, g), v) in head.layers.iter_mut().zip(&grads.layers).zip(state.layers.iter_mut()) {
        for ((p, g), v) in p.params_mut().zip(g.params()).zip(v.params_mut()) {
            *v = momentum * *v + g;
            *p -= lr * *v;
        }
    }
    Ok(())
}
