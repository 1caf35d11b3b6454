use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::head::{init_head_with, sgd_momentum_step, Gradients, MomentumState, RegressionHead};
use crate::error::{Error, Result};
use crate::metric::MetricKind;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Fixed epoch cap; there is no validation-based stopping.
    pub epochs: usize,
    pub seed: u64,
    #[serde(default = "default_shuffle")]
    pub shuffle: bool,
}

fn default_shuffle() -> bool {
    true
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { learning_rate: 0.01, momentum: 0.9, epochs: 8, seed, shuffle: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// One training pair: concatenated embeddings and a target in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<f64>,
    pub target: f64,
}

/// Mean of squared differences.
pub fn mse_loss(preds: &[f64], targets: &[f64]) -> Result<f64> {
    if preds.len() != targets.len() {
        return Err(Error::Argument(format!("{} predictions vs {} targets", preds.len(), targets.len())));
    }
    if preds.is_empty() {
        return Err(Error::Argument("mse of an empty series".into()));
    }
    let sum: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / preds.len() as f64)
}

fn dataset_mse(head: &RegressionHead, data: &[Example]) -> Result<f64> {
    let preds = data.iter().map(|e| head.forward(&e.input)).collect::<Result<Vec<_>>>()?;
    let targets: Vec<f64> = data.iter().map(|e| e.target).collect();
    mse_loss(&preds, &targets)
}

/// Per-example SGD with momentum for `config.epochs` epochs.
///
/// Example order is reshuffled every epoch from a generator seeded with
/// `config.seed`. Returns the training-set MSE measured after each epoch.
pub fn train(head: &mut RegressionHead, data: &[Example], config: &TrainConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(bad) = data.iter().find(|e| e.input.len() != head.input_dim) {
        return Err(Error::Dimension { expected: head.input_dim, actual: bad.input.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grads = Gradients::zeros_like(head);
    let mut state = MomentumState::new(head);
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            head.backward_into(&data[i].input, data[i].target, &mut grads)?;
            sgd_momentum_step(head, &grads, &mut state, config.learning_rate, config.momentum)?;
        }
        history.push(dataset_mse(head, data)?);
    }
    Ok(history)
}

/// The seven independent per-metric heads.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricModelSet {
    heads: BTreeMap<MetricKind, RegressionHead>,
}

impl MetricModelSet {
    /// Fresh heads; each metric gets its own seed derived from `seed`.
    pub fn init(input_dim: usize, hidden: [usize; 2], seed: u64) -> Self {
        let heads = MetricKind::ALL
            .into_iter()
            .enumerate()
            .map(|(i, m)| (m, init_head_with(m, input_dim, hidden, seed.wrapping_add(i as u64))))
            .collect();
        Self { heads }
    }

    pub fn from_heads(heads: impl IntoIterator<Item = RegressionHead>) -> Result<Self> {
        let heads: BTreeMap<_, _> = heads.into_iter().map(|h| (h.metric, h)).collect();
        if let Some(m) = MetricKind::ALL.into_iter().find(|m| !heads.contains_key(m)) {
            return Err(Error::NotFound(format!("{m} head")));
        }
        Ok(Self { heads })
    }

    pub fn head(&self, metric: MetricKind) -> &RegressionHead {
        &self.heads[&metric]
    }

    pub fn heads(&self) -> impl Iterator<Item = &RegressionHead> {
        self.heads.values()
    }

    /// Trains only the head of `metric`.
    pub fn train_metric(&mut self, metric: MetricKind, data: &[Example], config: &TrainConfig) -> Result<Vec<f64>> {
        let head = self.heads.get_mut(&metric).expect("all seven heads exist");
        train(head, data, config)
    }

    /// Trains all heads, concurrently when the `parallel` feature is on.
    /// Each head's training is deterministic on its own, so the result does
    /// not depend on scheduling.
    pub fn train_all(
        &mut self,
        data: &BTreeMap<MetricKind, Vec<Example>>,
        config: &TrainConfig,
    ) -> Result<BTreeMap<MetricKind, Vec<f64>>> {
        let mut jobs: Vec<(&mut RegressionHead, Result<Vec<f64>>)> =
            self.heads.values_mut().map(|h| (h, Ok(Vec::new()))).collect();
        par::for_each_mut(&mut jobs, |(head, out)| {
            *out = match data.get(&head.metric) {
                Some(d) => train(head, d, config),
                None => Err(Error::EmptyDataset),
            };
        });
        jobs.into_iter().map(|(h, r)| r.map(|hist| (h.metric, hist))).collect()
    }
}
