//! Per-metric feed-forward regression heads.
//!
//! Each head maps the concatenation of two pooled article embeddings to a
//! similarity in (0, 1) through two ReLU hidden layers and a logistic
//! output. Training is per-example SGD with classical momentum on squared
//! error.

mod checkpoint;
mod head;
mod train;

pub use checkpoint::Checkpoint;
pub use head::{
    init_head, init_head_with, sgd_momentum_step, Dense, Gradients, MomentumState, RegressionHead,
    DEFAULT_HIDDEN,
};
pub use train::{mse_loss, train, Example, MetricModelSet, TrainConfig};
