use std::path::Path;

use serde::{Deserialize, Serialize};

use super::head::{Dense, RegressionHead};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::metric::MetricKind;

/// On-disk form of one trained head. Floats are written in shortest
/// round-trip form, so reloaded heads predict bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub metric: MetricKind,
    pub input_dim: usize,
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Dense>,
    pub train_config: TrainConfig,
    pub loss_history: Vec<f64>,
}

impl Checkpoint {
    pub fn new(head: &RegressionHead, train_config: TrainConfig, loss_history: Vec<f64>) -> Self {
        Self {
            metric: head.metric,
            input_dim: head.input_dim,
            layer_sizes: head.layers.iter().map(|l| l.outputs).collect(),
            layers: head.layers.to_vec(),
            train_config,
            loss_history,
        }
    }

    pub fn head(&self) -> Result<RegressionHead> {
        let layers: [Dense; 3] = self
            .layers
            .clone()
            .try_into()
            .map_err(|v: Vec<Dense>| Error::Format(format!("checkpoint has {} layers, expected 3", v.len())))?;
        let head = RegressionHead { metric: self.metric, input_dim: self.input_dim, layers };
        head.validate()?;
        Ok(head)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(format!("checkpoint {}", path.display())))
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        Ok(serde_json::from_str(&text)?)
    }
}
