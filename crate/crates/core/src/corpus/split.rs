use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PairRecord;
use crate::error::{Error, Result};

pub const DEFAULT_SPLIT_RATIO: f64 = 0.67;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub ratio: f64,
}

/// Seeded shuffle of the pair ids; the first `floor(ratio * n)` go to train.
pub fn split_dataset(pairs: &[PairRecord], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    split_ids(pairs.iter().map(|p| p.pair_id.clone()).collect(), ratio, seed)
}

pub(crate) fn split_ids(mut ids: Vec<String>, ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Range { value: ratio, range: "(0, 1)" });
    }
    if ids.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let n_train = (ratio * ids.len() as f64).floor() as usize;
    let test = ids.split_off(n_train);
    Ok(DatasetSplit { train: ids, test, seed, ratio })
}
