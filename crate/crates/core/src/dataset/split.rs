use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Activity, CustomerId};
use crate::error::{Error, Result};

/// Activity months visible to feature extraction.
pub const FEATURE_MONTHS: u8 = 6;

/// A customer-level partition into training and validation folds.
/// Both id lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSplit {
    pub train_ids: Vec<CustomerId>,
    pub valid_ids: Vec<CustomerId>,
    pub seed: u64,
}

impl DataSplit {
    pub fn is_train(&self, id: CustomerId) -> bool {
        self.train_ids.binary_search(&id).is_ok()
    }
}

/// Shuffles the sorted ids with a seeded Fisher-Yates pass and puts the first
/// `round(fraction * n)` into the training fold.
pub fn split_customers(ids: &[CustomerId], fraction: f64, seed: u64) -> Result<DataSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::argument(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    if ids.len() < 2 {
        return Err(Error::argument("need at least two customers to split"));
    }
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::argument("customer ids must be unique"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sorted.shuffle(&mut rng);
    let n_train = (fraction * sorted.len() as f64).round() as usize;
    let mut valid_ids = sorted.split_off(n_train);
    let mut train_ids = sorted;
    train_ids.sort_unstable();
    valid_ids.sort_unstable();
    Ok(DataSplit {
        train_ids,
        valid_ids,
        seed,
    })
}

/// Keeps activities with `month <= max_month`, preserving order.
pub fn restrict_activities(activities: &[Activity], max_month: u8) -> Vec<Activity> {
    activities
        .iter()
        .filter(|a| a.month <= max_month)
        .cloned()
        .collect()
}
