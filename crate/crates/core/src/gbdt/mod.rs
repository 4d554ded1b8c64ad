//! Second-order gradient boosting over regression trees.
//!
//! Each round fits a tree to the gradient and hessian of the loss at the
//! current raw scores; leaves take the L2-regularised Newton step and the
//! tree output is added with shrinkage `eta`. Splits are found by exact
//! greedy enumeration and trees grow level by level to `max_depth`.

use crate::error::{Error, Result};
use crate::kv::KeyValues;

mod loss;
mod model;
mod tree;

pub use loss::{grad_hess, Loss};
pub use model::{
    feature_importance, load_model, predict, save_model, train, train_with_trace, GbdtModel,
    TrainingTrace, MODEL_VERSION,
};
pub use tree::{find_best_split, leaf_weight, split_gain, Split, SplitParams, TreeNode};

/// Boosting hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperConfig {
    pub n_trees: usize,
    pub eta: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub lambda_l2: f64,
    /// Share of rows each tree is fit on, in (0, 1].
    pub subsample: f64,
    /// Share of columns each tree may split on, in (0, 1].
    pub colsample: f64,
    /// Scales the class-ratio positive weight of the logistic loss.
    pub pos_weight_multiplier: f64,
    pub seed: u64,
}

impl Default for HyperConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            eta: 0.1,
            max_depth: 6,
            min_child_weight: 1.0,
            lambda_l2: 1.0,
            subsample: 1.0,
            colsample: 1.0,
            pos_weight_multiplier: 1.0,
            seed: 0,
        }
    }
}

const KEYS: [&str; 9] = [
    "n_trees",
    "eta",
    "max_depth",
    "min_child_weight",
    "lambda_l2",
    "subsample",
    "colsample",
    "pos_weight_multiplier",
    "seed",
];

impl HyperConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::argument(m));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return fail(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return fail(format!("min_child_weight must be non-negative, got {}", self.min_child_weight));
        }
        if !(self.lambda_l2 >= 0.0 && self.lambda_l2.is_finite()) {
            return fail(format!("lambda_l2 must be non-negative, got {}", self.lambda_l2));
        }
        for (name, v) in [("subsample", self.subsample), ("colsample", self.colsample)] {
            if !(v > 0.0 && v <= 1.0) {
                return fail(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if !(self.pos_weight_multiplier > 0.0 && self.pos_weight_multiplier.is_finite()) {
            return fail("pos_weight_multiplier must be positive".into());
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Missing keys keep their defaults.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.check_keys(&KEYS)?;
        let mut c = Self::default();
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = kv.get(stringify!($field))? { c.$field = v; })*
            };
        }
        take!(
            n_trees,
            eta,
            max_depth,
            min_child_weight,
            lambda_l2,
            subsample,
            colsample,
            pos_weight_multiplier,
            seed
        );
        c.validate()?;
        Ok(c)
    }

    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.insert("n_trees", self.n_trees);
        kv.insert("eta", self.eta);
        kv.insert("max_depth", self.max_depth);
        kv.insert("min_child_weight", self.min_child_weight);
        kv.insert("lambda_l2", self.lambda_l2);
        kv.insert("subsample", self.subsample);
        kv.insert("colsample", self.colsample);
        kv.insert("pos_weight_multiplier", self.pos_weight_multiplier);
        kv.insert("seed", self.seed);
        kv
    }
}
