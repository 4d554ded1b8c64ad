//! Bank card usage prediction with geolocation-aware gradient boosting.
//!
//! The crate covers the whole modelling loop for two prediction tasks over
//! bank customers:
//!
//! * **Branch visits** (`task 1`): one Poisson-loss boosted tree model per
//!   branch predicts visit counts; the five branches with the highest
//!   predicted counts are submitted and scored with cosine@1 / cosine@5.
//! * **Credit card application** (`task 2`): a class-weighted logistic
//!   boosted tree model scored with ROC AUC.
//!
//! Modules, bottom-up:
//!
//! * [`dataset`] - entity records, CSV I/O, customer split, synthetic generator
//! * [`features`] - trajectory encoding, channel counts, distance and kNN features
//! * [`gbdt`] - second-order gradient boosting with exact greedy splits
//! * [`metrics`] - cosine@k, task-1 score, AUC, monitoring losses
//! * [`smbo`] - Gaussian-process hyperparameter search with constant-liar batches
//! * [`pipeline`] - per-branch training, top-5 selection, ensembling, ablation
//!
//! See the `examples/` directory of this crate for runnable walkthroughs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod features;
pub mod gbdt;
pub mod kv;
pub mod metrics;
pub mod pipeline;
pub mod smbo;

pub use error::{Error, Result};
