//! Sequential model-based hyperparameter search.
//!
//! Hyperparameters live in a box [`SearchSpace`] and are searched in its
//! normalised unit cube. After a random initial design, a Gaussian-process
//! surrogate of the validation loss picks each new trial by maximising
//! expected improvement; parallel batches use the constant-liar heuristic.

mod gp;
mod space;
mod tuner;

pub use gp::{
    expected_improvement, gp_fit, gp_predict, matern52, GpSurrogate, BASE_JITTER, LENGTHSCALE_GRID,
    NOISE_GRID,
};
pub use space::{Dimension, Scale, SearchSpace};
pub use tuner::{
    propose_batch, read_trial_log, tune, ProposalOptions, TrialRecord, TrialStatus, TuneOptions,
    TuneResult,
};
