//! Diacritics restoration with an acausal temporal convolutional network.
//!
//! - [`corpus`]: diacritic tables, cleaning, splits, augmentation, batching.
//! - [`atcn`]: the network, restoration and the model file format.
//! - [`baselines`]: copy and dictionary restorers.
//! - [`metrics`]: accuracies, confusion matrix, ambiguity, error samples.
//! - [`trainer`]: the training loop and evaluation helpers.

pub mod atcn;
pub mod baselines;
pub mod corpus;
mod error;
pub mod metrics;
pub mod trainer;

pub use error::{DiacriticsError, Result};

/// Stream tags for [`nnkernel::rng::derive_seed`] paths.
pub(crate) mod seeds {
    pub const PARTITION: u64 = 1;
    pub const DRAWS: u64 = 2;
    pub const AUGMENT: u64 = 3;
    pub const DROPOUT: u64 = 4;
    pub const INIT: u64 = 5;
    pub const ERROR_SAMPLE: u64 = 6;
    pub const DROPOUT_STEP: u64 = 7;
    pub const EVAL_AUGMENT: u64 = 8;
}
