//! The acausal temporal convolutional network: embedding, upsampling,
//! dilated residual blocks and a position-wise output projection.

mod config;
pub mod format;
mod forward;
mod model;
mod restore;
mod vocab;

pub use config::{AtcnConfig, UpsamplerKind};
pub use format::{Blob, FormatError};
pub use forward::ForwardCache;
pub use model::{AtcnModel, ConvLayer, ResidualBlock, Upsampler};
pub use restore::{capacity_for, Decoding, INITIAL_CAPACITY};
pub use vocab::{CharVocab, DEFAULT_MIN_COUNT, PAD, UNK};
