//! Minimal tensor kernel for acausal temporal convolutional networks.
//!
//! The kernel exposes exactly the operations a dilated, length-preserving
//! convolution stack needs for training and inference:
//!
//! - [`conv`]: acausal (centred) dilated 1D convolution with zero padding
//! - [`batchnorm`]: per-channel batch normalization over (batch, time)
//! - [`activation`]: ReLU and spatial (channel-wise) dropout
//! - [`embed`]: embedding lookup
//! - [`loss`]: masked softmax cross-entropy
//! - [`adam`]: the Adam optimizer
//!
//! Every differentiable op ships with an analytic backward pass; [`gradcheck`]
//! holds the central finite-difference checker used to validate them.
//!
//! # Layout
//!
//! Batched activations are stored row-major as `[batch × channels × n_max]`.
//! Each sequence `b` has a true length `lengths[b] <= n_max`; positions at or
//! beyond the true length are padding. All batched ops read only valid
//! positions and write zeros to padded ones, so padding never reaches a
//! valid output.
//!
//! All ops are generic over [`Scalar`] (`f32` for training and inference,
//! `f64` for gradient checks).

pub mod activation;
pub mod adam;
pub mod batchnorm;
pub mod conv;
pub mod embed;
mod error;
pub mod gradcheck;
pub mod loss;
pub mod rng;
mod scalar;
mod tensor;

pub use error::{KernelError, Result};
pub use scalar::{gemm, MatMut, MatRef, Scalar};
pub use tensor::Tensor;

/// Whether an op runs with training behaviour (batch statistics, dropout)
/// or inference behaviour (running statistics, no dropout).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Shape of a padded batch of sequences: `[batch × channels × n_max]` with
/// per-sequence valid lengths.
#[derive(Debug, Clone, Copy)]
pub struct SeqLayout<'a> {
    pub channels: usize,
    pub n_max: usize,
    pub lengths: &'a [usize],
}

impl<'a> SeqLayout<'a> {
    pub fn new(channels: usize, n_max: usize, lengths: &'a [usize]) -> Self {
        Self {
            channels,
            n_max,
            lengths,
        }
    }

    pub fn batch(&self) -> usize {
        self.lengths.len()
    }

    pub fn len(&self) -> usize {
        self.batch() * self.channels * self.n_max
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset of element `(b, c, 0)`.
    #[inline]
    pub fn row(&self, b: usize, c: usize) -> usize {
        (b * self.channels + c) * self.n_max
    }

    /// Number of valid (unpadded) positions over the whole batch.
    pub fn valid_positions(&self) -> usize {
        self.lengths.iter().sum()
    }

    pub(crate) fn check(&self, what: &str, len: usize) -> Result<()> {
        if self.lengths.iter().any(|&l| l > self.n_max) {
            return Err(KernelError::invalid(format!(
                "{what}: sequence length exceeds n_max {}",
                self.n_max
            )));
        }
        if len != self.len() {
            return Err(KernelError::shape(what, self.len(), len));
        }
        Ok(())
    }
}
