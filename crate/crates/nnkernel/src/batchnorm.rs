//! Per-channel batch normalization over the (batch, time) axes.
//!
//! Statistics are taken over valid positions only. Training uses the biased
//! batch variance for normalization and folds the unbiased variance into the
//! running estimate; evaluation is the fixed affine map given by the running
//! statistics.

use crate::{KernelError, Mode, Result, Scalar, SeqLayout, Tensor};

pub const DEFAULT_MOMENTUM: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormState<T> {
    pub gamma: Tensor<T>,
    pub beta: Tensor<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    pub momentum: T,
    pub epsilon: T,
}

/// Values saved by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache<T> {
    /// Normalized input `(x - mean) / sqrt(var + eps)`, zero at padding.
    pub x_hat: Vec<T>,
    pub inv_std: Vec<T>,
}

impl<T: Scalar> BatchNormState<T> {
    /// gamma = 1, beta = 0, running mean 0, running variance 1.
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Tensor::from_vec(vec![T::one(); channels], vec![channels])
                .expect("positive channel count"),
            beta: Tensor::zeros(vec![channels]),
            running_mean: vec![T::zero(); channels],
            running_var: vec![T::one(); channels],
            momentum: T::cast(DEFAULT_MOMENTUM),
            epsilon: T::cast(DEFAULT_EPSILON),
        }
    }

    pub fn channels(&self) -> usize {
        self.running_mean.len()
    }

    pub fn cast<U: Scalar>(&self) -> BatchNormState<U> {
        BatchNormState {
            gamma: self.gamma.cast(),
            beta: self.beta.cast(),
            running_mean: self.running_mean.iter().map(|x| U::cast(x.as_f64())).collect(),
            running_var: self.running_var.iter().map(|x| U::cast(x.as_f64())).collect(),
            momentum: U::cast(self.momentum.as_f64()),
            epsilon: U::cast(self.epsilon.as_f64()),
        }
    }

    fn check(&self, layout: &SeqLayout<'_>, len: usize) -> Result<()> {
        let c = self.channels();
        if layout.channels != c || self.gamma.len() != c || self.beta.len() != c || self.running_var.len() != c {
            return Err(KernelError::shape("batch norm channels", c, layout.channels));
        }
        layout.check("batch norm input", len)
    }

    /// Evaluation-mode forward; leaves the state untouched.
    pub fn forward_eval(&self, input: &[T], layout: SeqLayout<'_>, out: &mut [T]) -> Result<()> {
        self.check(&layout, input.len())?;
        layout.check("batch norm output", out.len())?;
        out.iter_mut().for_each(|x| *x = T::zero());
        for c in 0..layout.channels {
            let inv_std = T::one() / (self.running_var[c] + self.epsilon).sqrt();
            let scale = self.gamma.data()[c] * inv_std;
            let shift = self.beta.data()[c] - self.running_mean[c] * scale;
            for (b, &len) in layout.lengths.iter().enumerate() {
                let row = layout.row(b, c);
                for t in row..row + len {
                    out[t] = input[t] * scale + shift;
                }
            }
        }
        Ok(())
    }

    /// Batched forward pass over `[B × C × n_max]`. Returns the cache needed
    /// by [`BatchNormState::backward_batch`] in training mode.
    pub fn forward_batch(
        &mut self,
        mode: Mode,
        input: &[T],
        layout: SeqLayout<'_>,
        out: &mut [T],
    ) -> Result<Option<BatchNormCache<T>>> {
        self.check(&layout, input.len())?;
        layout.check("batch norm output", out.len())?;
        let channels = layout.channels;
        out.iter_mut().for_each(|x| *x = T::zero());
        match mode {
            Mode::Eval => {
                self.forward_eval(input, layout, out)?;
                Ok(None)
            }
            Mode::Train => {
                let count = layout.valid_positions();
                if count < 2 {
                    return Err(KernelError::invalid(format!(
                        "batch norm in training mode needs at least 2 valid positions per channel, got {count}"
                    )));
                }
                let n = T::cast(count as f64);
                let mut x_hat = vec![T::zero(); input.len()];
                let mut inv_stds = vec![T::zero(); channels];
                for c in 0..channels {
                    let mut sum = T::zero();
                    for (b, &len) in layout.lengths.iter().enumerate() {
                        let row = layout.row(b, c);
                        sum += input[row..row + len].iter().copied().sum();
                    }
                    let mean = sum / n;
                    let mut sq = T::zero();
                    for (b, &len) in layout.lengths.iter().enumerate() {
                        let row = layout.row(b, c);
                        for &x in &input[row..row + len] {
                            let d = x - mean;
                            sq += d * d;
                        }
                    }
                    let var = sq / n;
                    let inv_std = T::one() / (var + self.epsilon).sqrt();
                    inv_stds[c] = inv_std;
                    let (g, be) = (self.gamma.data()[c], self.beta.data()[c]);
                    for (b, &len) in layout.lengths.iter().enumerate() {
                        let row = layout.row(b, c);
                        for t in row..row + len {
                            let xh = (input[t] - mean) * inv_std;
                            x_hat[t] = xh;
                            out[t] = g * xh + be;
                        }
                    }
                    let m = self.momentum;
                    let unbiased = sq / (n - T::one());
                    self.running_mean[c] = (T::one() - m) * self.running_mean[c] + m * mean;
                    self.running_var[c] = (T::one() - m) * self.running_var[c] + m * unbiased;
                }
                Ok(Some(BatchNormCache {
                    x_hat,
                    inv_std: inv_stds,
                }))
            }
        }
    }

    /// Backward pass of a training-mode forward. Accumulates into the gamma
    /// and beta gradients and writes (overwrites) `grad_input`.
    pub fn backward_batch(
        &mut self,
        cache: &BatchNormCache<T>,
        grad_out: &[T],
        layout: SeqLayout<'_>,
        grad_input: &mut [T],
    ) -> Result<()> {
        self.check(&layout, grad_out.len())?;
        layout.check("batch norm input gradient", grad_input.len())?;
        let n = T::cast(layout.valid_positions() as f64);
        grad_input.iter_mut().for_each(|x| *x = T::zero());
        let gamma = self.gamma.data().to_vec();
        let grad_gamma = self.gamma.grad_mut();
        for c in 0..layout.channels {
            let mut sum_dy = T::zero();
            let mut sum_dy_xh = T::zero();
            for (b, &len) in layout.lengths.iter().enumerate() {
                let row = layout.row(b, c);
                for t in row..row + len {
                    sum_dy += grad_out[t];
                    sum_dy_xh += grad_out[t] * cache.x_hat[t];
                }
            }
            grad_gamma[c] += sum_dy_xh;
            let scale = gamma[c] * cache.inv_std[c] / n;
            for (b, &len) in layout.lengths.iter().enumerate() {
                let row = layout.row(b, c);
                for t in row..row + len {
                    grad_input[t] = scale * (n * grad_out[t] - sum_dy - cache.x_hat[t] * sum_dy_xh);
                }
            }
            self.beta.grad_mut()[c] += sum_dy;
        }
        Ok(())
    }
}

/// Tensor-level batch normalization of a fully valid `[B × C × n]` input.
pub fn batch_norm_channel<T: Scalar>(
    input: &Tensor<T>,
    state: &mut BatchNormState<T>,
    mode: Mode,
) -> Result<(Tensor<T>, Option<BatchNormCache<T>>)> {
    input.expect_rank("batch norm input", 3)?;
    let s = input.shape();
    let lengths = vec![s[2]; s[0]];
    let layout = SeqLayout::new(s[1], s[2], &lengths);
    let mut out = vec![T::zero(); input.len()];
    let cache = state.forward_batch(mode, input.data(), layout, &mut out)?;
    Ok((Tensor::from_vec(out, s.to_vec())?, cache))
}
