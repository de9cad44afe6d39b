//! Masked softmax cross-entropy.

use crate::{KernelError, Result, Scalar, Tensor};

/// Mean negative log-likelihood over unmasked positions of
/// `logits [B × V × n_max]`, plus its gradient with respect to the logits.
///
/// `targets` and `mask` are `[B × n_max]`; `mask` is true for real positions.
/// Masked positions contribute neither loss nor gradient.
pub fn softmax_cross_entropy_batch<T: Scalar>(
    logits: &[T],
    targets: &[u32],
    mask: &[bool],
    batch: usize,
    vocab: usize,
    n_max: usize,
) -> Result<(T, Vec<T>)> {
    let expected = batch * vocab * n_max;
    if logits.len() != expected {
        return Err(KernelError::shape("logits", expected, logits.len()));
    }
    if targets.len() != batch * n_max {
        return Err(KernelError::shape("targets", batch * n_max, targets.len()));
    }
    if mask.len() != batch * n_max {
        return Err(KernelError::shape("mask", batch * n_max, mask.len()));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(KernelError::invalid("cross-entropy mask has no unmasked position"));
    }
    let inv_count = T::one() / T::cast(count as f64);
    let mut grad = vec![T::zero(); expected];
    let mut total = T::zero();
    let mut probs = vec![T::zero(); vocab];
    for b in 0..batch {
        let base = b * vocab * n_max;
        for t in 0..n_max {
            if !mask[b * n_max + t] {
                continue;
            }
            let target = targets[b * n_max + t] as usize;
            if target >= vocab {
                return Err(KernelError::invalid(format!(
                    "target {target} out of range for {vocab} classes"
                )));
            }
            let at = |v: usize| base + v * n_max + t;
            let max = (0..vocab).map(|v| logits[at(v)]).fold(T::neg_infinity(), T::max);
            let mut z = T::zero();
            for (v, p) in probs.iter_mut().enumerate() {
                *p = (logits[at(v)] - max).exp();
                z += *p;
            }
            total += z.ln() + max - logits[at(target)];
            for (v, p) in probs.iter().enumerate() {
                grad[at(v)] = *p / z * inv_count;
            }
            grad[at(target)] -= inv_count;
        }
    }
    Ok((total * inv_count, grad))
}

/// Single-sequence form: `logits [V × n]`, `targets` and `mask` of length n.
pub fn softmax_cross_entropy<T: Scalar>(
    logits: &Tensor<T>,
    targets: &[u32],
    mask: &[bool],
) -> Result<(T, Tensor<T>)> {
    logits.expect_rank("logits", 2)?;
    let (v, n) = (logits.shape()[0], logits.shape()[1]);
    let (loss, grad) = softmax_cross_entropy_batch(logits.data(), targets, mask, 1, v, n)?;
    Ok((loss, Tensor::from_vec(grad, vec![v, n])?))
}
