//! ReLU and spatial dropout.

use rand::Rng;

use crate::{rng, KernelError, Mode, Result, Scalar, SeqLayout, Tensor};

pub fn relu_in_place<T: Scalar>(x: &mut [T]) {
    for v in x.iter_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// `grad *= [activation > 0]`, where `activation` is the ReLU output.
pub fn relu_backward_in_place<T: Scalar>(grad: &mut [T], activation: &[T]) {
    for (g, &a) in grad.iter_mut().zip(activation) {
        if a <= T::zero() {
            *g = T::zero();
        }
    }
}

pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let mut out = input.clone();
    out.clear_grad();
    relu_in_place(out.data_mut());
    out
}

pub fn relu_backward<T: Scalar>(grad_out: &Tensor<T>, input: &Tensor<T>) -> Result<Tensor<T>> {
    if grad_out.shape() != input.shape() {
        return Err(KernelError::shape("relu gradient", input.len(), grad_out.len()));
    }
    let mut g = grad_out.clone();
    g.clear_grad();
    relu_backward_in_place(g.data_mut(), input.data());
    Ok(g)
}

/// Per-(sequence, channel) multipliers of spatial dropout: `0` for dropped
/// channels, `1/(1-rate)` for kept ones. `None` means identity (eval mode or
/// rate 0).
pub fn spatial_dropout_mask<T: Scalar>(
    batch: usize,
    channels: usize,
    rate: f64,
    mode: Mode,
    seed: u64,
) -> Result<Option<Vec<T>>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(KernelError::invalid(format!("dropout rate must be in [0, 1), got {rate}")));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(None);
    }
    let keep = T::cast(1.0 / (1.0 - rate));
    let mut r = rng::rng_from_seed(seed);
    Ok(Some(
        (0..batch * channels)
            .map(|_| if r.gen::<f64>() < rate { T::zero() } else { keep })
            .collect(),
    ))
}

/// Multiplies every time step of channel `(b, c)` by `mask[b * C + c]`.
pub fn apply_channel_mask<T: Scalar>(x: &mut [T], mask: &[T], layout: SeqLayout<'_>) {
    for b in 0..layout.batch() {
        for c in 0..layout.channels {
            let m = mask[b * layout.channels + c];
            if m != T::one() {
                let row = layout.row(b, c);
                x[row..row + layout.n_max].iter_mut().for_each(|v| *v *= m);
            }
        }
    }
}

/// Spatial dropout over a `[B × C × n]` tensor. Returns the output and the
/// channel mask (needed for the backward pass, which applies the same mask).
pub fn spatial_dropout<T: Scalar>(
    input: &Tensor<T>,
    rate: f64,
    mode: Mode,
    seed: u64,
) -> Result<(Tensor<T>, Option<Vec<T>>)> {
    input.expect_rank("dropout input", 3)?;
    let s = input.shape();
    let mask = spatial_dropout_mask(s[0], s[1], rate, mode, seed)?;
    let mut out = input.clone();
    out.clear_grad();
    if let Some(m) = &mask {
        let lengths = vec![s[2]; s[0]];
        apply_channel_mask(out.data_mut(), m, SeqLayout::new(s[1], s[2], &lengths));
    }
    Ok((out, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tensor<f32> {
        Tensor::from_vec((0..60).map(|i| i as f32 - 30.0).collect(), vec![3, 4, 5]).unwrap()
    }

    #[test]
    fn relu_clamps_and_masks_gradient() {
        let x = Tensor::from_vec(vec![-1.0f64, 0.0, 2.0], vec![3]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let g = relu_backward(&Tensor::from_vec(vec![1.0, 1.0, 1.0], vec![3]).unwrap(), &relu(&x)).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn dropout_identities() {
        let x = sample();
        let (y, m) = spatial_dropout(&x, 0.0, Mode::Train, 1).unwrap();
        assert_eq!(y, x);
        assert!(m.is_none());
        let (y, m) = spatial_dropout(&x, 0.5, Mode::Eval, 1).unwrap();
        assert_eq!(y, x);
        assert!(m.is_none());
        assert!(spatial_dropout(&x, 1.0, Mode::Train, 1).is_err());
    }

    #[test]
    fn dropout_zeroes_whole_channels_and_rescales() {
        let x = Tensor::from_vec(vec![1.0f64; 2 * 50 * 4], vec![2, 50, 4]).unwrap();
        let (y, mask) = spatial_dropout(&x, 0.2, Mode::Train, 99).unwrap();
        let mask = mask.unwrap();
        let dropped = mask.iter().filter(|&&m| m == 0.0).count();
        assert!(dropped > 0 && dropped < 100);
        for bc in 0..100 {
            let row = &y.data()[bc * 4..bc * 4 + 4];
            let expect = if mask[bc] == 0.0 { 0.0 } else { 1.0 / 0.8 };
            assert!(row.iter().all(|&v| (v - expect).abs() < 1e-12));
        }
        let (y2, _) = spatial_dropout(&x, 0.2, Mode::Train, 99).unwrap();
        assert_eq!(y, y2);
    }
}
