//! Acausal dilated 1D convolution.
//!
//! The window is centred on the output position: for kernel size `k`
//! (odd) and dilation `d`, tap `j` reads the input at offset
//! `(j - (k-1)/2) * d`. Reads outside `[0, len)` see zeros, so the output
//! has exactly the input length.
//!
//! The batch is lowered to one im2col matrix over the valid positions of
//! all sequences, so a layer is a single GEMM and padding never enters the
//! arithmetic.

use crate::{gemm, KernelError, MatMut, MatRef, Result, Scalar, SeqLayout, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub kernel_size: usize,
    pub dilation: usize,
    pub in_channels: usize,
    pub out_channels: usize,
}

impl ConvSpec {
    pub fn new(kernel_size: usize, dilation: usize, in_channels: usize, out_channels: usize) -> Result<Self> {
        let spec = Self {
            kernel_size,
            dilation,
            in_channels,
            out_channels,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size % 2 == 0 {
            return Err(KernelError::invalid(format!(
                "kernel size must be odd and positive, got {}",
                self.kernel_size
            )));
        }
        if self.dilation == 0 || self.in_channels == 0 || self.out_channels == 0 {
            return Err(KernelError::invalid(
                "dilation and channel counts must be positive",
            ));
        }
        Ok(())
    }

    /// Zero padding added on each side: `((k-1)/2) * d`.
    pub fn one_sided_pad(&self) -> usize {
        (self.kernel_size - 1) / 2 * self.dilation
    }

    pub fn weight_len(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel_size
    }

    /// Input offset read by tap `j`.
    #[inline]
    fn tap_offset(&self, j: usize) -> isize {
        (j as isize - ((self.kernel_size - 1) / 2) as isize) * self.dilation as isize
    }

    /// Output range `[t0, t1)` whose tap-`j` input lies inside `[0, len)`.
    #[inline]
    fn tap_range(&self, j: usize, len: usize) -> Option<(usize, usize, isize)> {
        let off = self.tap_offset(j);
        let len_i = len as isize;
        let t0 = (-off).max(0);
        let t1 = (len_i - off).min(len_i);
        (t1 > t0).then_some((t0 as usize, t1 as usize, off))
    }

    fn check_params<T>(&self, weights: &[T], bias: &[T]) -> Result<()> {
        self.validate()?;
        if weights.len() != self.weight_len() {
            return Err(KernelError::shape("conv weights", self.weight_len(), weights.len()));
        }
        if bias.len() != self.out_channels {
            return Err(KernelError::shape("conv bias (out_channels)", self.out_channels, bias.len()));
        }
        Ok(())
    }
}

/// Fills `col [C_in·k × N]` (N = valid positions over the batch, sequences
/// concatenated) so that row `ci·k + j` holds input channel `ci` shifted by
/// tap `j`. `col` must arrive zeroed; taps outside a sequence stay zero.
fn im2col<T: Scalar>(spec: &ConvSpec, input: &[T], layout: &SeqLayout<'_>, col: &mut [T]) {
    let (cin, k) = (spec.in_channels, spec.kernel_size);
    let n_total = layout.valid_positions();
    let mut base = 0;
    for (b, &len) in layout.lengths.iter().enumerate() {
        for j in 0..k {
            let Some((t0, t1, off)) = spec.tap_range(j, len) else {
                continue;
            };
            for ci in 0..cin {
                let src = layout.row(b, ci);
                let dst = (ci * k + j) * n_total + base;
                let s0 = (t0 as isize + off) as usize;
                col[dst + t0..dst + t1].copy_from_slice(&input[src + s0..src + s0 + (t1 - t0)]);
            }
        }
        base += len;
    }
}

/// Adjoint of [`im2col`]: accumulates `col` back into `[B × C_in × n_max]`.
fn col2im<T: Scalar>(spec: &ConvSpec, col: &[T], layout: &SeqLayout<'_>, grad_input: &mut [T]) {
    let (cin, k) = (spec.in_channels, spec.kernel_size);
    let n_total = layout.valid_positions();
    let mut base = 0;
    for (b, &len) in layout.lengths.iter().enumerate() {
        for ci in 0..cin {
            let dst = layout.row(b, ci);
            for j in 0..k {
                let Some((t0, t1, off)) = spec.tap_range(j, len) else {
                    continue;
                };
                let src = (ci * k + j) * n_total + base;
                let s0 = (t0 as isize + off) as usize;
                for (g, &c) in grad_input[dst + s0..dst + s0 + (t1 - t0)].iter_mut().zip(&col[src + t0..src + t1]) {
                    *g += c;
                }
            }
        }
        base += len;
    }
}

/// Batched forward pass. `input` is `[B × in_channels × n_max]`, `out` is
/// `[B × out_channels × n_max]`; padded positions of `out` are written as
/// zero.
pub fn forward_batch<T: Scalar>(
    spec: &ConvSpec,
    input: &[T],
    lengths: &[usize],
    n_max: usize,
    weights: &[T],
    bias: &[T],
    out: &mut [T],
) -> Result<()> {
    spec.check_params(weights, bias)?;
    let in_layout = SeqLayout::new(spec.in_channels, n_max, lengths);
    let out_layout = SeqLayout::new(spec.out_channels, n_max, lengths);
    in_layout.check("conv input", input.len())?;
    out_layout.check("conv output", out.len())?;

    let (cin, cout, k) = (spec.in_channels, spec.out_channels, spec.kernel_size);
    let n_total = in_layout.valid_positions();
    out.iter_mut().for_each(|x| *x = T::zero());
    if n_total == 0 {
        return Ok(());
    }
    let mut col = vec![T::zero(); cin * k * n_total];
    im2col(spec, input, &in_layout, &mut col);
    let mut y = vec![T::zero(); cout * n_total];
    gemm(
        T::one(),
        MatRef::dense(weights, cout, cin * k),
        MatRef::dense(&col, cin * k, n_total),
        T::zero(),
        MatMut::dense(&mut y, cout, n_total),
    );
    let mut base = 0;
    for (b, &len) in lengths.iter().enumerate() {
        for c in 0..cout {
            let row = out_layout.row(b, c);
            let src = &y[c * n_total + base..c * n_total + base + len];
            for (o, &v) in out[row..row + len].iter_mut().zip(src) {
                *o = v + bias[c];
            }
        }
        base += len;
    }
    Ok(())
}

/// Batched backward pass. Accumulates into `grad_weights` and `grad_bias`
/// and, when given, into `grad_input`. Gradients at padded output positions
/// are ignored.
#[allow(clippy::too_many_arguments)]
pub fn backward_batch<T: Scalar>(
    spec: &ConvSpec,
    grad_out: &[T],
    input: &[T],
    lengths: &[usize],
    n_max: usize,
    weights: &[T],
    grad_input: Option<&mut [T]>,
    grad_weights: &mut [T],
    grad_bias: &mut [T],
) -> Result<()> {
    spec.check_params(weights, grad_bias)?;
    if grad_weights.len() != spec.weight_len() {
        return Err(KernelError::shape("conv weight gradient", spec.weight_len(), grad_weights.len()));
    }
    let in_layout = SeqLayout::new(spec.in_channels, n_max, lengths);
    let out_layout = SeqLayout::new(spec.out_channels, n_max, lengths);
    in_layout.check("conv saved input", input.len())?;
    out_layout.check("conv output gradient", grad_out.len())?;
    if let Some(gi) = grad_input.as_deref() {
        in_layout.check("conv input gradient", gi.len())?;
    }
    let (cin, cout, k) = (spec.in_channels, spec.out_channels, spec.kernel_size);
    let n_total = in_layout.valid_positions();
    if n_total == 0 {
        return Ok(());
    }

    // Valid output gradients, concatenated like the im2col columns.
    let mut gy = vec![T::zero(); cout * n_total];
    let mut base = 0;
    for (b, &len) in lengths.iter().enumerate() {
        for c in 0..cout {
            let row = out_layout.row(b, c);
            gy[c * n_total + base..c * n_total + base + len].copy_from_slice(&grad_out[row..row + len]);
        }
        base += len;
    }
    for (c, g) in grad_bias.iter_mut().enumerate() {
        *g += gy[c * n_total..(c + 1) * n_total].iter().copied().sum::<T>();
    }

    let mut col = vec![T::zero(); cin * k * n_total];
    im2col(spec, input, &in_layout, &mut col);
    // dW += gy · colᵀ
    gemm(
        T::one(),
        MatRef::dense(&gy, cout, n_total),
        MatRef::dense(&col, cin * k, n_total).t(),
        T::one(),
        MatMut::dense(grad_weights, cout, cin * k),
    );
    if let Some(gi) = grad_input {
        // dcol = Wᵀ · gy, reusing the column buffer.
        gemm(
            T::one(),
            MatRef::dense(weights, cout, cin * k).t(),
            MatRef::dense(&gy, cout, n_total),
            T::zero(),
            MatMut::dense(&mut col, cin * k, n_total),
        );
        col2im(spec, &col, &in_layout, gi);
    }
    Ok(())
}

/// Single-sequence convolution: `input [C_in × n]`, `weights [C_out × C_in × k]`,
/// `bias [C_out]` → `[C_out × n]`.
pub fn conv1d_acausal<T: Scalar>(
    input: &Tensor<T>,
    spec: &ConvSpec,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let n = check_single(input, spec, weights)?;
    let mut out = vec![T::zero(); spec.out_channels * n];
    forward_batch(spec, input.data(), &[n], n, weights.data(), bias.data(), &mut out)?;
    Tensor::from_vec(out, vec![spec.out_channels, n])
}

#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Gradients of [`conv1d_acausal`] with respect to its input, weights and bias.
pub fn conv1d_acausal_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    saved_input: &Tensor<T>,
    spec: &ConvSpec,
    weights: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let n = check_single(saved_input, spec, weights)?;
    grad_out.expect_rank("conv output gradient", 2)?;
    if grad_out.shape() != [spec.out_channels, n] {
        return Err(KernelError::shape(
            "conv output gradient (out_channels × n)",
            spec.out_channels * n,
            grad_out.len(),
        ));
    }
    let mut gi = vec![T::zero(); spec.in_channels * n];
    let mut gw = vec![T::zero(); spec.weight_len()];
    let mut gb = vec![T::zero(); spec.out_channels];
    backward_batch(
        spec,
        grad_out.data(),
        saved_input.data(),
        &[n],
        n,
        weights.data(),
        Some(&mut gi),
        &mut gw,
        &mut gb,
    )?;
    Ok(ConvGrads {
        input: Tensor::from_vec(gi, vec![spec.in_channels, n])?,
        weights: Tensor::from_vec(gw, vec![spec.out_channels, spec.in_channels, spec.kernel_size])?,
        bias: Tensor::from_vec(gb, vec![spec.out_channels])?,
    })
}

fn check_single<T: Scalar>(input: &Tensor<T>, spec: &ConvSpec, weights: &Tensor<T>) -> Result<usize> {
    spec.validate()?;
    input.expect_rank("conv input", 2)?;
    weights.expect_rank("conv weights", 3)?;
    if input.shape()[0] != spec.in_channels {
        return Err(KernelError::shape("conv input channels", spec.in_channels, input.shape()[0]));
    }
    let ws = weights.shape();
    if ws[0] != spec.out_channels {
        return Err(KernelError::shape("conv weight out_channels", spec.out_channels, ws[0]));
    }
    if ws[1] != spec.in_channels {
        return Err(KernelError::shape("conv weight in_channels", spec.in_channels, ws[1]));
    }
    if ws[2] != spec.kernel_size {
        return Err(KernelError::shape("conv weight kernel_size", spec.kernel_size, ws[2]));
    }
    Ok(input.shape()[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(data: &[f64], shape: &[usize]) -> Tensor<f64> {
        Tensor::from_vec(data.to_vec(), shape.to_vec()).unwrap()
    }

    #[test]
    fn difference_kernel_with_zero_padding() {
        // out[t] = x[t-1] - x[t+1]
        let spec = ConvSpec::new(3, 1, 1, 1).unwrap();
        let out = conv1d_acausal(
            &t(&[1., 2., 3., 4., 5.], &[1, 5]),
            &spec,
            &t(&[1., 0., -1.], &[1, 1, 3]),
            &t(&[0.], &[1]),
        )
        .unwrap();
        assert_eq!(out.data(), &[-2., -2., -2., -2., 4.]);
    }

    #[test]
    fn identity_kernel_and_gradient() {
        let spec = ConvSpec::new(1, 1, 1, 1).unwrap();
        let x = t(&[0.5, -1.0, 3.0, 7.0], &[1, 4]);
        let w = t(&[1.0], &[1, 1, 1]);
        let out = conv1d_acausal(&x, &spec, &w, &t(&[0.], &[1])).unwrap();
        assert_eq!(out.data(), x.data());
        let g = t(&[1.0, 2.0, -3.0, 0.25], &[1, 4]);
        let grads = conv1d_acausal_backward(&g, &x, &spec, &w).unwrap();
        assert_eq!(grads.input.data(), g.data());
    }

    #[test]
    fn dilated_taps() {
        let spec = ConvSpec::new(3, 3, 1, 1).unwrap();
        let out = conv1d_acausal(
            &t(&[1., 0., 0., 0., 0., 0., 0.], &[1, 7]),
            &spec,
            &t(&[1., 1., 1.], &[1, 1, 3]),
            &t(&[0.], &[1]),
        )
        .unwrap();
        assert_eq!(out.data(), &[1., 0., 0., 1., 0., 0., 0.]);
    }

    #[test]
    fn zero_gradient_gives_zero_gradients() {
        let spec = ConvSpec::new(3, 2, 2, 3).unwrap();
        let x = t(&[1.0; 14], &[2, 7]);
        let w = t(&[0.3; 18], &[3, 2, 3]);
        let g = conv1d_acausal_backward(&Tensor::zeros(vec![3, 7]), &x, &spec, &w).unwrap();
        assert!(g.input.data().iter().chain(g.weights.data()).chain(g.bias.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn shape_errors_name_the_dimension() {
        let spec = ConvSpec::new(3, 1, 2, 1).unwrap();
        let err = conv1d_acausal(
            &t(&[1.0; 5], &[1, 5]),
            &spec,
            &t(&[0.0; 6], &[1, 2, 3]),
            &t(&[0.], &[1]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("input channels"), "{err}");
        let err = conv1d_acausal(
            &t(&[1.0; 10], &[2, 5]),
            &spec,
            &t(&[0.0; 10], &[1, 2, 5]),
            &t(&[0.], &[1]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("kernel_size"), "{err}");
        assert!(ConvSpec::new(4, 1, 1, 1).is_err());
    }

    #[test]
    fn padded_positions_are_zero_and_do_not_leak() {
        // Sequence of length 3 inside n_max = 6; garbage in the padding must
        // not influence valid outputs.
        let spec = ConvSpec::new(5, 2, 1, 1).unwrap();
        let w = [1.0f64, 1.0, 1.0, 1.0, 1.0];
        let clean = [1.0, 2.0, 3.0, 0.0, 0.0, 0.0];
        let dirty = [1.0, 2.0, 3.0, 9.0, 9.0, 9.0];
        let mut a = [0.0; 6];
        let mut b = [5.0; 6];
        forward_batch(&spec, &clean, &[3], 6, &w, &[0.0], &mut a).unwrap();
        forward_batch(&spec, &dirty, &[3], 6, &w, &[0.0], &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(&a[3..], &[0.0, 0.0, 0.0]);
    }
}
