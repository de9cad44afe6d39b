//! Finite-difference checks of every backward pass in double precision with
//! central differences. Each function checks one random case per seed.

use nnkernel::activation::{apply_channel_mask, relu_backward_in_place, relu_in_place, spatial_dropout_mask};
use nnkernel::batchnorm::BatchNormState;
use nnkernel::conv::{self, ConvSpec};
use nnkernel::embed::{embed_backward_batch, embed_batch};
use nnkernel::gradcheck::{check_gradient, GradCheckReport};
use nnkernel::loss::softmax_cross_entropy_batch;
use nnkernel::rng::stream;
use nnkernel::{Mode, SeqLayout, Tensor};
use rand::Rng;

pub const H: f64 = 1e-4;
pub const TOL: f64 = 1e-4;
pub const SEEDS: u64 = 24;

pub type OpCheck = fn(u64) -> GradCheckReport;

/// Every op check, by name.
pub const OPS: &[(&str, OpCheck)] = &[
    ("conv", conv),
    ("batch norm", batch_norm),
    ("relu+dropout", relu_dropout),
    ("embedding", embedding),
    ("cross-entropy", cross_entropy),
];

fn uniform(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn conv(seed: u64) -> GradCheckReport {
    let mut rng = stream(seed, &[1]);
    let k = [1, 3, 5][rng.gen_range(0..3)];
    let spec = ConvSpec::new(k, rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4)).unwrap();
    let batch = rng.gen_range(1..3);
    let n_max = rng.gen_range(1..10);
    let lengths: Vec<usize> = (0..batch).map(|_| rng.gen_range(1..=n_max)).collect();
    let in_layout = SeqLayout::new(spec.in_channels, n_max, &lengths);
    let out_len = batch * spec.out_channels * n_max;
    let mut x = uniform(&mut rng, in_layout.len(), 1.0);
    let mut w = uniform(&mut rng, spec.weight_len(), 1.0);
    let mut b = uniform(&mut rng, spec.out_channels, 1.0);
    let r = uniform(&mut rng, out_len, 1.0);

    let loss = |x: &[f64], w: &[f64], b: &[f64]| {
        let mut out = vec![0.0; out_len];
        conv::forward_batch(&spec, x, &lengths, n_max, w, b, &mut out).unwrap();
        dot(&out, &r)
    };
    let mut gx = vec![0.0; x.len()];
    let mut gw = vec![0.0; w.len()];
    let mut gb = vec![0.0; b.len()];
    conv::backward_batch(&spec, &r, &x, &lengths, n_max, &w, Some(&mut gx), &mut gw, &mut gb).unwrap();

    let (w0, b0) = (w.clone(), b.clone());
    // Padded input positions have no influence; their gradient is zero.
    let rx = check_gradient(&mut x, &gx, H, |x| loss(x, &w0, &b0));
    let x0 = x.clone();
    let rw = check_gradient(&mut w, &gw, H, |w| loss(&x0, w, &b0));
    let rb = check_gradient(&mut b, &gb, H, |b| loss(&x0, &w0, b));
    rx.merge(rw).merge(rb)
}

/// C=2, n=7, k=3, d=2 as a single sequence through the tensor-level API.
pub fn conv_tensor_api() -> GradCheckReport {
    let mut rng = stream(42, &[]);
    let spec = ConvSpec::new(3, 2, 2, 2).unwrap();
    let x = Tensor::from_vec(uniform(&mut rng, 14, 1.0), vec![2, 7]).unwrap();
    let w = Tensor::from_vec(uniform(&mut rng, 12, 1.0), vec![2, 2, 3]).unwrap();
    let b = Tensor::from_vec(uniform(&mut rng, 2, 1.0), vec![2]).unwrap();
    let r = uniform(&mut rng, 14, 1.0);
    let g = conv::conv1d_acausal_backward(&Tensor::from_vec(r.clone(), vec![2, 7]).unwrap(), &x, &spec, &w).unwrap();
    let mut xs = x.data().to_vec();
    let report = check_gradient(&mut xs, g.input.data(), H, |xs| {
        let xt = Tensor::from_vec(xs.to_vec(), vec![2, 7]).unwrap();
        dot(conv::conv1d_acausal(&xt, &spec, &w, &b).unwrap().data(), &r)
    });
    let mut ws = w.data().to_vec();
    report.merge(check_gradient(&mut ws, g.weights.data(), H, |ws| {
        let wt = Tensor::from_vec(ws.to_vec(), vec![2, 2, 3]).unwrap();
        dot(conv::conv1d_acausal(&x, &spec, &wt, &b).unwrap().data(), &r)
    }))
}

fn batch_norm_case(
    state: &BatchNormState<f64>,
    x: &mut [f64],
    r: &[f64],
    layout: SeqLayout<'_>,
) -> GradCheckReport {
    let channels = layout.channels;
    let eval = |st: &BatchNormState<f64>, x: &[f64]| {
        let mut s = st.clone();
        let mut out = vec![0.0; x.len()];
        s.forward_batch(Mode::Train, x, layout, &mut out).unwrap();
        dot(&out, r)
    };
    let mut s = state.clone();
    let mut out = vec![0.0; x.len()];
    let cache = s.forward_batch(Mode::Train, x, layout, &mut out).unwrap().unwrap();
    let mut gx = vec![0.0; x.len()];
    s.backward_batch(&cache, r, layout, &mut gx).unwrap();
    let g_gamma = s.gamma.grad().unwrap().to_vec();
    let g_beta = s.beta.grad().unwrap().to_vec();

    let rx = check_gradient(x, &gx, H, |x| eval(state, x));
    let mut gamma = state.gamma.data().to_vec();
    let rg = check_gradient(&mut gamma, &g_gamma, H, |g| {
        let mut st = state.clone();
        st.gamma = Tensor::from_vec(g.to_vec(), vec![channels]).unwrap();
        eval(&st, x)
    });
    let mut beta = state.beta.data().to_vec();
    let rb = check_gradient(&mut beta, &g_beta, H, |bv| {
        let mut st = state.clone();
        st.beta = Tensor::from_vec(bv.to_vec(), vec![channels]).unwrap();
        eval(&st, x)
    });
    rx.merge(rg).merge(rb)
}

pub fn batch_norm(seed: u64) -> GradCheckReport {
    let mut rng = stream(seed, &[2]);
    let channels = rng.gen_range(1..4);
    let batch = rng.gen_range(1..4);
    let n_max = rng.gen_range(2..7);
    let lengths: Vec<usize> = (0..batch).map(|_| rng.gen_range(2..=n_max)).collect();
    let layout = SeqLayout::new(channels, n_max, &lengths);
    let mut state = BatchNormState::<f64>::new(channels);
    state.gamma = Tensor::from_vec(uniform(&mut rng, channels, 2.0), vec![channels]).unwrap();
    state.beta = Tensor::from_vec(uniform(&mut rng, channels, 1.0), vec![channels]).unwrap();
    let mut x = uniform(&mut rng, layout.len(), 2.0);
    let r = uniform(&mut rng, layout.len(), 1.0);
    batch_norm_case(&state, &mut x, &r, layout)
}

/// B=2, C=3, n=5 with default affine parameters.
pub fn batch_norm_b2_c3_n5() -> GradCheckReport {
    let mut rng = stream(2024, &[]);
    let lengths = [5, 5];
    let layout = SeqLayout::new(3, 5, &lengths);
    let mut x = uniform(&mut rng, 30, 1.5);
    let r = uniform(&mut rng, 30, 1.0);
    batch_norm_case(&BatchNormState::new(3), &mut x, &r, layout)
}

pub fn relu_dropout(seed: u64) -> GradCheckReport {
    let mut rng = stream(seed, &[3]);
    let channels = rng.gen_range(1..5);
    let batch = rng.gen_range(1..4);
    let n_max = rng.gen_range(1..6);
    let lengths = vec![n_max; batch];
    let layout = SeqLayout::new(channels, n_max, &lengths);
    // Keep inputs away from the ReLU kink so the central difference is
    // taken on a smooth piece.
    let mut x: Vec<f64> = (0..layout.len())
        .map(|_| {
            let v: f64 = rng.gen_range(0.01..1.0);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect();
    let r = uniform(&mut rng, layout.len(), 1.0);
    let mask = spatial_dropout_mask::<f64>(batch, channels, 0.3, Mode::Train, seed).unwrap().unwrap();

    let forward = |x: &[f64]| {
        let mut y = x.to_vec();
        relu_in_place(&mut y);
        apply_channel_mask(&mut y, &mask, layout);
        y
    };
    let mut g = r.clone();
    apply_channel_mask(&mut g, &mask, layout);
    let mut act = x.clone();
    relu_in_place(&mut act);
    relu_backward_in_place(&mut g, &act);
    check_gradient(&mut x, &g, H, |x| dot(&forward(x), &r))
}

pub fn embedding(seed: u64) -> GradCheckReport {
    let mut rng = stream(seed, &[4]);
    let vocab = rng.gen_range(2..8);
    let dim = rng.gen_range(1..5);
    let batch = rng.gen_range(1..3);
    let n_max = rng.gen_range(1..6);
    let lengths: Vec<usize> = (0..batch).map(|_| rng.gen_range(1..=n_max)).collect();
    let layout = SeqLayout::new(dim, n_max, &lengths);
    let ids: Vec<u32> = (0..batch * n_max).map(|_| rng.gen_range(0..vocab as u32)).collect();
    let mut table = uniform(&mut rng, vocab * dim, 1.0);
    let r = uniform(&mut rng, layout.len(), 1.0);
    let mut g = vec![0.0; table.len()];
    embed_backward_batch(&ids, &r, dim, layout, &mut g).unwrap();
    check_gradient(&mut table, &g, H, |t| {
        let mut out = vec![0.0; layout.len()];
        embed_batch(&ids, t, vocab, dim, layout, &mut out).unwrap();
        dot(&out, &r)
    })
}

pub fn cross_entropy(seed: u64) -> GradCheckReport {
    let mut rng = stream(seed, &[5]);
    let vocab = rng.gen_range(2..9);
    let batch = rng.gen_range(1..3);
    let n_max = rng.gen_range(1..7);
    let mut mask: Vec<bool> = (0..batch * n_max).map(|_| rng.gen_bool(0.7)).collect();
    mask[0] = true;
    let targets: Vec<u32> = (0..batch * n_max).map(|_| rng.gen_range(0..vocab as u32)).collect();
    let mut logits = uniform(&mut rng, batch * vocab * n_max, 3.0);
    let (_, g) = softmax_cross_entropy_batch(&logits, &targets, &mask, batch, vocab, n_max).unwrap();
    check_gradient(&mut logits, &g, H, |l| {
        softmax_cross_entropy_batch(l, &targets, &mask, batch, vocab, n_max).unwrap().0
    })
}
