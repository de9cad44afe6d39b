//! Forward and backward passes over padded batches.
//!
//! Activations are `[B × channels × n_max]`; positions at or beyond a
//! sequence's length hold zero after every layer and are never read.

use nnkernel::activation::{apply_channel_mask, relu_in_place, spatial_dropout_mask};
use nnkernel::batchnorm::BatchNormCache;
use nnkernel::conv::{self, ConvSpec};
use nnkernel::embed::{embed_backward_batch, embed_batch};
use nnkernel::rng::derive_seed;
use nnkernel::{Mode, Scalar, SeqLayout, Tensor};

use super::model::{ConvLayer, Upsampler};
use super::AtcnModel;
use crate::corpus::SequenceBatch;
use crate::error::{DiacriticsError, Result};
use crate::seeds;

#[derive(Debug, Clone)]
struct LayerCache<T> {
    /// Convolution input; for the first layer of a block, the block input.
    input: Vec<T>,
    bn: BatchNormCache<T>,
    mask: Option<Vec<T>>,
}

/// Everything the backward pass needs from one training forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    ids: Vec<u32>,
    lengths: Vec<usize>,
    n_max: usize,
    embedded: Vec<T>,
    layers: Vec<Vec<LayerCache<T>>>,
    /// Input of the output projection.
    last: Vec<T>,
}

type StatsUpdate<T> = (usize, usize, Vec<T>, Vec<T>);

impl<T: Scalar> AtcnModel<T> {
    /// Logits `[B × V × n_max]`, zero at padded positions. Training mode
    /// updates batch-norm running statistics and applies dropout seeded by
    /// `seed`.
    pub fn forward(&mut self, batch: &SequenceBatch, mode: Mode, seed: u64) -> Result<Tensor<T>> {
        let logits = match mode {
            Mode::Eval => self.forward_eval(&batch.input_ids, &batch.lengths, batch.n_max)?,
            Mode::Train => self.forward_train(&batch.input_ids, &batch.lengths, batch.n_max, seed)?.0,
        };
        let shape = vec![batch.batch_size(), self.vocab_size(), batch.n_max];
        Ok(Tensor::from_vec(logits, shape)?)
    }

    pub fn forward_eval(&self, ids: &[u32], lengths: &[usize], n_max: usize) -> Result<Vec<T>> {
        Ok(self.run(ids, lengths, n_max, None)?.0)
    }

    pub fn forward_train(
        &mut self,
        ids: &[u32],
        lengths: &[usize],
        n_max: usize,
        seed: u64,
    ) -> Result<(Vec<T>, ForwardCache<T>)> {
        let (logits, cache, updates) = self.run(ids, lengths, n_max, Some(seed))?;
        for (i, j, mean, var) in updates {
            let bn = &mut self.blocks[i].norms[j];
            bn.running_mean = mean;
            bn.running_var = var;
        }
        Ok((logits, cache.expect("training run keeps a cache")))
    }

    fn check_input(&self, ids: &[u32], lengths: &[usize], n_max: usize) -> Result<()> {
        if lengths.is_empty() || n_max == 0 {
            return Err(DiacriticsError::invalid("empty batch"));
        }
        if ids.len() != lengths.len() * n_max {
            return Err(DiacriticsError::invalid(format!(
                "id matrix has {} entries, expected {} × {n_max}",
                ids.len(),
                lengths.len()
            )));
        }
        if let Some(l) = lengths.iter().find(|&&l| l > n_max) {
            return Err(DiacriticsError::invalid(format!("sequence length {l} exceeds n_max {n_max}")));
        }
        Ok(())
    }

    fn run(
        &self,
        ids: &[u32],
        lengths: &[usize],
        n_max: usize,
        train: Option<u64>,
    ) -> Result<(Vec<T>, Option<ForwardCache<T>>, Vec<StatsUpdate<T>>)> {
        self.check_input(ids, lengths, n_max)?;
        let cfg = &self.config;
        let (e, c, v) = (cfg.embedding_dim, cfg.channels, self.vocab_size());
        let emb_layout = SeqLayout::new(e, n_max, lengths);
        let chan = SeqLayout::new(c, n_max, lengths);
        let batch = lengths.len();

        let mut embedded = vec![T::zero(); emb_layout.len()];
        embed_batch(ids, self.embedding.data(), v, e, emb_layout, &mut embedded)?;
        let mut current = vec![T::zero(); chan.len()];
        self.upsample_forward(&embedded, lengths, n_max, &mut current)?;

        let mut layers = Vec::new();
        let mut updates = Vec::new();
        for (i, block) in self.blocks.iter().enumerate() {
            let block_in = current;
            let mut inputs: Vec<Vec<T>> = Vec::new();
            let mut caches = Vec::new();
            let mut a: Option<Vec<T>> = None;
            for (j, (layer, norm)) in block.convs.iter().zip(&block.norms).enumerate() {
                let src = a.take();
                let mut h = vec![T::zero(); chan.len()];
                conv_forward(layer, src.as_deref().unwrap_or(&block_in), lengths, n_max, &mut h)?;
                let mut y = vec![T::zero(); chan.len()];
                match train {
                    Some(seed) => {
                        let mut st = norm.clone();
                        let bn = st
                            .forward_batch(Mode::Train, &h, chan, &mut y)?
                            .expect("training batch norm returns a cache");
                        updates.push((i, j, st.running_mean, st.running_var));
                        relu_in_place(&mut y);
                        let mask = spatial_dropout_mask::<T>(
                            batch,
                            c,
                            cfg.dropout_rate,
                            Mode::Train,
                            derive_seed(seed, &[seeds::DROPOUT, i as u64, j as u64]),
                        )?;
                        if let Some(m) = &mask {
                            apply_channel_mask(&mut y, m, chan);
                        }
                        inputs.push(src.unwrap_or_default());
                        caches.push((bn, mask));
                    }
                    None => {
                        norm.forward_eval(&h, chan, &mut y)?;
                        relu_in_place(&mut y);
                    }
                }
                a = Some(y);
            }
            let mut out = a.expect("blocks have at least one convolution");
            for (o, x) in out.iter_mut().zip(&block_in) {
                *o += *x;
            }
            if train.is_some() {
                inputs[0] = block_in;
                layers.push(
                    inputs
                        .into_iter()
                        .zip(caches)
                        .map(|(input, (bn, mask))| LayerCache { input, bn, mask })
                        .collect(),
                );
            }
            current = out;
        }

        let mut logits = vec![T::zero(); batch * v * n_max];
        conv_forward(&self.projection, &current, lengths, n_max, &mut logits)?;
        let cache = train.map(|_| ForwardCache {
            ids: ids.to_vec(),
            lengths: lengths.to_vec(),
            n_max,
            embedded,
            layers,
            last: current,
        });
        Ok((logits, cache, updates))
    }

    fn upsample_forward(&self, embedded: &[T], lengths: &[usize], n_max: usize, out: &mut [T]) -> Result<()> {
        match &self.upsampler {
            Upsampler::ScalarCopy { weight, bias } => {
                let e = self.config.embedding_dim;
                let emb = SeqLayout::new(e, n_max, lengths);
                let chan = SeqLayout::new(self.config.channels, n_max, lengths);
                for (b, &len) in lengths.iter().enumerate() {
                    for (r, (&w, &beta)) in weight.data().iter().zip(bias.data()).enumerate() {
                        for f in 0..e {
                            let src = &embedded[emb.row(b, f)..emb.row(b, f) + len];
                            let dst = &mut out[chan.row(b, r * e + f)..chan.row(b, r * e + f) + len];
                            for (d, &s) in dst.iter_mut().zip(src) {
                                *d = w * s + beta;
                            }
                        }
                    }
                }
                Ok(())
            }
            Upsampler::FullProjection(layer) => conv_forward(layer, embedded, lengths, n_max, out),
        }
    }

    /// Accumulates parameter gradients of the loss whose logit gradient is
    /// `grad_logits`, for the forward pass that produced `cache`.
    pub fn backward(&mut self, cache: &ForwardCache<T>, grad_logits: &[T]) -> Result<()> {
        let (lengths, n_max) = (&cache.lengths[..], cache.n_max);
        let (e, c, v) = (self.config.embedding_dim, self.config.channels, self.vocab_size());
        let chan = SeqLayout::new(c, n_max, lengths);
        let emb_layout = SeqLayout::new(e, n_max, lengths);
        if grad_logits.len() != lengths.len() * v * n_max {
            return Err(DiacriticsError::invalid("logit gradient does not match the cached batch"));
        }

        let mut grad = vec![T::zero(); chan.len()];
        conv_backward(&mut self.projection, grad_logits, &cache.last, lengths, n_max, Some(&mut grad))?;

        for (block, layers) in self.blocks.iter_mut().zip(&cache.layers).rev() {
            // Skip path: the block input receives the output gradient as is.
            let mut grad_in = grad.clone();
            let mut g = grad;
            for (j, lc) in layers.iter().enumerate().rev() {
                if let Some(m) = &lc.mask {
                    apply_channel_mask(&mut g, m, chan);
                }
                let norm = &mut block.norms[j];
                relu_mask_from_normalized(&mut g, &lc.bn.x_hat, norm.gamma.data(), norm.beta.data(), chan);
                let mut gh = vec![T::zero(); chan.len()];
                norm.backward_batch(&lc.bn, &g, chan, &mut gh)?;
                if j == 0 {
                    conv_backward(&mut block.convs[j], &gh, &lc.input, lengths, n_max, Some(&mut grad_in))?;
                    g = Vec::new();
                } else {
                    let mut gp = vec![T::zero(); chan.len()];
                    conv_backward(&mut block.convs[j], &gh, &lc.input, lengths, n_max, Some(&mut gp))?;
                    g = gp;
                }
            }
            grad = grad_in;
        }

        let mut grad_emb = vec![T::zero(); emb_layout.len()];
        match &mut self.upsampler {
            Upsampler::ScalarCopy { weight, bias } => {
                let (w, gw) = weight.data_and_grad_mut();
                let gb = bias.grad_mut();
                for (b, &len) in lengths.iter().enumerate() {
                    for r in 0..w.len() {
                        for f in 0..e {
                            let src = emb_layout.row(b, f);
                            let dst = chan.row(b, r * e + f);
                            for t in 0..len {
                                let d = grad[dst + t];
                                gw[r] += d * cache.embedded[src + t];
                                gb[r] += d;
                                grad_emb[src + t] += w[r] * d;
                            }
                        }
                    }
                }
            }
            Upsampler::FullProjection(layer) => {
                conv_backward(layer, &grad, &cache.embedded, lengths, n_max, Some(&mut grad_emb))?;
            }
        }
        embed_backward_batch(&cache.ids, &grad_emb, e, emb_layout, self.embedding.grad_mut())?;
        Ok(())
    }
}

fn conv_forward<T: Scalar>(layer: &ConvLayer<T>, input: &[T], lengths: &[usize], n_max: usize, out: &mut [T]) -> Result<()> {
    conv::forward_batch(
        &layer.spec,
        input,
        lengths,
        n_max,
        layer.weight.data(),
        layer.bias.data(),
        out,
    )?;
    Ok(())
}

fn conv_backward<T: Scalar>(
    layer: &mut ConvLayer<T>,
    grad_out: &[T],
    input: &[T],
    lengths: &[usize],
    n_max: usize,
    grad_input: Option<&mut [T]>,
) -> Result<()> {
    let spec: ConvSpec = layer.spec;
    let (w, gw) = layer.weight.data_and_grad_mut();
    let gb = layer.bias.grad_mut();
    conv::backward_batch(&spec, grad_out, input, lengths, n_max, w, grad_input, gw, gb)?;
    Ok(())
}

/// ReLU backward where the pre-activation is `gamma·x̂ + beta`.
fn relu_mask_from_normalized<T: Scalar>(grad: &mut [T], x_hat: &[T], gamma: &[T], beta: &[T], layout: SeqLayout<'_>) {
    for (b, &len) in layout.lengths.iter().enumerate() {
        for c in 0..layout.channels {
            let row = layout.row(b, c);
            for t in row..row + len {
                if gamma[c] * x_hat[t] + beta[c] <= T::zero() {
                    grad[t] = T::zero();
                }
            }
        }
    }
}
