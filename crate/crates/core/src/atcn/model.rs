use nnkernel::batchnorm::BatchNormState;
use nnkernel::conv::ConvSpec;
use nnkernel::{Scalar, Tensor};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{AtcnConfig, CharVocab, UpsamplerKind};
use crate::error::Result;
use crate::seeds;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T> {
    pub spec: ConvSpec,
    /// `[out × in × k]`.
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> ConvLayer<T> {
    fn zeroed(spec: ConvSpec) -> Self {
        Self {
            weight: Tensor::zeros(vec![spec.out_channels, spec.in_channels, spec.kernel_size]),
            bias: Tensor::zeros(vec![spec.out_channels]),
            spec,
        }
    }

    /// Uniform in `±sqrt(6 / fan_in)`, zero bias.
    fn he_uniform(spec: ConvSpec, rng: &mut impl Rng) -> Self {
        let mut layer = Self::zeroed(spec);
        let bound = (6.0 / (spec.in_channels * spec.kernel_size) as f64).sqrt();
        for w in layer.weight.data_mut() {
            *w = T::cast(rng.gen_range(-bound..bound));
        }
        layer
    }

    fn cast<U: Scalar>(&self) -> ConvLayer<U> {
        ConvLayer {
            spec: self.spec,
            weight: self.weight.cast(),
            bias: self.bias.cast(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Upsampler<T> {
    ScalarCopy { weight: Tensor<T>, bias: Tensor<T> },
    FullProjection(ConvLayer<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBlock<T> {
    pub convs: Vec<ConvLayer<T>>,
    pub norms: Vec<BatchNormState<T>>,
}

/// Parameters, architecture and vocabulary of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct AtcnModel<T = f32> {
    pub config: AtcnConfig,
    pub vocab: CharVocab,
    /// Language code of the diacritic table the model was trained with.
    pub language: Option<String>,
    /// `[V × E]`.
    pub embedding: Tensor<T>,
    pub upsampler: Upsampler<T>,
    pub blocks: Vec<ResidualBlock<T>>,
    /// 1×1 convolution `C -> V`.
    pub projection: ConvLayer<T>,
}

impl<T: Scalar> AtcnModel<T> {
    /// Seeded initialization: He-uniform convolutions, zero biases,
    /// `N(0, 1)/sqrt(E)` embeddings, unit copy scales.
    pub fn new(config: AtcnConfig, vocab: CharVocab, language: Option<String>, seed: u64) -> Result<Self> {
        let mut model = Self::zeroed(config, vocab, language)?;
        let mut rng = nnkernel::rng::stream(seed, &[seeds::INIT]);
        let scale = 1.0 / (model.config.embedding_dim as f64).sqrt();
        for w in model.embedding.data_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *w = T::cast(z * scale);
        }
        model.upsampler = match &model.upsampler {
            Upsampler::ScalarCopy { weight, bias } => Upsampler::ScalarCopy {
                weight: Tensor::from_vec(vec![T::one(); weight.len()], vec![weight.len()])?,
                bias: bias.clone(),
            },
            Upsampler::FullProjection(l) => Upsampler::FullProjection(ConvLayer::he_uniform(l.spec, &mut rng)),
        };
        for block in &mut model.blocks {
            for conv in &mut block.convs {
                *conv = ConvLayer::he_uniform(conv.spec, &mut rng);
            }
        }
        model.projection = ConvLayer::he_uniform(model.projection.spec, &mut rng);
        Ok(model)
    }

    /// Zero weights, biases and embeddings; batch norms at their defaults
    /// (unit scale, identity statistics).
    pub fn zeroed(config: AtcnConfig, vocab: CharVocab, language: Option<String>) -> Result<Self> {
        config.validate()?;
        let (e, c, v, k) = (config.embedding_dim, config.channels, vocab.size(), config.kernel_size);
        let upsampler = match config.upsampler {
            UpsamplerKind::ScalarCopy => Upsampler::ScalarCopy {
                weight: Tensor::zeros(vec![config.copies()]),
                bias: Tensor::zeros(vec![config.copies()]),
            },
            UpsamplerKind::FullProjection => Upsampler::FullProjection(ConvLayer::zeroed(ConvSpec::new(1, 1, e, c)?)),
        };
        let mut blocks = Vec::with_capacity(config.num_blocks);
        for &d in &config.dilations {
            let mut convs = Vec::new();
            let mut norms = Vec::new();
            for _ in 0..config.convs_per_block {
                convs.push(ConvLayer::zeroed(ConvSpec::new(k, d, c, c)?));
                norms.push(BatchNormState::new(c));
            }
            blocks.push(ResidualBlock { convs, norms });
        }
        Ok(Self {
            embedding: Tensor::zeros(vec![v, e]),
            upsampler,
            blocks,
            projection: ConvLayer::zeroed(ConvSpec::new(1, 1, c, v)?),
            config,
            vocab,
            language,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.size()
    }

    /// Learnable tensors with their blob names, in serialization order.
    pub fn parameters(&self) -> Vec<(String, &Tensor<T>)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        match &self.upsampler {
            Upsampler::ScalarCopy { weight, bias } => {
                out.push(("upsample.weight".into(), weight));
                out.push(("upsample.bias".into(), bias));
            }
            Upsampler::FullProjection(l) => {
                out.push(("upsample.weight".into(), &l.weight));
                out.push(("upsample.bias".into(), &l.bias));
            }
        }
        for (i, block) in self.blocks.iter().enumerate() {
            for (j, (conv, bn)) in block.convs.iter().zip(&block.norms).enumerate() {
                out.push((format!("block{i}.conv{j}.weight"), &conv.weight));
                out.push((format!("block{i}.conv{j}.bias"), &conv.bias));
                out.push((format!("block{i}.bn{j}.gamma"), &bn.gamma));
                out.push((format!("block{i}.bn{j}.beta"), &bn.beta));
            }
        }
        out.push(("projection.weight".into(), &self.projection.weight));
        out.push(("projection.bias".into(), &self.projection.bias));
        out
    }

    /// Same order as [`AtcnModel::parameters`].
    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut out = vec![&mut self.embedding];
        match &mut self.upsampler {
            Upsampler::ScalarCopy { weight, bias } => {
                out.push(weight);
                out.push(bias);
            }
            Upsampler::FullProjection(l) => {
                out.push(&mut l.weight);
                out.push(&mut l.bias);
            }
        }
        for block in &mut self.blocks {
            for (conv, bn) in block.convs.iter_mut().zip(block.norms.iter_mut()) {
                out.push(&mut conv.weight);
                out.push(&mut conv.bias);
                out.push(&mut bn.gamma);
                out.push(&mut bn.beta);
            }
        }
        out.push(&mut self.projection.weight);
        out.push(&mut self.projection.bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in self.parameters_mut() {
            p.zero_grad();
        }
    }

    pub fn cast<U: Scalar>(&self) -> AtcnModel<U> {
        AtcnModel {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            language: self.language.clone(),
            embedding: self.embedding.cast(),
            upsampler: match &self.upsampler {
                Upsampler::ScalarCopy { weight, bias } => Upsampler::ScalarCopy {
                    weight: weight.cast(),
                    bias: bias.cast(),
                },
                Upsampler::FullProjection(l) => Upsampler::FullProjection(l.cast()),
            },
            blocks: self
                .blocks
                .iter()
                .map(|b| ResidualBlock {
                    convs: b.convs.iter().map(ConvLayer::cast).collect(),
                    norms: b.norms.iter().map(BatchNormState::cast).collect(),
                })
                .collect(),
            projection: self.projection.cast(),
        }
    }
}
