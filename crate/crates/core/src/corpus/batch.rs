use rand::seq::SliceRandom;
use rand::Rng;

use super::augment::{augment, check_probability};
use super::{DiacriticTable, LineSource};
use crate::atcn::{CharVocab, PAD};
use crate::error::{DiacriticsError, Result};
use crate::seeds;

/// Padded id matrices `[B × n_max]` for one batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceBatch {
    pub input_ids: Vec<u32>,
    pub target_ids: Vec<u32>,
    /// True exactly at `t < lengths[b]`.
    pub mask: Vec<bool>,
    pub lengths: Vec<usize>,
    pub n_max: usize,
}

impl SequenceBatch {
    /// Builds a batch from (input, target) pairs of equal character length.
    pub fn from_pairs<A: AsRef<str>, B: AsRef<str>>(vocab: &CharVocab, pairs: &[(A, B)]) -> Result<Self> {
        let inputs: Vec<Vec<char>> = pairs.iter().map(|(a, _)| a.as_ref().chars().collect()).collect();
        let targets: Vec<Vec<char>> = pairs.iter().map(|(_, b)| b.as_ref().chars().collect()).collect();
        for (i, (a, b)) in inputs.iter().zip(&targets).enumerate() {
            if a.len() != b.len() {
                return Err(DiacriticsError::LengthMismatch {
                    line: i,
                    reference: b.len(),
                    hypothesis: a.len(),
                });
            }
        }
        let n_max = inputs.iter().map(Vec::len).max().unwrap_or(0);
        let mut batch = Self::with_capacity(vocab, &inputs, n_max)?;
        for (b, t) in targets.iter().enumerate() {
            for (j, &c) in t.iter().enumerate() {
                batch.target_ids[b * n_max + j] = vocab.id(c);
            }
        }
        Ok(batch)
    }

    /// Inference batch padded to `n_max`, which must cover every sequence;
    /// targets mirror the inputs.
    pub fn with_capacity(vocab: &CharVocab, inputs: &[Vec<char>], n_max: usize) -> Result<Self> {
        let batch = inputs.len();
        let mut input_ids = vec![PAD; batch * n_max];
        let mut mask = vec![false; batch * n_max];
        let mut lengths = Vec::with_capacity(batch);
        for (b, s) in inputs.iter().enumerate() {
            if s.len() > n_max {
                return Err(DiacriticsError::invalid(format!(
                    "sequence {b} has {} characters, capacity is {n_max}",
                    s.len()
                )));
            }
            for (j, &c) in s.iter().enumerate() {
                input_ids[b * n_max + j] = vocab.id(c);
                mask[b * n_max + j] = true;
            }
            lengths.push(s.len());
        }
        Ok(Self {
            target_ids: input_ids.clone(),
            input_ids,
            mask,
            lengths,
            n_max,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.lengths.len()
    }

    pub fn valid_positions(&self) -> usize {
        self.lengths.iter().sum()
    }
}

/// Batching regime of one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochConfig {
    pub epoch_sequence_limit: usize,
    pub batch_size: usize,
    pub batches_per_epoch: usize,
    pub augment_p: f64,
}

impl Default for EpochConfig {
    fn default() -> Self {
        Self {
            epoch_sequence_limit: 100_000,
            batch_size: 200,
            batches_per_epoch: 500,
            augment_p: 0.8,
        }
    }
}

impl EpochConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epoch_sequence_limit == 0 || self.batch_size == 0 || self.batches_per_epoch == 0 {
            return Err(DiacriticsError::invalid("epoch counts must be positive"));
        }
        check_probability(self.augment_p)
    }

    /// Draws per epoch: the batch count, further capped by the sequence limit.
    pub fn draws_per_epoch(&self) -> usize {
        self.batches_per_epoch.min((self.epoch_sequence_limit / self.batch_size).max(1))
    }
}

/// Fixed partition of the training lines into batches, made once per run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistentBatches {
    batches: Vec<Vec<usize>>,
}

impl PersistentBatches {
    /// Shuffles line indices under `seed` and cuts them into chunks of
    /// `batch_size`; a final short chunk is kept.
    pub fn new(lines: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if lines == 0 {
            return Err(DiacriticsError::EmptyCorpus("no training lines".into()));
        }
        if batch_size == 0 {
            return Err(DiacriticsError::invalid("batch size must be positive"));
        }
        if batch_size > lines {
            log::warn!("batch size {batch_size} exceeds the {lines} training lines; using one batch");
        }
        let mut order: Vec<usize> = (0..lines).collect();
        order.shuffle(&mut nnkernel::rng::stream(seed, &[seeds::PARTITION]));
        Ok(Self {
            batches: order.chunks(batch_size).map(<[usize]>::to_vec).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn batch(&self, index: usize) -> &[usize] {
        &self.batches[index]
    }

    /// Batch indices drawn uniformly with replacement for `epoch`.
    pub fn draws(&self, config: &EpochConfig, seed: u64, epoch: usize) -> Vec<usize> {
        let mut rng = nnkernel::rng::stream(seed, &[seeds::DRAWS, epoch as u64]);
        (0..config.draws_per_epoch())
            .map(|_| rng.gen_range(0..self.batches.len()))
            .collect()
    }
}

/// One epoch of augmented batches, read lazily from the line source.
pub struct Epoch<'a, S: LineSource + ?Sized> {
    source: &'a S,
    partition: &'a PersistentBatches,
    vocab: &'a CharVocab,
    table: &'a DiacriticTable,
    augment_p: f64,
    seed: u64,
    epoch: usize,
    draws: Vec<usize>,
    next: usize,
}

pub fn make_epoch<'a, S: LineSource + ?Sized>(
    source: &'a S,
    partition: &'a PersistentBatches,
    vocab: &'a CharVocab,
    table: &'a DiacriticTable,
    config: &EpochConfig,
    seed: u64,
    epoch: usize,
) -> Result<Epoch<'a, S>> {
    config.validate()?;
    Ok(Epoch {
        source,
        partition,
        vocab,
        table,
        augment_p: config.augment_p,
        seed,
        epoch,
        draws: partition.draws(config, seed, epoch),
        next: 0,
    })
}

impl<S: LineSource + ?Sized> Epoch<'_, S> {
    pub fn draws(&self) -> &[usize] {
        &self.draws
    }

    /// Skips ahead to draw `index`, for resuming inside an epoch.
    pub fn seek(&mut self, index: usize) {
        self.next = index.min(self.draws.len());
    }
}

/// Batch `batch_index` with augmentation keyed by `(seed, epoch, draw)`.
pub fn materialize<S: LineSource + ?Sized>(
    source: &S,
    lines: &[usize],
    vocab: &CharVocab,
    table: &DiacriticTable,
    augment_p: f64,
    aug_seed: u64,
) -> Result<SequenceBatch> {
    let mut rng = nnkernel::rng::rng_from_seed(aug_seed);
    let mut pairs = Vec::with_capacity(lines.len());
    for &i in lines {
        let target = source.line(i)?;
        let input = augment(&target, table, augment_p, &mut rng);
        pairs.push((input, target));
    }
    SequenceBatch::from_pairs(vocab, &pairs)
}

impl<S: LineSource + ?Sized> Iterator for Epoch<'_, S> {
    type Item = Result<SequenceBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        let draw = self.next;
        let &batch = self.draws.get(draw)?;
        self.next += 1;
        let aug_seed = nnkernel::rng::derive_seed(self.seed, &[seeds::AUGMENT, self.epoch as u64, draw as u64]);
        Some(materialize(
            self.source,
            self.partition.batch(batch),
            self.vocab,
            self.table,
            self.augment_p,
            aug_seed,
        ))
    }
}
