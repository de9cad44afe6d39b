//! Training loop: augmented batches, masked cross-entropy, Adam with
//! global-norm clipping, per-epoch dev evaluation and checkpoints.

mod eval;

use std::path::{Path, PathBuf};
use std::time::Instant;

use nnkernel::adam::{AdamConfig, AdamState};
use nnkernel::loss::softmax_cross_entropy_batch;
use nnkernel::rng::derive_seed;
use serde::{Deserialize, Serialize};

use crate::atcn::format::{decode, encode};
use crate::atcn::{AtcnConfig, AtcnModel, Blob, CharVocab, FormatError, DEFAULT_MIN_COUNT};
use crate::corpus::{make_epoch, DiacriticTable, EpochConfig, LineSource, PersistentBatches, SequenceBatch};
use crate::error::{DiacriticsError, Result};
use crate::metrics::{Count, MetricsReport};
use crate::seeds;

pub use eval::{
    evaluate, evaluate_model, strip_inputs, CopyRestorer, DictionaryRestorer, ModelRestorer, Restorer, StripMode,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub epoch_sequence_limit: usize,
    pub batch_size: usize,
    pub batches_per_epoch: usize,
    pub augment_p: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Global gradient norm ceiling.
    pub clip_norm: f64,
    pub seed: u64,
    /// Checkpoint every this many epochs (and after the last one).
    pub checkpoint_every: usize,
    pub eval_every_n_epochs: usize,
    pub vocab_min_count: usize,
    pub language: String,
    pub model: AtcnConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let epoch = EpochConfig::default();
        let adam = AdamConfig::default();
        Self {
            epochs: 10,
            epoch_sequence_limit: epoch.epoch_sequence_limit,
            batch_size: epoch.batch_size,
            batches_per_epoch: epoch.batches_per_epoch,
            augment_p: epoch.augment_p,
            learning_rate: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_epsilon: adam.eps,
            clip_norm: 5.0,
            seed: 0,
            checkpoint_every: 1,
            eval_every_n_epochs: 1,
            vocab_min_count: DEFAULT_MIN_COUNT,
            language: "hu".into(),
            model: AtcnConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn epoch_config(&self) -> EpochConfig {
        EpochConfig {
            epoch_sequence_limit: self.epoch_sequence_limit,
            batch_size: self.batch_size,
            batches_per_epoch: self.batches_per_epoch,
            augment_p: self.augment_p,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.epoch_config().validate()?;
        self.model.validate()?;
        if self.epochs == 0 || self.checkpoint_every == 0 || self.eval_every_n_epochs == 0 {
            return Err(DiacriticsError::invalid("epoch counts must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.clip_norm > 0.0) {
            return Err(DiacriticsError::invalid("learning rate and clip norm must be positive"));
        }
        DiacriticTable::for_language(&self.language)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub steps: usize,
    pub mean_loss: f64,
    pub step_losses: Vec<f64>,
    pub dev: Option<MetricsReport>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Directory for `last.atcn`, `last.optim` and `best.atcn`.
    pub checkpoint_dir: Option<PathBuf>,
    /// Continue from the checkpoint in `checkpoint_dir` when present.
    pub resume: bool,
    /// Stop after the first epoch whose dev character accuracy reaches this.
    pub target_character_accuracy: Option<f64>,
    /// Stop after the first epoch that ends past this wall-clock budget.
    pub time_limit: Option<std::time::Duration>,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    /// Parameters after the last epoch.
    pub model: AtcnModel<f32>,
    /// Best model by dev alpha-word accuracy, when a dev set was given.
    pub best: Option<(usize, AtcnModel<f32>)>,
    pub log: Vec<EpochRecord>,
}

impl TrainingRun {
    pub fn best_or_last(&self) -> &AtcnModel<f32> {
        self.best.as_ref().map_or(&self.model, |(_, m)| m)
    }
}

pub const LAST_MODEL: &str = "last.atcn";
pub const LAST_OPTIMIZER: &str = "last.optim";
pub const BEST_MODEL: &str = "best.atcn";

#[derive(Serialize, Deserialize)]
struct OptimizerMeta {
    kind: String,
    step: u64,
    epochs_done: usize,
    best_epoch: Option<usize>,
    best_alpha_word: Option<Count>,
    log: Vec<EpochRecord>,
}

const OPTIMIZER_KIND: &str = "adam-state";

/// Loop state that survives a checkpoint.
struct RunState {
    model: AtcnModel<f32>,
    adam: AdamState<f32>,
    epochs_done: usize,
    best: Option<(usize, Count, AtcnModel<f32>)>,
    log: Vec<EpochRecord>,
}

fn better(a: Count, b: Count) -> bool {
    // a.correct / a.total > b.correct / b.total without rounding.
    u128::from(a.correct) * u128::from(b.total) > u128::from(b.correct) * u128::from(a.total)
}

fn param_sizes(model: &AtcnModel<f32>) -> Vec<usize> {
    model.parameters().iter().map(|(_, t)| t.len()).collect()
}

pub fn train_model<S: LineSource + ?Sized>(
    config: &TrainConfig,
    train: &S,
    dev: &[String],
    options: &TrainOptions,
) -> Result<TrainingRun> {
    config.validate()?;
    if train.is_empty() {
        return Err(DiacriticsError::EmptyCorpus("training set is empty".into()));
    }
    let table = DiacriticTable::for_language(&config.language)?;
    let resume_from = options
        .checkpoint_dir
        .as_deref()
        .filter(|d| options.resume && d.join(LAST_MODEL).exists());
    let mut state = match resume_from {
        Some(dir) => load_checkpoint(dir)?,
        None => {
            let lines = (0..train.len()).map(|i| train.line(i)).collect::<Result<Vec<_>>>()?;
            let vocab = CharVocab::build(lines.iter().map(String::as_str), config.vocab_min_count, Some(&table))?;
            let model = AtcnModel::new(config.model.clone(), vocab, Some(config.language.clone()), config.seed)?;
            RunState {
                adam: AdamState::new(&param_sizes(&model)),
                model,
                epochs_done: 0,
                best: None,
                log: Vec::new(),
            }
        }
    };
    if let Some(dir) = &options.checkpoint_dir {
        std::fs::create_dir_all(dir).map_err(|e| DiacriticsError::io(dir, e))?;
    }

    let epoch_cfg = config.epoch_config();
    let partition = PersistentBatches::new(train.len(), config.batch_size, config.seed)?;
    let adam_cfg = config.adam();
    let run_started = Instant::now();
    for epoch in state.epochs_done..config.epochs {
        let started = Instant::now();
        let mut losses = Vec::new();
        let vocab = state.model.vocab.clone();
        let batches = make_epoch(
            train,
            &partition,
            &vocab,
            &table,
            &epoch_cfg,
            config.seed,
            epoch,
        )?;
        for (draw, batch) in batches.enumerate() {
            let batch = batch?;
            let seed = derive_seed(config.seed, &[seeds::DROPOUT_STEP, epoch as u64, draw as u64]);
            let loss = train_step(&mut state.model, &mut state.adam, &adam_cfg, config.clip_norm, &batch, seed)
                .map_err(|e| match e {
                    DiacriticsError::Divergence { .. } => DiacriticsError::Divergence { epoch, step: draw },
                    other => other,
                })?;
            losses.push(loss);
        }
        let mut record = EpochRecord {
            epoch,
            steps: losses.len(),
            mean_loss: losses.iter().sum::<f64>() / losses.len().max(1) as f64,
            step_losses: losses,
            dev: None,
            seconds: 0.0,
        };
        let last = epoch + 1 == config.epochs;
        if !dev.is_empty() && ((epoch + 1) % config.eval_every_n_epochs == 0 || last) {
            let report = evaluate_model(&state.model, dev, &table, StripMode::Full)?;
            let improved = state.best.as_ref().map_or(true, |(_, c, _)| better(report.alpha_word, *c));
            if improved {
                state.best = Some((epoch, report.alpha_word, state.model.clone()));
                if let Some(dir) = &options.checkpoint_dir {
                    write_atomic(&dir.join(BEST_MODEL), &state.model.to_bytes()?)?;
                }
            }
            record.dev = Some(report);
        }
        record.seconds = started.elapsed().as_secs_f64();
        log::info!(
            "epoch {epoch}: loss {:.5}, dev alpha-word {}, {:.1}s",
            record.mean_loss,
            record
                .dev
                .and_then(|d| d.alpha_word.accuracy())
                .map_or_else(|| "-".into(), |a| format!("{a:.4}")),
            record.seconds
        );
        let reached = match (options.target_character_accuracy, record.dev) {
            (Some(target), Some(dev)) => dev.character.accuracy().is_some_and(|a| a >= target),
            _ => false,
        };
        let out_of_time = options.time_limit.is_some_and(|t| run_started.elapsed() >= t);
        state.log.push(record);
        state.epochs_done = epoch + 1;
        let stop = reached || out_of_time;
        if let Some(dir) = &options.checkpoint_dir {
            if (epoch + 1) % config.checkpoint_every == 0 || last || stop {
                save_checkpoint(dir, &state)?;
            }
        }
        if stop {
            log::info!("stopping after epoch {epoch}");
            break;
        }
    }
    Ok(TrainingRun {
        model: state.model,
        best: state.best.map(|(e, _, m)| (e, m)),
        log: state.log,
    })
}

/// One optimizer step on `batch`; returns the loss before the update.
pub fn train_step(
    model: &mut AtcnModel<f32>,
    adam: &mut AdamState<f32>,
    adam_cfg: &AdamConfig,
    clip_norm: f64,
    batch: &SequenceBatch,
    dropout_seed: u64,
) -> Result<f64> {
    model.zero_grad();
    let (logits, cache) = model.forward_train(&batch.input_ids, &batch.lengths, batch.n_max, dropout_seed)?;
    let (loss, grad) = softmax_cross_entropy_batch(
        &logits,
        &batch.target_ids,
        &batch.mask,
        batch.batch_size(),
        model.vocab_size(),
        batch.n_max,
    )?;
    if !loss.is_finite() {
        return Err(DiacriticsError::Divergence { epoch: 0, step: 0 });
    }
    model.backward(&cache, &grad)?;
    clip_gradients(model, clip_norm);
    adam.step(adam_cfg, &mut model.parameters_mut())?;
    if !model.parameters().iter().all(|(_, t)| t.all_finite()) {
        return Err(DiacriticsError::Divergence { epoch: 0, step: 0 });
    }
    Ok(f64::from(loss))
}

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_gradients(model: &mut AtcnModel<f32>, max_norm: f64) -> f64 {
    let mut params = model.parameters_mut();
    let norm = params
        .iter_mut()
        .map(|p| p.grad_mut().iter().map(|&g| f64::from(g) * f64::from(g)).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let scale = (max_norm / norm) as f32;
        for p in params {
            p.grad_mut().iter_mut().for_each(|g| *g *= scale);
        }
    }
    norm
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| DiacriticsError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| DiacriticsError::io(path, e))
}

fn save_checkpoint(dir: &Path, state: &RunState) -> Result<()> {
    let names: Vec<(String, Vec<usize>)> = state
        .model
        .parameters()
        .into_iter()
        .map(|(n, t)| (n, t.shape().to_vec()))
        .collect();
    let mut blobs = Vec::with_capacity(2 * names.len());
    for (prefix, moments) in [("m", &state.adam.m), ("v", &state.adam.v)] {
        for ((name, shape), data) in names.iter().zip(moments) {
            blobs.push(Blob {
                name: format!("{prefix}.{name}"),
                shape: shape.clone(),
                data: data.clone(),
            });
        }
    }
    let meta = OptimizerMeta {
        kind: OPTIMIZER_KIND.into(),
        step: state.adam.step,
        epochs_done: state.epochs_done,
        best_epoch: state.best.as_ref().map(|(e, _, _)| *e),
        best_alpha_word: state.best.as_ref().map(|(_, c, _)| *c),
        log: state.log.clone(),
    };
    write_atomic(&dir.join(LAST_MODEL), &state.model.to_bytes()?)?;
    write_atomic(&dir.join(LAST_OPTIMIZER), &encode(&meta, &blobs)?)
}

fn load_checkpoint(dir: &Path) -> Result<RunState> {
    let model = AtcnModel::load(dir.join(LAST_MODEL))?;
    let path = dir.join(LAST_OPTIMIZER);
    let bytes = std::fs::read(&path).map_err(|e| DiacriticsError::io(&path, e))?;
    let (meta, blobs): (OptimizerMeta, Vec<Blob>) = decode(&bytes)?;
    if meta.kind != OPTIMIZER_KIND {
        return Err(FormatError::Header(format!("{} is not optimizer state", path.display())).into());
    }
    let names: Vec<String> = model.parameters().into_iter().map(|(n, _)| n).collect();
    let mut by_name: std::collections::HashMap<String, Vec<f32>> =
        blobs.into_iter().map(|b| (b.name, b.data)).collect();
    let mut adam = AdamState::new(&param_sizes(&model));
    adam.step = meta.step;
    for (i, name) in names.iter().enumerate() {
        for (prefix, dst) in [("m", &mut adam.m[i]), ("v", &mut adam.v[i])] {
            let key = format!("{prefix}.{name}");
            let data = by_name
                .remove(&key)
                .ok_or_else(|| FormatError::Header(format!("missing blob {key:?}")))?;
            if data.len() != dst.len() {
                return Err(FormatError::SizeMismatch {
                    blob: key,
                    expected: 4 * dst.len() as u64,
                    actual: 4 * data.len() as u64,
                }
                .into());
            }
            *dst = data;
        }
    }
    let best = match (meta.best_epoch, meta.best_alpha_word) {
        (Some(e), Some(c)) => Some((e, c, AtcnModel::load(dir.join(BEST_MODEL))?)),
        _ => None,
    };
    Ok(RunState {
        model,
        adam,
        epochs_done: meta.epochs_done,
        best,
        log: meta.log,
    })
}
