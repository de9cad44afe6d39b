use serde::{Deserialize, Serialize};

use crate::atcn::{AtcnModel, Decoding};
use crate::baselines::{copy_restore, DiacriticDictionary};
use crate::corpus::{augment, DiacriticTable};
use crate::error::Result;
use crate::metrics::{score_sequences, MetricsReport};
use crate::seeds;

/// How evaluation inputs are derived from gold lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum StripMode {
    /// Every diacritic removed.
    Full,
    /// Each diacritic removed with probability `p`; line `i` uses the
    /// stream `(seed, i)`.
    Augmented { p: f64, seed: u64 },
}

pub fn strip_inputs<S: AsRef<str>>(gold: &[S], table: &DiacriticTable, mode: StripMode) -> Vec<String> {
    gold.iter()
        .enumerate()
        .map(|(i, line)| match mode {
            StripMode::Full => table.dediacritize(line.as_ref()),
            StripMode::Augmented { p, seed } => {
                let mut rng = nnkernel::rng::stream(seed, &[seeds::EVAL_AUGMENT, i as u64]);
                augment(line.as_ref(), table, p, &mut rng)
            }
        })
        .collect()
}

/// Anything that maps input lines to restored lines of equal length.
pub trait Restorer {
    fn restore_lines(&self, inputs: &[String]) -> Result<Vec<String>>;
}

pub struct CopyRestorer;

impl Restorer for CopyRestorer {
    fn restore_lines(&self, inputs: &[String]) -> Result<Vec<String>> {
        Ok(inputs.iter().map(|s| copy_restore(s)).collect())
    }
}

pub struct DictionaryRestorer<'a> {
    pub dictionary: &'a DiacriticDictionary,
    pub table: &'a DiacriticTable,
}

impl Restorer for DictionaryRestorer<'_> {
    fn restore_lines(&self, inputs: &[String]) -> Result<Vec<String>> {
        Ok(inputs.iter().map(|s| self.dictionary.restore(s, self.table)).collect())
    }
}

pub struct ModelRestorer<'a> {
    pub model: &'a AtcnModel<f32>,
    pub decoding: Decoding,
}

impl Restorer for ModelRestorer<'_> {
    fn restore_lines(&self, inputs: &[String]) -> Result<Vec<String>> {
        self.model.restore_lines(inputs, self.decoding)
    }
}

/// Restores stripped gold lines and scores them against the gold.
pub fn evaluate<S: AsRef<str>>(
    restorer: &dyn Restorer,
    gold: &[S],
    table: &DiacriticTable,
    mode: StripMode,
) -> Result<MetricsReport> {
    let inputs = strip_inputs(gold, table, mode);
    let outputs = restorer.restore_lines(&inputs)?;
    score_sequences(gold, &outputs, table)
}

pub fn evaluate_model<S: AsRef<str>>(
    model: &AtcnModel<f32>,
    gold: &[S],
    table: &DiacriticTable,
    mode: StripMode,
) -> Result<MetricsReport> {
    evaluate(
        &ModelRestorer {
            model,
            decoding: Decoding::Unconstrained,
        },
        gold,
        table,
        mode,
    )
}
