use serde::{Deserialize, Serialize};

use super::{AtcnModel, PAD, UNK};
use crate::corpus::{DiacriticTable, SequenceBatch};
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoding {
    /// Argmax over the whole vocabulary; PAD or UNK falls back to the input.
    #[default]
    Unconstrained,
    /// Argmax over the input character and its diacritic variants.
    VariantConstrained,
}

/// Initial inference capacity of fixed-size consumers.
pub const INITIAL_CAPACITY: usize = 512;

/// Smallest `512 · 2^k` that holds `len` characters.
pub fn capacity_for(len: usize) -> usize {
    let mut cap = INITIAL_CAPACITY;
    while cap < len {
        cap *= 2;
    }
    cap
}

/// Upper bound on padded positions per restoration batch.
const BATCH_POSITIONS: usize = 16_384;

impl AtcnModel<f32> {
    /// The table of the model's language, when it has a known one.
    pub fn table(&self) -> Option<DiacriticTable> {
        self.language
            .as_deref()
            .and_then(|code| DiacriticTable::for_language(code).ok())
    }

    pub fn restore(&self, text: &str, decoding: Decoding) -> Result<String> {
        Ok(self.restore_lines(&[text], decoding)?.pop().unwrap_or_default())
    }

    /// Restores each line independently; results do not depend on how lines
    /// are grouped into batches.
    pub fn restore_lines<S: AsRef<str>>(&self, lines: &[S], decoding: Decoding) -> Result<Vec<String>> {
        let table = self.table();
        let chars: Vec<Vec<char>> = lines.iter().map(|l| l.as_ref().chars().collect()).collect();
        let mut out = vec![String::new(); lines.len()];
        let mut start = 0;
        while start < chars.len() {
            let mut end = start;
            let mut widest = 0;
            while end < chars.len() {
                let w = widest.max(chars[end].len());
                if end > start && w * (end - start + 1) > BATCH_POSITIONS {
                    break;
                }
                widest = w;
                end += 1;
            }
            let group: Vec<usize> = (start..end).filter(|&i| !chars[i].is_empty()).collect();
            if !group.is_empty() {
                let inputs: Vec<Vec<char>> = group.iter().map(|&i| chars[i].clone()).collect();
                let restored = self.restore_batch(&inputs, widest, decoding, table.as_ref())?;
                for (i, s) in group.into_iter().zip(restored) {
                    out[i] = s;
                }
            }
            start = end;
        }
        Ok(out)
    }

    /// Runs one inference padded to `capacity` positions, as a fixed-size
    /// consumer would; the result equals [`AtcnModel::restore`].
    pub fn restore_padded(&self, text: &str, capacity: usize, decoding: Decoding) -> Result<String> {
        let chars: Vec<char> = text.chars().collect();
        if chars.is_empty() {
            return Ok(String::new());
        }
        let table = self.table();
        Ok(self
            .restore_batch(&[chars], capacity, decoding, table.as_ref())?
            .pop()
            .unwrap_or_default())
    }

    fn restore_batch(
        &self,
        inputs: &[Vec<char>],
        n_max: usize,
        decoding: Decoding,
        table: Option<&DiacriticTable>,
    ) -> Result<Vec<String>> {
        let batch = SequenceBatch::with_capacity(&self.vocab, inputs, n_max)?;
        let logits = self.forward_eval(&batch.input_ids, &batch.lengths, n_max)?;
        let v = self.vocab_size();
        let mut candidates: Vec<u32> = Vec::new();
        Ok(inputs
            .iter()
            .enumerate()
            .map(|(b, seq)| {
                let base = b * v * n_max;
                seq.iter()
                    .enumerate()
                    .map(|(t, &ch)| {
                        let score = |id: u32| logits[base + id as usize * n_max + t];
                        match decoding {
                            Decoding::Unconstrained => {
                                let mut best = 0u32;
                                for id in 1..v as u32 {
                                    if score(id) > score(best) {
                                        best = id;
                                    }
                                }
                                if best == PAD || best == UNK {
                                    ch
                                } else {
                                    self.vocab.decode(best).unwrap_or(ch)
                                }
                            }
                            Decoding::VariantConstrained => {
                                candidates.clear();
                                let variants = table.map(|t| t.variants(ch)).unwrap_or_default();
                                candidates.extend(
                                    std::iter::once(ch)
                                        .chain(variants)
                                        .filter(|&c| self.vocab.contains(c))
                                        .map(|c| self.vocab.id(c)),
                                );
                                candidates.sort_unstable();
                                candidates.dedup();
                                let mut best: Option<u32> = None;
                                for &id in &candidates {
                                    if best.map_or(true, |b| score(id) > score(b)) {
                                        best = Some(id);
                                    }
                                }
                                best.and_then(|id| self.vocab.decode(id)).unwrap_or(ch)
                            }
                        }
                    })
                    .collect()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_doubles_from_512() {
        assert_eq!(capacity_for(0), 512);
        assert_eq!(capacity_for(512), 512);
        assert_eq!(capacity_for(513), 1024);
        assert_eq!(capacity_for(3000), 4096);
    }
}
