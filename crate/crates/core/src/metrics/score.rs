use serde::{Deserialize, Serialize};

use crate::corpus::DiacriticTable;
use crate::error::{DiacriticsError, Result};

/// A correct/total pair with its ratio; the ratio is absent when nothing
/// was counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Count {
    pub correct: u64,
    pub total: u64,
}

impl Count {
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }

    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += u64::from(ok);
    }

    pub fn merge(&mut self, other: Count) {
        self.correct += other.correct;
        self.total += other.total;
    }
}

impl Serialize for MetricsReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            correct: u64,
            total: u64,
            accuracy: Option<f64>,
        }
        let e = |c: &Count| Entry {
            correct: c.correct,
            total: c.total,
            accuracy: c.accuracy(),
        };
        #[derive(Serialize)]
        struct Report {
            character: Entry,
            important_character: Entry,
            alpha_word: Entry,
            sequence: Entry,
        }
        Report {
            character: e(&self.character),
            important_character: e(&self.important_character),
            alpha_word: e(&self.alpha_word),
            sequence: e(&self.sequence),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MetricsReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Report {
            character: Count,
            important_character: Count,
            alpha_word: Count,
            sequence: Count,
        }
        let r = Report::deserialize(d)?;
        Ok(MetricsReport {
            character: r.character,
            important_character: r.important_character,
            alpha_word: r.alpha_word,
            sequence: r.sequence,
        })
    }
}

/// The four accuracies with their backing counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricsReport {
    /// Every position.
    pub character: Count,
    /// Positions whose reference character has diacritic variants.
    pub important_character: Count,
    /// Whitespace tokens of the reference with at least one letter.
    pub alpha_word: Count,
    pub sequence: Count,
}

impl MetricsReport {
    pub fn merge(&mut self, other: &MetricsReport) {
        self.character.merge(other.character);
        self.important_character.merge(other.important_character);
        self.alpha_word.merge(other.alpha_word);
        self.sequence.merge(other.sequence);
    }
}

pub(crate) fn paired_chars(line: usize, reference: &str, hypothesis: &str) -> Result<(Vec<char>, Vec<char>)> {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    if r.len() != h.len() {
        return Err(DiacriticsError::LengthMismatch {
            line,
            reference: r.len(),
            hypothesis: h.len(),
        });
    }
    Ok((r, h))
}

pub fn score_line(line: usize, reference: &str, hypothesis: &str, table: &DiacriticTable) -> Result<MetricsReport> {
    let (r, h) = paired_chars(line, reference, hypothesis)?;
    let mut report = MetricsReport::default();
    for (&a, &b) in r.iter().zip(&h) {
        report.character.add(a == b);
        if table.is_important(a) {
            report.important_character.add(a == b);
        }
    }
    let mut t = 0;
    while t < r.len() {
        if r[t].is_whitespace() {
            t += 1;
            continue;
        }
        let start = t;
        while t < r.len() && !r[t].is_whitespace() {
            t += 1;
        }
        if r[start..t].iter().any(|c| c.is_alphabetic()) {
            report.alpha_word.add(r[start..t] == h[start..t]);
        }
    }
    report.sequence.add(r == h);
    Ok(report)
}

pub fn score_sequences<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
    table: &DiacriticTable,
) -> Result<MetricsReport> {
    if references.len() != hypotheses.len() {
        return Err(DiacriticsError::invalid(format!(
            "{} reference lines but {} hypothesis lines",
            references.len(),
            hypotheses.len()
        )));
    }
    let mut report = MetricsReport::default();
    for (i, (r, h)) in references.iter().zip(hypotheses).enumerate() {
        report.merge(&score_line(i, r.as_ref(), h.as_ref(), table)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hu() -> DiacriticTable {
        DiacriticTable::for_language("hu").unwrap()
    }

    #[test]
    fn hand_counts() {
        let t = hu();
        let r = score_sequences(&["kórós"], &["koros"], &t).unwrap();
        assert_eq!(r.character, Count { correct: 3, total: 5 });
        assert_eq!(r.important_character, Count { correct: 0, total: 2 });
        assert_eq!(r.alpha_word, Count { correct: 0, total: 1 });
        assert_eq!(r.sequence, Count { correct: 0, total: 1 });
        assert_eq!(r.character.accuracy(), Some(0.6));

        let r = score_sequences(&["kék ég 42"], &["kek ég 42"], &t).unwrap();
        assert_eq!(r.alpha_word, Count { correct: 1, total: 2 });
    }

    #[test]
    fn identity_is_perfect() {
        let t = hu();
        let lines = ["Árvíz volt.", "Még él."];
        let r = score_sequences(&lines, &lines, &t).unwrap();
        for c in [r.character, r.important_character, r.alpha_word, r.sequence] {
            assert_eq!(c.accuracy(), Some(1.0));
        }
    }

    #[test]
    fn length_mismatch_names_the_line() {
        let t = hu();
        let err = score_sequences(&["ab", "cd"], &["ab", "c"], &t).unwrap_err();
        assert!(matches!(err, DiacriticsError::LengthMismatch { line: 1, .. }));
    }

    #[test]
    fn report_serializes_counts_and_ratios() {
        let t = hu();
        let r = score_sequences(&["kórós"], &["koros"], &t).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"character\":{\"correct\":3,\"total\":5,\"accuracy\":0.6}"));
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
