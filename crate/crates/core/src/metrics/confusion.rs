use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::score::paired_chars;
use crate::corpus::DiacriticTable;
use crate::error::{DiacriticsError, Result};

/// Confusions over important positions. Classes are the members of every
/// diacritic family, grouped by base; the extra last column counts
/// predictions outside all families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<char>,
    family_of: Vec<char>,
    index: HashMap<char, usize>,
    /// `counts[actual][predicted]`, with `predicted == classes.len()` for
    /// characters outside every family.
    counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: char,
    pub support: u64,
    pub predicted: u64,
    pub tpr: Option<f64>,
    pub ppv: Option<f64>,
    pub f1: f64,
}

impl ConfusionMatrix {
    pub fn new(table: &DiacriticTable) -> Self {
        let mut classes = Vec::new();
        let mut family_of = Vec::new();
        for (&base, members) in table.families() {
            for &m in members {
                classes.push(m);
                family_of.push(base);
            }
        }
        let index = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let n = classes.len();
        Self {
            classes,
            family_of,
            index,
            counts: vec![vec![0; n + 1]; n],
        }
    }

    /// Builds a matrix from explicit classes (one family per base) for
    /// hand-made examples.
    pub fn from_counts(table: &DiacriticTable, cells: &[(char, char, u64)]) -> Result<Self> {
        let mut m = Self::new(table);
        for &(actual, predicted, n) in cells {
            let Some(&row) = m.index.get(&actual) else {
                return Err(DiacriticsError::invalid(format!("{actual:?} is not an important character")));
            };
            let col = m.column(predicted);
            m.counts[row][col] += n;
        }
        Ok(m)
    }

    fn column(&self, predicted: char) -> usize {
        self.index.get(&predicted).copied().unwrap_or(self.classes.len())
    }

    pub fn add_line(&mut self, line: usize, reference: &str, hypothesis: &str) -> Result<()> {
        let (r, h) = paired_chars(line, reference, hypothesis)?;
        for (a, b) in r.into_iter().zip(h) {
            if let Some(&row) = self.index.get(&a) {
                let col = self.column(b);
                self.counts[row][col] += 1;
            }
        }
        Ok(())
    }

    pub fn classes(&self) -> &[char] {
        &self.classes
    }

    pub fn count(&self, actual: char, predicted: char) -> u64 {
        self.index
            .get(&actual)
            .map_or(0, |&r| self.counts[r][self.column(predicted)])
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    pub fn col_sum(&self, col: usize) -> u64 {
        self.counts.iter().map(|r| r[col]).sum()
    }

    pub fn total(&self) -> u64 {
        (0..self.classes.len()).map(|r| self.row_sum(r)).sum()
    }

    pub fn errors(&self) -> u64 {
        self.total() - (0..self.classes.len()).map(|i| self.counts[i][i]).sum::<u64>()
    }

    /// Errors whose prediction leaves the reference character's family.
    pub fn cross_family(&self) -> u64 {
        let n = self.classes.len();
        let mut total = 0;
        for (r, row) in self.counts.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if c == n || self.family_of[c] != self.family_of[r] {
                    total += v;
                }
            }
        }
        total
    }

    pub fn class_scores(&self) -> Vec<ClassScores> {
        (0..self.classes.len())
            .map(|i| {
                let tp = self.counts[i][i] as f64;
                let support = self.row_sum(i);
                let predicted = self.col_sum(i);
                let tpr = (support > 0).then(|| tp / support as f64);
                let ppv = (predicted > 0).then(|| tp / predicted as f64);
                let f1 = match (tpr, ppv) {
                    (Some(r), Some(p)) if r + p > 0.0 => 2.0 * p * r / (p + r),
                    _ => 0.0,
                };
                ClassScores {
                    class: self.classes[i],
                    support,
                    predicted,
                    tpr,
                    ppv,
                    f1,
                }
            })
            .collect()
    }

    /// Support-weighted mean of per-class F1.
    pub fn weighted_f1(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| {
            let weighted: f64 = self.class_scores().iter().map(|s| s.support as f64 * s.f1).sum();
            weighted / total as f64
        })
    }

    /// One block per family with observations, laid out actual × predicted
    /// with TPR and PPV margins.
    pub fn to_text_table(&self) -> String {
        let n = self.classes.len();
        let scores = self.class_scores();
        let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let mut out = String::new();
        let mut start = 0;
        while start < n {
            let fam = self.family_of[start];
            let end = (start..n).find(|&i| self.family_of[i] != fam).unwrap_or(n);
            if (start..end).any(|i| self.row_sum(i) > 0 || self.col_sum(i) > 0) {
                let _ = write!(out, "{:>8}", "actual");
                for c in &self.classes[start..end] {
                    let _ = write!(out, "{c:>10}");
                }
                let _ = writeln!(out, "{:>10}{:>10}", "other", "TPR");
                for r in start..end {
                    let _ = write!(out, "{:>8}", self.classes[r]);
                    for c in start..end {
                        let _ = write!(out, "{:>10}", self.counts[r][c]);
                    }
                    let outside = self.row_sum(r) - (start..end).map(|c| self.counts[r][c]).sum::<u64>();
                    let _ = writeln!(out, "{outside:>10}{:>10}", fmt(scores[r].tpr));
                }
                let _ = write!(out, "{:>8}", "PPV");
                for s in &scores[start..end] {
                    let _ = write!(out, "{:>10}", fmt(s.ppv));
                }
                let _ = writeln!(out);
                let _ = writeln!(out);
            }
            start = end;
        }
        let _ = writeln!(
            out,
            "positions {}  errors {}  cross-family {}  weighted F1 {}",
            self.total(),
            self.errors(),
            self.cross_family(),
            fmt(self.weighted_f1())
        );
        out
    }

    pub fn report(&self) -> ConfusionReport {
        ConfusionReport {
            classes: self.classes.iter().map(|c| c.to_string()).collect(),
            matrix: self.counts.clone(),
            per_class: self.class_scores(),
            total: self.total(),
            errors: self.errors(),
            cross_family: self.cross_family(),
            weighted_f1: self.weighted_f1(),
        }
    }
}

/// Serializable view; `matrix` rows follow `classes` and carry one extra
/// trailing column for out-of-family predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub classes: Vec<String>,
    pub matrix: Vec<Vec<u64>>,
    pub per_class: Vec<ClassScores>,
    pub total: u64,
    pub errors: u64,
    pub cross_family: u64,
    pub weighted_f1: Option<f64>,
}

pub fn confusion<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
    table: &DiacriticTable,
) -> Result<ConfusionMatrix> {
    if references.len() != hypotheses.len() {
        return Err(DiacriticsError::invalid("reference and hypothesis line counts differ"));
    }
    let mut m = ConfusionMatrix::new(table);
    for (i, (r, h)) in references.iter().zip(hypotheses).enumerate() {
        m.add_line(i, r.as_ref(), h.as_ref())?;
    }
    Ok(m)
}
