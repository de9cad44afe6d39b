//! Copy and most-frequent-form dictionary baselines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::corpus::DiacriticTable;
use crate::error::{DiacriticsError, Result};

pub fn copy_restore(text: &str) -> String {
    text.to_string()
}

/// Maximal runs of alphabetic characters with their character offsets.
pub fn alphabetic_runs(chars: &[char]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, c) in chars.iter().enumerate() {
        match (c.is_alphabetic(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, chars.len()));
    }
    runs
}

/// Observed diacritized forms per word base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiacriticDictionary {
    counts: BTreeMap<String, BTreeMap<String, u64>>,
    best: BTreeMap<String, String>,
}

impl DiacriticDictionary {
    pub fn build<S: AsRef<str>>(lines: &[S], table: &DiacriticTable) -> Self {
        let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for line in lines {
            let chars: Vec<char> = line.as_ref().chars().collect();
            for (s, e) in alphabetic_runs(&chars) {
                let form: String = chars[s..e].iter().collect();
                let base = table.dediacritize(&form);
                *counts.entry(base).or_default().entry(form).or_default() += 1;
            }
        }
        Self::from_counts(counts)
    }

    fn from_counts(counts: BTreeMap<String, BTreeMap<String, u64>>) -> Self {
        // Forms iterate in codepoint order, so keeping the first maximum
        // breaks ties towards the smaller form.
        let best = counts
            .iter()
            .filter_map(|(base, forms)| {
                let mut top: Option<(&String, u64)> = None;
                for (form, &n) in forms {
                    if top.map_or(true, |(_, m)| n > m) {
                        top = Some((form, n));
                    }
                }
                top.map(|(f, _)| (base.clone(), f.clone()))
            })
            .collect();
        Self { counts, best }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn best(&self, base: &str) -> Option<&str> {
        self.best.get(base).map(String::as_str)
    }

    pub fn forms(&self, base: &str) -> Option<&BTreeMap<String, u64>> {
        self.counts.get(base)
    }

    /// Replaces every alphabetic run by the preferred form of its base.
    pub fn restore(&self, text: &str, table: &DiacriticTable) -> String {
        let mut chars: Vec<char> = text.chars().collect();
        for (s, e) in alphabetic_runs(&chars) {
            let run = &chars[s..e];
            let base: String = run.iter().map(|&c| table.base(c)).collect();
            if let Some(form) = self.lookup(&base, run, table) {
                chars[s..e].copy_from_slice(&form);
            }
        }
        chars.into_iter().collect()
    }

    fn lookup(&self, base: &str, run: &[char], table: &DiacriticTable) -> Option<Vec<char>> {
        let accept = |form: Vec<char>| {
            let fits = form.len() == run.len() && form.iter().zip(run).all(|(&f, &r)| table.base(f) == table.base(r));
            fits.then_some(form)
        };
        if let Some(form) = self.best(base) {
            return accept(form.chars().collect());
        }
        let lower: Option<String> = base.chars().map(single_lower).collect();
        let form = self.best(&lower?)?;
        let cased: Option<Vec<char>> = form
            .chars()
            .zip(run)
            .map(|(f, &r)| if r.is_uppercase() { single_upper(f) } else { Some(f) })
            .collect();
        accept(cased?)
    }

    /// `base TAB form TAB count` lines, sorted by base then form.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (base, forms) in &self.counts {
            for (form, n) in forms {
                let _ = writeln!(out, "{base}\t{form}\t{n}");
            }
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let bad = || DiacriticsError::invalid(format!("dictionary line {}: expected base, form and count", i + 1));
            let mut parts = line.split('\t');
            let (Some(base), Some(form), Some(n), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad());
            };
            let n: u64 = n.parse().map_err(|_| bad())?;
            *counts.entry(base.to_string()).or_default().entry(form.to_string()).or_default() += n;
        }
        Ok(Self::from_counts(counts))
    }
}

fn single_lower(c: char) -> Option<char> {
    let mut it = c.to_lowercase();
    match (it.next(), it.next()) {
        (Some(l), None) => Some(l),
        _ => None,
    }
}

fn single_upper(c: char) -> Option<char> {
    let mut it = c.to_uppercase();
    match (it.next(), it.next()) {
        (Some(u), None) => Some(u),
        _ => None,
    }
}
