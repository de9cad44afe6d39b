use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::baselines::alphabetic_runs;
use crate::corpus::DiacriticTable;

/// Word-level ambiguity of a gold corpus. A base is ambiguous when at least
/// two distinct forms of it occur; every word occurrence belongs to the
/// class of its base.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityStats {
    pub sequences: u64,
    pub words: u64,
    pub unambiguous_words: u64,
    pub unambiguous_bases: u64,
    pub ambiguous_words: u64,
    pub ambiguous_bases: u64,
    /// Unambiguous over ambiguous word occurrences.
    pub word_ratio: Option<f64>,
    /// Unambiguous over ambiguous bases.
    pub base_ratio: Option<f64>,
}

/// Word occurrences and distinct forms per base.
pub fn base_inventory<S: AsRef<str>>(lines: &[S], table: &DiacriticTable) -> BTreeMap<String, (u64, BTreeSet<String>)> {
    let mut bases: BTreeMap<String, (u64, BTreeSet<String>)> = BTreeMap::new();
    for line in lines {
        let chars: Vec<char> = line.as_ref().chars().collect();
        for (s, e) in alphabetic_runs(&chars) {
            let form: String = chars[s..e].iter().collect();
            let entry = bases.entry(table.dediacritize(&form)).or_default();
            entry.0 += 1;
            entry.1.insert(form);
        }
    }
    bases
}

pub fn analyze_ambiguity<S: AsRef<str>>(lines: &[S], table: &DiacriticTable) -> AmbiguityStats {
    let mut stats = AmbiguityStats {
        sequences: lines.len() as u64,
        ..AmbiguityStats::default()
    };
    for (occurrences, forms) in base_inventory(lines, table).values() {
        if forms.len() >= 2 {
            stats.ambiguous_bases += 1;
            stats.ambiguous_words += occurrences;
        } else {
            stats.unambiguous_bases += 1;
            stats.unambiguous_words += occurrences;
        }
    }
    stats.words = stats.ambiguous_words + stats.unambiguous_words;
    let ratio = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
    stats.word_ratio = ratio(stats.unambiguous_words, stats.ambiguous_words);
    stats.base_ratio = ratio(stats.unambiguous_bases, stats.ambiguous_bases);
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counts() {
        let t = DiacriticTable::for_language("hu").unwrap();
        let s = analyze_ambiguity(&["kór kor"], &t);
        assert_eq!((s.ambiguous_words, s.ambiguous_bases, s.unambiguous_words), (2, 1, 0));
        let s = analyze_ambiguity(&["kék kék"], &t);
        assert_eq!((s.unambiguous_words, s.unambiguous_bases, s.ambiguous_bases), (2, 1, 0));
        assert_eq!(s.word_ratio, None);
    }
}
