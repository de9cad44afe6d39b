use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::DiacriticTable;

/// Typographic punctuation common in European text that is allowed on top of
/// printable ASCII.
pub const DEFAULT_EXTRA_PUNCTUATION: &str = "\u{2013}\u{2014}\u{201E}\u{201C}\u{201D}\u{2018}\u{2019}\u{2026}\u{00AB}\u{00BB}\u{00B0}\u{00A7}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanConfig {
    pub max_len: usize,
    pub min_diacritic_ratio: f64,
    pub extra_punctuation: String,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            max_len: 500,
            min_diacritic_ratio: 0.05,
            extra_punctuation: DEFAULT_EXTRA_PUNCTUATION.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanStats {
    pub input_lines: u64,
    pub kept: u64,
    pub truncated: u64,
    pub dropped_invalid_utf8: u64,
    pub dropped_empty: u64,
    pub dropped_exotic: u64,
    pub dropped_low_diacritic_ratio: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    InvalidUtf8,
    Empty,
    Exotic(char),
    LowDiacriticRatio,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineOutcome {
    Kept { line: String, truncated: bool },
    Dropped(DropReason),
}

/// Line filter: exotic-character removal, truncation and the diacritic
/// density threshold.
#[derive(Debug, Clone)]
pub struct Cleaner<'t> {
    table: &'t DiacriticTable,
    config: CleanConfig,
    allowed: BTreeSet<char>,
}

impl<'t> Cleaner<'t> {
    pub fn new(table: &'t DiacriticTable, config: CleanConfig) -> Self {
        let mut allowed: BTreeSet<char> = (' '..='~').collect();
        allowed.extend(table.alphabet());
        allowed.extend(config.extra_punctuation.chars());
        Self {
            table,
            config,
            allowed,
        }
    }

    pub fn is_exotic(&self, c: char) -> bool {
        !self.allowed.contains(&c)
    }

    pub fn clean_bytes(&self, raw: &[u8]) -> LineOutcome {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        match std::str::from_utf8(raw) {
            Ok(s) => self.clean_line(s),
            Err(_) => LineOutcome::Dropped(DropReason::InvalidUtf8),
        }
    }

    pub fn clean_line(&self, line: &str) -> LineOutcome {
        let line: String = line.nfc().collect();
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return LineOutcome::Dropped(DropReason::Empty);
        }
        if let Some(c) = trimmed.chars().find(|&c| self.is_exotic(c)) {
            return LineOutcome::Dropped(DropReason::Exotic(c));
        }
        let (kept, truncated) = truncate_at_whitespace(trimmed, self.config.max_len);
        if diacritic_ratio(&kept, self.table) < self.config.min_diacritic_ratio {
            return LineOutcome::Dropped(DropReason::LowDiacriticRatio);
        }
        LineOutcome::Kept { line: kept, truncated }
    }

    pub fn clean_corpus<I, L>(&self, lines: I) -> (Vec<String>, CleanStats)
    where
        I: IntoIterator<Item = L>,
        L: AsRef<[u8]>,
    {
        let mut stats = CleanStats::default();
        let mut kept = Vec::new();
        for raw in lines {
            stats.input_lines += 1;
            match self.clean_bytes(raw.as_ref()) {
                LineOutcome::Kept { line, truncated } => {
                    stats.kept += 1;
                    stats.truncated += u64::from(truncated);
                    kept.push(line);
                }
                LineOutcome::Dropped(reason) => match reason {
                    DropReason::InvalidUtf8 => stats.dropped_invalid_utf8 += 1,
                    DropReason::Empty => stats.dropped_empty += 1,
                    DropReason::Exotic(_) => stats.dropped_exotic += 1,
                    DropReason::LowDiacriticRatio => stats.dropped_low_diacritic_ratio += 1,
                },
            }
        }
        (kept, stats)
    }
}

/// Cuts `line` to at most `max_len` scalars, preferring the last whitespace
/// before the limit. Returns the result and whether anything was cut.
pub fn truncate_at_whitespace(line: &str, max_len: usize) -> (String, bool) {
    let chars: Vec<char> = line.chars().collect();
    if chars.len() <= max_len {
        return (line.to_string(), false);
    }
    let head = &chars[..max_len];
    let cut = if chars[max_len].is_whitespace() {
        max_len
    } else {
        head.iter().rposition(|c| c.is_whitespace()).unwrap_or(max_len)
    };
    let out: String = head[..cut].iter().collect();
    let out = out.trim_end();
    if out.is_empty() {
        (head.iter().collect(), true)
    } else {
        (out.to_string(), true)
    }
}

/// Diacritized characters over important characters; 0 when the line has no
/// important characters.
pub fn diacritic_ratio(line: &str, table: &DiacriticTable) -> f64 {
    let (mut marked, mut important) = (0usize, 0usize);
    for c in line.chars() {
        if table.is_important(c) {
            important += 1;
            marked += usize::from(table.is_marked(c));
        }
    }
    if important == 0 {
        0.0
    } else {
        marked as f64 / important as f64
    }
}

/// Dataset statistics in the shape of a corpus summary table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sequences: u64,
    pub characters: u64,
    pub average_length: f64,
}

impl DatasetStats {
    pub fn from_lines<S: AsRef<str>>(lines: &[S]) -> Self {
        let sequences = lines.len() as u64;
        let characters: u64 = lines.iter().map(|l| l.as_ref().chars().count() as u64).sum();
        let average_length = if sequences == 0 {
            0.0
        } else {
            characters as f64 / sequences as f64
        };
        Self {
            sequences,
            characters,
            average_length,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hu() -> DiacriticTable {
        DiacriticTable::for_language("hu").unwrap()
    }

    #[test]
    fn exotic_lines_are_dropped() {
        let t = hu();
        let c = Cleaner::new(&t, CleanConfig::default());
        assert_eq!(c.clean_line("naïve łódź"), LineOutcome::Dropped(DropReason::Exotic('ï')));
        assert!(matches!(c.clean_line("Ő „idézett” szöveg…"), LineOutcome::Kept { .. }));
    }

    #[test]
    fn decomposed_input_is_composed_first() {
        let t = hu();
        let c = Cleaner::new(&t, CleanConfig::default());
        let LineOutcome::Kept { line, .. } = c.clean_line("a\u{301}rok") else {
            panic!("dropped");
        };
        assert_eq!(line, "árok");
    }

    #[test]
    fn low_ratio_is_dropped() {
        let t = hu();
        let c = Cleaner::new(&t, CleanConfig::default());
        assert_eq!(c.clean_line("szolo nelkul"), LineOutcome::Dropped(DropReason::LowDiacriticRatio));
        assert_eq!(c.clean_line("123"), LineOutcome::Dropped(DropReason::LowDiacriticRatio));
        assert_eq!(c.clean_line("   "), LineOutcome::Dropped(DropReason::Empty));
    }

    #[test]
    fn truncation_prefers_whitespace() {
        let line = "szó ".repeat(150);
        let (out, cut) = truncate_at_whitespace(line.trim_end(), 500);
        assert!(cut);
        assert!(out.chars().count() <= 500);
        assert!(out.ends_with("szó"));
        let (hard, _) = truncate_at_whitespace(&"á".repeat(600), 500);
        assert_eq!(hard.chars().count(), 500);
        assert_eq!(truncate_at_whitespace("ab cd", 2), ("ab".to_string(), true));
    }

    #[test]
    fn stats_count_reasons() {
        let t = hu();
        let c = Cleaner::new(&t, CleanConfig::default());
        let lines: Vec<&[u8]> = vec![b"\xff\xfe", "árvíz".as_bytes(), b"", "łódź".as_bytes(), b"kert"];
        let (kept, stats) = c.clean_corpus(lines);
        assert_eq!(kept, vec!["árvíz"]);
        assert_eq!(stats.input_lines, 5);
        assert_eq!(
            (stats.dropped_invalid_utf8, stats.dropped_empty, stats.dropped_exotic, stats.dropped_low_diacritic_ratio),
            (1, 1, 1, 1)
        );
    }

    #[test]
    fn dataset_stats() {
        let s = DatasetStats::from_lines(&["ab", "cde"]);
        assert_eq!((s.sequences, s.characters), (2, 5));
        assert_eq!(s.average_length, 2.5);
    }
}
