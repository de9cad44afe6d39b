use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::DiacriticTable;
use crate::error::{DiacriticsError, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
const RESERVED: u32 = 2;

pub const DEFAULT_MIN_COUNT: usize = 10;

/// Character labels. Ids 0 and 1 are PAD and UNK; characters follow in
/// codepoint order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharVocab {
    chars: Vec<char>,
    ids: HashMap<char, u32>,
}

impl CharVocab {
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Result<Self> {
        let set: BTreeSet<char> = chars.into_iter().collect();
        let chars: Vec<char> = set.into_iter().collect();
        if chars.len() > (u32::MAX - RESERVED) as usize {
            return Err(DiacriticsError::invalid("vocabulary too large"));
        }
        let ids = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32 + RESERVED))
            .collect();
        Ok(Self { chars, ids })
    }

    /// Every character seen at least `min_count` times, plus all characters
    /// of `table` when given.
    pub fn build<'a>(
        lines: impl IntoIterator<Item = &'a str>,
        min_count: usize,
        table: Option<&DiacriticTable>,
    ) -> Result<Self> {
        let mut counts: BTreeMap<char, usize> = BTreeMap::new();
        for line in lines {
            for c in line.chars() {
                *counts.entry(c).or_default() += 1;
            }
        }
        if counts.is_empty() {
            return Err(DiacriticsError::EmptyCorpus("no characters to build a vocabulary from".into()));
        }
        let mut chars: BTreeSet<char> = counts
            .into_iter()
            .filter(|&(_, n)| n >= min_count.max(1))
            .map(|(c, _)| c)
            .collect();
        if let Some(t) = table {
            chars.extend(t.alphabet());
        }
        Self::from_chars(chars)
    }

    /// Label count including PAD and UNK.
    pub fn size(&self) -> usize {
        self.chars.len() + RESERVED as usize
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn id(&self, c: char) -> u32 {
        self.ids.get(&c).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, c: char) -> bool {
        self.ids.contains_key(&c)
    }

    /// The character of a non-reserved id.
    pub fn decode(&self, id: u32) -> Option<char> {
        id.checked_sub(RESERVED).and_then(|i| self.chars.get(i as usize).copied())
    }
}
