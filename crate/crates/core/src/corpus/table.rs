use std::collections::{BTreeMap, BTreeSet};

use crate::error::{DiacriticsError, Result};

/// Lowercase pairs (diacritized, base); uppercase pairs are derived.
const HUNGARIAN: &[(char, char)] = &[
    ('á', 'a'),
    ('é', 'e'),
    ('í', 'i'),
    ('ó', 'o'),
    ('ö', 'o'),
    ('ő', 'o'),
    ('ú', 'u'),
    ('ü', 'u'),
    ('ű', 'u'),
];

const POLISH: &[(char, char)] = &[
    ('ą', 'a'),
    ('ć', 'c'),
    ('ę', 'e'),
    ('ł', 'l'),
    ('ń', 'n'),
    ('ó', 'o'),
    ('ś', 's'),
    ('ź', 'z'),
    ('ż', 'z'),
];

const CZECH: &[(char, char)] = &[
    ('á', 'a'),
    ('č', 'c'),
    ('ď', 'd'),
    ('é', 'e'),
    ('ě', 'e'),
    ('í', 'i'),
    ('ň', 'n'),
    ('ó', 'o'),
    ('ř', 'r'),
    ('š', 's'),
    ('ť', 't'),
    ('ú', 'u'),
    ('ů', 'u'),
    ('ý', 'y'),
    ('ž', 'z'),
];

const SLOVAK: &[(char, char)] = &[
    ('á', 'a'),
    ('ä', 'a'),
    ('č', 'c'),
    ('ď', 'd'),
    ('é', 'e'),
    ('í', 'i'),
    ('ĺ', 'l'),
    ('ľ', 'l'),
    ('ň', 'n'),
    ('ó', 'o'),
    ('ô', 'o'),
    ('ŕ', 'r'),
    ('š', 's'),
    ('ť', 't'),
    ('ú', 'u'),
    ('ý', 'y'),
    ('ž', 'z'),
];

/// Per-language map from diacritized characters to their bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiacriticTable {
    language: String,
    to_base: BTreeMap<char, char>,
    /// base -> sorted variants, the base itself included.
    families: BTreeMap<char, Vec<char>>,
}

impl DiacriticTable {
    pub const LANGUAGES: [&'static str; 4] = ["hu", "pl", "cs", "sk"];

    pub fn for_language(code: &str) -> Result<Self> {
        let pairs = match code {
            "hu" => HUNGARIAN,
            "pl" => POLISH,
            "cs" => CZECH,
            "sk" => SLOVAK,
            other => return Err(DiacriticsError::UnknownLanguage(other.to_string())),
        };
        Self::from_lowercase_pairs(code, pairs.iter().copied())
    }

    /// Builds a table from lowercase pairs, adding the uppercase forms.
    pub fn from_lowercase_pairs(language: &str, pairs: impl IntoIterator<Item = (char, char)>) -> Result<Self> {
        let mut all = Vec::new();
        for (d, b) in pairs {
            all.push((d, b));
            if let (Some(du), Some(bu)) = (single_upper(d), single_upper(b)) {
                all.push((du, bu));
            }
        }
        Self::from_pairs(language, all)
    }

    pub fn from_pairs(language: &str, pairs: impl IntoIterator<Item = (char, char)>) -> Result<Self> {
        let mut to_base = BTreeMap::new();
        for (d, b) in pairs {
            if d == b {
                return Err(DiacriticsError::invalid(format!("{d:?} maps to itself")));
            }
            if let Some(prev) = to_base.insert(d, b) {
                if prev != b {
                    return Err(DiacriticsError::invalid(format!("{d:?} has two bases")));
                }
            }
        }
        if let Some(b) = to_base.values().find(|b| to_base.contains_key(b)) {
            return Err(DiacriticsError::invalid(format!("base {b:?} is also a key")));
        }
        let mut families: BTreeMap<char, Vec<char>> = BTreeMap::new();
        for (&d, &b) in &to_base {
            families.entry(b).or_insert_with(|| vec![b]).push(d);
        }
        for v in families.values_mut() {
            v.sort_unstable();
        }
        Ok(Self {
            language: language.to_string(),
            to_base,
            families,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn base(&self, c: char) -> char {
        self.to_base.get(&c).copied().unwrap_or(c)
    }

    /// True for diacritized characters (table keys).
    pub fn is_marked(&self, c: char) -> bool {
        self.to_base.contains_key(&c)
    }

    pub fn is_base(&self, c: char) -> bool {
        self.families.contains_key(&c)
    }

    /// A character whose base family has at least two members.
    pub fn is_important(&self, c: char) -> bool {
        self.is_marked(c) || self.is_base(c)
    }

    /// All members of `c`'s family, sorted by codepoint; `[c]` for
    /// characters outside the table.
    pub fn variants(&self, c: char) -> Vec<char> {
        match self.families.get(&self.base(c)) {
            Some(v) => v.clone(),
            None => vec![c],
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = char> + '_ {
        self.to_base.keys().copied()
    }

    pub fn bases(&self) -> impl Iterator<Item = char> + '_ {
        self.families.keys().copied()
    }

    /// Families keyed by base, each sorted by codepoint.
    pub fn families(&self) -> &BTreeMap<char, Vec<char>> {
        &self.families
    }

    pub fn alphabet(&self) -> BTreeSet<char> {
        self.keys().chain(self.bases()).collect()
    }

    pub fn dediacritize(&self, text: &str) -> String {
        text.chars().map(|c| self.base(c)).collect()
    }
}

fn single_upper(c: char) -> Option<char> {
    let mut up = c.to_uppercase();
    match (up.next(), up.next()) {
        (Some(u), None) if u != c => Some(u),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_strip() {
        let hu = DiacriticTable::for_language("hu").unwrap();
        assert_eq!(hu.dediacritize("árvíztűrő tükörfúrógép"), "arvizturo tukorfurogep");
        assert_eq!(hu.dediacritize("ÁRVÍZTŰRŐ"), "ARVIZTURO");
        assert_eq!(hu.dediacritize("hello 123!"), "hello 123!");
        assert_eq!(hu.variants('u'), vec!['u', 'ú', 'ü', 'ű']);
        assert_eq!(hu.variants('ö'), vec!['o', 'ó', 'ö', 'ő']);
        assert_eq!(hu.variants('x'), vec!['x']);
        assert!(hu.is_important('a') && hu.is_important('Á') && !hu.is_important('k'));
        assert_eq!(hu.families().len(), 10);
    }

    #[test]
    fn every_language_is_consistent() {
        for code in DiacriticTable::LANGUAGES {
            let t = DiacriticTable::for_language(code).unwrap();
            for k in t.keys() {
                assert!(!t.is_marked(t.base(k)));
                assert!(t.variants(k).contains(&k));
                assert!(t.variants(t.base(k)).contains(&k));
            }
        }
        assert!(DiacriticTable::for_language("xx").is_err());
    }

    #[test]
    fn rejects_chained_bases() {
        assert!(DiacriticTable::from_pairs("t", [('á', 'a'), ('a', 'b')]).is_err());
        assert!(DiacriticTable::from_pairs("t", [('a', 'a')]).is_err());
    }
}
