use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::error::{DiacriticsError, Result};

pub const SHARDS: u16 = 1000;

/// Shard of a line: the first eight bytes of its SHA-256, modulo 1000.
pub fn shard_of(line: &str) -> u16 {
    let digest = Sha256::digest(line.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    (u64::from_be_bytes(head) % u64::from(SHARDS)) as u16
}

/// Content-hash train/dev split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    dev_shards: BTreeSet<u16>,
}

impl Default for Split {
    /// Shards 0..10, about one percent of the lines.
    fn default() -> Self {
        Self {
            dev_shards: (0..10).collect(),
        }
    }
}

impl Split {
    pub fn new(dev_shards: impl IntoIterator<Item = u16>) -> Result<Self> {
        let dev_shards: BTreeSet<u16> = dev_shards.into_iter().collect();
        if let Some(s) = dev_shards.iter().find(|&&s| s >= SHARDS) {
            return Err(DiacriticsError::invalid(format!("dev shard {s} is not below {SHARDS}")));
        }
        Ok(Self { dev_shards })
    }

    /// Parses "0-9,17,40-42".
    pub fn parse(spec: &str) -> Result<Self> {
        let mut shards = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || DiacriticsError::invalid(format!("bad shard range {part:?}"));
            match part.split_once('-') {
                Some((a, b)) => {
                    let (a, b): (u16, u16) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                    if a > b {
                        return Err(bad());
                    }
                    shards.extend(a..=b);
                }
                None => shards.push(part.parse().map_err(|_| bad())?),
            }
        }
        Self::new(shards)
    }

    pub fn is_dev(&self, line: &str) -> bool {
        self.dev_shards.contains(&shard_of(line))
    }

    /// (train, dev), both in input order.
    pub fn split<S: AsRef<str>>(&self, lines: &[S]) -> (Vec<String>, Vec<String>) {
        let mut train = Vec::new();
        let mut dev = Vec::new();
        for l in lines {
            let l = l.as_ref();
            if self.is_dev(l) {
                dev.push(l.to_string());
            } else {
                train.push(l.to_string());
            }
        }
        (train, dev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_lines_share_a_side() {
        let lines: Vec<String> = (0..3000).map(|i| format!("mondat {i}")).collect();
        let split = Split::default();
        let (train, dev) = split.split(&lines);
        assert_eq!(train.len() + dev.len(), 3000);
        assert!(!dev.is_empty() && dev.len() < 100);
        for d in &dev {
            assert!(split.is_dev(d));
        }
    }

    #[test]
    fn parses_ranges() {
        let s = Split::parse("0-2, 7").unwrap();
        assert_eq!(s.dev_shards.iter().copied().collect::<Vec<_>>(), vec![0, 1, 2, 7]);
        assert!(Split::parse("5-2").is_err());
        assert!(Split::parse("1000").is_err());
    }
}
