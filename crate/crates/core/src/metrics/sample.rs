use rand::Rng;
use serde::{Deserialize, Serialize};

use super::score::paired_chars;
use crate::error::{DiacriticsError, Result};
use crate::seeds;

pub const CONTEXT: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub line: usize,
    /// Character offset within the line.
    pub position: usize,
    pub reference: char,
    pub hypothesis: char,
    /// Up to 40 characters either side, from the reference and the
    /// hypothesis.
    pub reference_context: String,
    pub hypothesis_context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSampleSet {
    pub total_errors: u64,
    pub requested: usize,
    pub samples: Vec<ErrorSample>,
    pub notice: Option<String>,
}

/// Uniform sample without replacement of `k` character mismatches,
/// returned in corpus order.
pub fn sample_errors<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
    k: usize,
    seed: u64,
) -> Result<ErrorSampleSet> {
    if k == 0 {
        return Err(DiacriticsError::invalid("sample size must be at least 1"));
    }
    if references.len() != hypotheses.len() {
        return Err(DiacriticsError::invalid("reference and hypothesis line counts differ"));
    }
    // Reservoir sampling over (line, position) in corpus order.
    let mut rng = nnkernel::rng::stream(seed, &[seeds::ERROR_SAMPLE]);
    let mut reservoir: Vec<(usize, usize)> = Vec::with_capacity(k);
    let mut seen = 0u64;
    for (i, (r, h)) in references.iter().zip(hypotheses).enumerate() {
        let (r, h) = paired_chars(i, r.as_ref(), h.as_ref())?;
        for (t, (a, b)) in r.iter().zip(&h).enumerate() {
            if a == b {
                continue;
            }
            seen += 1;
            if reservoir.len() < k {
                reservoir.push((i, t));
            } else {
                let j = rng.gen_range(0..seen);
                if (j as usize) < k {
                    reservoir[j as usize] = (i, t);
                }
            }
        }
    }
    reservoir.sort_unstable();
    let samples = reservoir
        .into_iter()
        .map(|(line, position)| {
            let r: Vec<char> = references[line].as_ref().chars().collect();
            let h: Vec<char> = hypotheses[line].as_ref().chars().collect();
            let lo = position.saturating_sub(CONTEXT);
            let hi = (position + CONTEXT + 1).min(r.len());
            ErrorSample {
                line,
                position,
                reference: r[position],
                hypothesis: h[position],
                reference_context: r[lo..hi].iter().collect(),
                hypothesis_context: h[lo..hi].iter().collect(),
            }
        })
        .collect::<Vec<_>>();
    let notice = ((seen as usize) < k).then(|| format!("only {seen} errors available, returning all of them"));
    Ok(ErrorSampleSet {
        total_errors: seen,
        requested: k,
        samples,
        notice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_determinism() {
        let refs = ["kórós kór", "még"];
        let hyps = ["koros kor", "meg"];
        assert!(sample_errors(&refs, &refs, 5, 1).unwrap().samples.is_empty());
        let all = sample_errors(&refs, &hyps, 10, 1).unwrap();
        assert_eq!(all.samples.len(), 4);
        assert!(all.notice.is_some());
        let a = sample_errors(&refs, &hyps, 2, 7).unwrap();
        let b = sample_errors(&refs, &hyps, 2, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 2);
        assert_eq!(all.samples[3].reference_context, "még");
        assert!(sample_errors(&refs, &hyps, 0, 7).is_err());
    }
}
