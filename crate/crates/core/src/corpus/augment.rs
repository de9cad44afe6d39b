use rand::Rng;

use super::DiacriticTable;
use crate::error::{DiacriticsError, Result};

/// Strips each diacritized character independently with probability `p`.
pub fn augment<R: Rng + ?Sized>(target: &str, table: &DiacriticTable, p: f64, rng: &mut R) -> String {
    target
        .chars()
        .map(|c| {
            if table.is_marked(c) && rng.gen::<f64>() < p {
                table.base(c)
            } else {
                c
            }
        })
        .collect()
}

pub fn augment_seeded(target: &str, table: &DiacriticTable, p: f64, seed: u64) -> Result<String> {
    check_probability(p)?;
    let mut rng = nnkernel::rng::rng_from_seed(seed);
    Ok(augment(target, table, p, &mut rng))
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(DiacriticsError::invalid(format!("strip probability {p} outside [0, 1]")))
    }
}
