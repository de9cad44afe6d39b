use serde::{Deserialize, Serialize};

use crate::error::{DiacriticsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpsamplerKind {
    /// `C/E` copies of the embedding, each with one scale and one shift.
    ScalarCopy,
    /// Position-wise linear map `E -> C`.
    FullProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtcnConfig {
    pub embedding_dim: usize,
    pub channels: usize,
    pub num_blocks: usize,
    pub dilations: Vec<usize>,
    pub convs_per_block: usize,
    pub kernel_size: usize,
    pub dropout_rate: f64,
    pub max_sequence_length: usize,
    pub upsampler: UpsamplerKind,
}

impl Default for AtcnConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 50,
            channels: 250,
            num_blocks: 4,
            dilations: vec![1, 2, 4, 8],
            convs_per_block: 2,
            kernel_size: 5,
            dropout_rate: 0.2,
            max_sequence_length: 500,
            upsampler: UpsamplerKind::ScalarCopy,
        }
    }
}

impl AtcnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DiacriticsError::invalid(m));
        if self.embedding_dim == 0 || self.channels == 0 || self.convs_per_block == 0 || self.max_sequence_length == 0 {
            return bad("dimensions must be positive".into());
        }
        if self.kernel_size % 2 == 0 {
            return bad(format!("kernel size {} is not odd", self.kernel_size));
        }
        if self.dilations.len() != self.num_blocks {
            return bad(format!(
                "{} dilations for {} blocks",
                self.dilations.len(),
                self.num_blocks
            ));
        }
        if self.dilations.contains(&0) {
            return bad("dilations must be positive".into());
        }
        if self.upsampler == UpsamplerKind::ScalarCopy && self.channels % self.embedding_dim != 0 {
            return bad(format!(
                "channels {} not divisible by embedding dim {}",
                self.channels, self.embedding_dim
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout rate {} outside [0, 1)", self.dropout_rate));
        }
        Ok(())
    }

    /// Number of embedding copies of the scalar-copy upsampler.
    pub fn copies(&self) -> usize {
        self.channels / self.embedding_dim
    }

    /// Farthest input offset that can reach an output position:
    /// `b · (k-1)/2 · Σd`.
    pub fn receptive_radius(&self) -> usize {
        self.convs_per_block * (self.kernel_size - 1) / 2 * self.dilations.iter().sum::<usize>()
    }

    pub fn receptive_field(&self) -> usize {
        2 * self.receptive_radius() + 1
    }
}
