//! Accuracy metrics, important-character confusion matrix, word ambiguity
//! analysis and error sampling.

mod ambiguity;
mod confusion;
mod sample;
mod score;

pub use ambiguity::{analyze_ambiguity, base_inventory, AmbiguityStats};
pub use confusion::{confusion, ClassScores, ConfusionMatrix, ConfusionReport};
pub use sample::{sample_errors, ErrorSample, ErrorSampleSet, CONTEXT};
pub use score::{score_line, score_sequences, Count, MetricsReport};
