//! Self-supervised dataset construction: diacritic tables, stripping,
//! cleaning, splitting, augmentation and batching.

mod augment;
mod batch;
mod clean;
mod source;
mod split;
mod synthetic;
mod table;

pub use augment::{augment, augment_seeded};
pub use batch::{make_epoch, materialize, Epoch, EpochConfig, PersistentBatches, SequenceBatch};
pub use clean::{
    diacritic_ratio, truncate_at_whitespace, CleanConfig, CleanStats, Cleaner, DatasetStats, DropReason, LineOutcome,
    DEFAULT_EXTRA_PUNCTUATION,
};
pub use source::{IndexedFile, LineSource};
pub use split::{shard_of, Split, SHARDS};
pub use synthetic::{synthetic_corpus, SyntheticHungarian};
pub use table::DiacriticTable;

pub fn dediacritize(text: &str, table: &DiacriticTable) -> String {
    table.dediacritize(text)
}
