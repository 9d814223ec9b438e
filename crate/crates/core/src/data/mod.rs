//! Raw interaction logs to fixed-length, left-padded session rows.

mod batch;
pub mod io;
mod sessions;
mod split;
pub mod synth;
mod vocab;

pub use batch::{batch_iter, BatchIter, SessionBatch};
pub use sessions::{segment_sessions, valid_len, valid_region, PrepConfig, RawEvent};
pub use split::{split_dataset, Split};
pub use synth::{generate_synthetic, Regime, SynthSpec, SyntheticCorpus};
pub use vocab::{build_vocabulary, Vocabulary};

/// Item index. `PAD` is 0, items are `1..=V`, the gap symbol is `V + 1`.
pub type ItemId = u32;

pub const PAD: ItemId = 0;
