//! Re-Pair grammar compression in small working space.
//!
//! The compressor repeatedly replaces a most frequent bigram of the text with a
//! fresh non-terminal. Instead of the classic hash-table-plus-priority-queue
//! layout, it keeps a frequency table whose capacity grows with the space freed
//! by the replacements, and audits every auxiliary structure against a bit
//! budget of `max((n/c)·lg n, n·⌈lg τ⌉) + O(lg n)` bits.
//!
//! Module map:
//!
//! - [`model`]: symbols, the packed rewriteable text, grammars, the capacity
//!   policy and the working-space ledger.
//! - [`freq`]: non-overlapping bigram frequencies and the block-wise top-d
//!   counter.
//! - [`engine`]: the round/turn replacement loop and the frequency-two tail.
//! - [`broadword`]: word-packed search kernels, the heap-backed frequency
//!   index and the hybrid schedule.
//! - [`variants`]: MR-Re-Pair and the practical heuristics.
//! - [`codec`]: the on-disk grammar format and decompression.
//! - [`bench`]: prefix benchmarks producing CSV rows.

pub mod bench;
pub mod broadword;
pub mod codec;
pub mod engine;
pub mod error;
pub mod freq;
pub mod model;
pub mod variants;

pub use engine::{run_repair, Outcome, Strategy};
pub use error::{Error, Result};
pub use model::{Bigram, CapacityPolicy, Grammar, MemoryAccountant, PackedText, Symbol};
