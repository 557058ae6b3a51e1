//! Alternatives to plain bigram replacement: MR-Re-Pair, which replaces
//! most frequent maximal repeats, and three heuristics for finding a most
//! frequent bigram cheaply in special situations.

mod heuristics;
mod mr;

pub use heuristics::{
    heuristic_full_table, heuristic_majority, heuristic_position_table, FullTableRun, MajorityVote,
};
pub use mr::{extend_to_maximal_repeat, mr_repair, MaximalRepeat};

pub(crate) use mr::mr_repair_with;
