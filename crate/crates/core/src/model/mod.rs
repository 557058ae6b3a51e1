//! Core data model: symbols, bigrams, the packed text, grammars and the
//! space ledger.

mod accountant;
mod capacity;
mod grammar;
mod packed;

pub use accountant::{MemoryAccountant, Slot, DEFAULT_SLACK_WORDS};
pub use capacity::CapacityPolicy;
pub use grammar::Grammar;
pub use packed::PackedText;

use std::fmt;

/// A terminal or non-terminal. Terminals occupy `0..σ`; the `i`-th
/// non-terminal (1-based) has id `σ - 1 + i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u32);

impl Symbol {
    #[inline]
    pub fn id(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for Symbol {
    fn from(v: u32) -> Self {
        Symbol(v)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Two adjacent symbols. Ordered lexicographically by `(left, right)`, which
/// is the tie order used everywhere in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bigram {
    pub left: Symbol,
    pub right: Symbol,
}

impl Bigram {
    #[inline]
    pub fn new(left: impl Into<Symbol>, right: impl Into<Symbol>) -> Self {
        Bigram {
            left: left.into(),
            right: right.into(),
        }
    }

    #[inline]
    pub fn is_run(&self) -> bool {
        self.left == self.right
    }
}

impl fmt::Display for Bigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.left, self.right)
    }
}

/// Read access to a sequence of symbols, implemented by plain slices and by
/// [`PackedText`], so the counting routines run on either.
pub trait SymbolSeq {
    fn len(&self) -> usize;
    fn at(&self, i: usize) -> Symbol;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f` on every symbol in order.
    fn for_each_symbol(&self, mut f: impl FnMut(Symbol)) {
        for i in 0..self.len() {
            f(self.at(i));
        }
    }
}

impl SymbolSeq for [Symbol] {
    #[inline]
    fn len(&self) -> usize {
        <[Symbol]>::len(self)
    }
    #[inline]
    fn at(&self, i: usize) -> Symbol {
        self[i]
    }
}

impl SymbolSeq for Vec<Symbol> {
    #[inline]
    fn len(&self) -> usize {
        Vec::len(self)
    }
    #[inline]
    fn at(&self, i: usize) -> Symbol {
        self[i]
    }
}

/// Converts raw ids into symbols.
pub fn symbols(ids: &[u32]) -> Vec<Symbol> {
    ids.iter().copied().map(Symbol).collect()
}

/// Maps an ASCII string onto dense terminals `a = 0, b = 1, …`. Handy for the
/// lowercase examples used throughout the tests.
pub fn from_letters(s: &str) -> Vec<Symbol> {
    s.bytes().map(|b| Symbol(u32::from(b - b'a'))).collect()
}

/// `⌈lg v⌉` with `clog2(0) = clog2(1) = 0`.
#[inline]
pub fn clog2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Model width of a symbol drawn from an alphabet of size `sigma`:
/// `⌈lg σ⌉`, but never below one bit.
#[inline]
pub fn model_width(sigma: u64) -> u32 {
    clog2(sigma).max(1)
}

/// Cell width of the packed text for `tau` symbols. One extra value is kept
/// free so that the all-ones cell can serve as a dead marker and as the dummy
/// symbol of the broadword kernels.
#[inline]
pub fn cell_width(tau: u64) -> u32 {
    (64 - tau.leading_zeros()).max(1)
}

/// Natural `lg n` clamped to at least one, used where the formulas divide by it.
#[inline]
pub fn lg(n: u64) -> f64 {
    (n.max(2) as f64).log2()
}
