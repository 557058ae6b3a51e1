//! Word-packed kernels.
//!
//! A [`PackedText`] word holds `q` cells of `x` bits, least significant cell
//! first, so the first symbol of a chunk sits in the low bits. Functions
//! that talk about the "most significant" end of a bit vector therefore
//! operate on the end of the chunk.

mod hybrid;
mod index;
mod kernels;

pub use hybrid::{hybrid_pick, CountingMethod, HybridCosts};
pub use index::FrequencyIndex;
pub use kernels::{
    delete_prefix_run, delete_suffix_run, find_char_mask, interior_run_pairs,
    packed_bigram_frequency, packed_replace, popcount_cells, top_d_bitparallel,
};

use crate::model::PackedText;

/// Masks and sizes for broadword operations on `q` cells of `x` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BroadwordContext {
    pub word_bits: u32,
    /// Cell width `x`.
    pub cell_width: u32,
    /// Cells per word.
    pub q: u32,
    /// Most significant bit of every cell.
    pub high: u64,
    /// Least significant bit of every cell.
    pub low: u64,
    /// All bits covered by the `q` cells.
    pub used: u64,
}

impl BroadwordContext {
    pub fn new(cell_width: u32, q: u32) -> Self {
        assert!(cell_width >= 1 && q >= 1 && cell_width * q <= 64, "{q} cells of {cell_width} bits do not fit a word");
        let mut low = 0u64;
        for i in 0..q {
            low |= 1u64 << (i * cell_width);
        }
        let high = low << (cell_width - 1);
        BroadwordContext {
            word_bits: 64,
            cell_width,
            q,
            high,
            low,
            used: ones(cell_width * q),
        }
    }

    /// Context matching the layout of `text`.
    pub fn for_text(text: &PackedText) -> Self {
        Self::new(text.width(), text.per_word() as u32)
    }

    /// The same word read as `q/2` cells of `2x` bits.
    pub fn doubled(&self) -> Self {
        Self::new(2 * self.cell_width, self.q / 2)
    }

    /// All bits of the first `cells` cells.
    #[inline]
    pub fn prefix_mask(&self, cells: u32) -> u64 {
        ones(cells.min(self.q) * self.cell_width)
    }

    /// Repeats the value `c` in every cell.
    #[inline]
    pub fn broadcast(&self, c: u64) -> u64 {
        c.wrapping_mul(self.low)
    }

    /// Cells with index of the given parity, full width.
    pub fn parity_cells(&self, parity: u32) -> u64 {
        let mut m = 0u64;
        let cell = ones(self.cell_width);
        let mut i = parity;
        while i < self.q {
            m |= cell << (i * self.cell_width);
            i += 2;
        }
        m
    }
}

#[inline]
pub(crate) fn ones(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}
