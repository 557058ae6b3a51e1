use super::{cell_width, Symbol, SymbolSeq};

const WORD: u32 = 64;

/// The rewriteable text: fixed-width cells packed into 64-bit words.
///
/// Each word holds an even number `q` of cells (`q = 2·⌊64/2x⌋` for width
/// `x`), least significant cell first, so that a word can be read as `q`
/// symbols or as `q/2` double-width bigram cells. Cells never straddle words.
/// The all-ones cell value is reserved: it marks cells vacated by a
/// replacement until [`PackedText::compact`] squeezes them out.
#[derive(Clone, PartialEq, Eq)]
pub struct PackedText {
    words: Vec<u64>,
    width: u32,
    per_word: usize,
    len: usize,
    freed: usize,
}

impl std::fmt::Debug for PackedText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PackedText")
            .field("width", &self.width)
            .field("len", &self.len)
            .field("freed", &self.freed)
            .field("cells", &self.raw_cells())
            .finish()
    }
}

#[inline]
fn cells_per_word(width: u32) -> usize {
    assert!((1..=32).contains(&width), "cell width {width} out of range");
    2 * (WORD / (2 * width)) as usize
}

impl PackedText {
    pub fn new(width: u32) -> Self {
        PackedText {
            words: Vec::new(),
            width,
            per_word: cells_per_word(width),
            len: 0,
            freed: 0,
        }
    }

    /// Packs `symbols` with the narrowest width able to hold `tau` symbols
    /// plus the reserved marker.
    pub fn from_symbols(symbols: &[Symbol], tau: u64) -> Self {
        Self::with_width(symbols, cell_width(tau))
    }

    pub fn with_width(symbols: &[Symbol], width: u32) -> Self {
        let mut t = PackedText::new(width);
        t.words = vec![0; symbols.len().div_ceil(t.per_word)];
        t.len = symbols.len();
        for (i, s) in symbols.iter().enumerate() {
            assert!(
                u64::from(s.0) < t.dead_value(),
                "symbol {} does not fit width {width}",
                s.0
            );
            t.put(i, u64::from(s.0));
        }
        t
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Cells per word (`q`).
    #[inline]
    pub fn per_word(&self) -> usize {
        self.per_word
    }

    /// Dead cells released at the tail by compaction so far.
    #[inline]
    pub fn freed(&self) -> usize {
        self.freed
    }

    /// The reserved all-ones cell value.
    #[inline]
    pub fn dead_value(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Number of words holding live cells.
    #[inline]
    pub fn word_count(&self) -> usize {
        self.len.div_ceil(self.per_word)
    }

    /// Number of live cells stored in word `w`.
    #[inline]
    pub fn cells_in_word(&self, w: usize) -> usize {
        (self.len - w * self.per_word).min(self.per_word)
    }

    /// Bits the live cells occupy in the model: `len · width`.
    pub fn bits(&self) -> u64 {
        self.len as u64 * u64::from(self.width)
    }

    #[inline]
    fn locate(&self, i: usize) -> (usize, u32) {
        (i / self.per_word, (i % self.per_word) as u32 * self.width)
    }

    #[inline]
    pub fn raw(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let (w, off) = self.locate(i);
        (self.words[w] >> off) & self.dead_value()
    }

    #[inline]
    fn put(&mut self, i: usize, v: u64) {
        let (w, off) = self.locate(i);
        let mask = self.dead_value() << off;
        self.words[w] = (self.words[w] & !mask) | (v << off);
    }

    #[inline]
    pub fn get(&self, i: usize) -> Symbol {
        Symbol(self.raw(i) as u32)
    }

    #[inline]
    pub fn set(&mut self, i: usize, s: Symbol) {
        assert!(i < self.len);
        debug_assert!(u64::from(s.0) < self.dead_value());
        self.put(i, u64::from(s.0));
    }

    #[inline]
    pub fn mark_dead(&mut self, i: usize) {
        assert!(i < self.len);
        self.put(i, self.dead_value());
    }

    #[inline]
    pub fn is_dead(&self, i: usize) -> bool {
        self.raw(i) == self.dead_value()
    }

    pub fn to_vec(&self) -> Vec<Symbol> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    fn raw_cells(&self) -> Vec<u64> {
        (0..self.len).map(|i| self.raw(i)).collect()
    }

    /// Re-encodes every cell with `new_width` bits. The symbol sequence is
    /// unchanged.
    ///
    /// # Panics
    ///
    /// If `new_width` is narrower than the current width.
    pub fn widen(&mut self, new_width: u32) {
        assert!(
            new_width >= self.width,
            "cannot narrow the text from {} to {new_width} bits",
            self.width
        );
        if new_width == self.width {
            return;
        }
        let mut out = PackedText::new(new_width);
        out.words = vec![0; self.len.div_ceil(out.per_word)];
        out.len = self.len;
        out.freed = self.freed;
        let old_dead = self.dead_value();
        let new_dead = out.dead_value();
        for i in 0..self.len {
            let v = self.raw(i);
            out.put(i, if v == old_dead { new_dead } else { v });
        }
        *self = out;
    }

    /// Moves every live cell to the left, dropping dead ones, and returns the
    /// number of cells removed.
    ///
    /// Whole words without dead cells are copied in one step while the write
    /// cursor stays word aligned.
    pub fn compact(&mut self) -> usize {
        let q = self.per_word;
        let mut write = 0usize;
        let mut read = 0usize;
        while read < self.len {
            let w = read / q;
            if read.is_multiple_of(q) && write.is_multiple_of(q) && read + q <= self.len && !self.word_has_dead(w) {
                self.words[write / q] = self.words[w];
                read += q;
                write += q;
                continue;
            }
            let v = self.raw(read);
            if v != self.dead_value() {
                if write != read {
                    self.put(write, v);
                }
                write += 1;
            }
            read += 1;
        }
        let removed = self.len - write;
        self.truncate(write);
        self.freed += removed;
        removed
    }

    fn word_has_dead(&self, w: usize) -> bool {
        // A cell is all ones exactly when its complement is a zero cell.
        let x = self.width;
        let q = self.per_word as u32;
        let used = if q * x == 64 { u64::MAX } else { (1u64 << (q * x)) - 1 };
        let mut low = 0u64;
        let mut high = 0u64;
        for c in 0..q {
            low |= ((1u64 << (x - 1)) - 1) << (c * x);
            high |= 1u64 << (c * x + x - 1);
        }
        let v = !self.words[w] & used;
        let zero_cells = !(((v & low) + low) | v) & high;
        zero_cells != 0
    }

    /// Shortens the live region to `len` cells; the released cells are zeroed.
    pub fn truncate(&mut self, len: usize) {
        assert!(len <= self.len);
        for i in len..self.len.min(self.word_count() * self.per_word) {
            self.put(i, 0);
        }
        self.len = len;
        self.words.truncate(len.div_ceil(self.per_word));
    }

    pub fn push(&mut self, s: Symbol) {
        if self.len == self.words.len() * self.per_word {
            self.words.push(0);
        }
        self.len += 1;
        let i = self.len - 1;
        self.put(i, u64::from(s.0));
    }
}

impl SymbolSeq for PackedText {
    #[inline]
    fn len(&self) -> usize {
        self.len
    }
    #[inline]
    fn at(&self, i: usize) -> Symbol {
        self.get(i)
    }

    fn for_each_symbol(&self, mut f: impl FnMut(Symbol)) {
        let mask = self.dead_value();
        let mut left = self.len;
        for &word in &self.words {
            let mut w = word;
            for _ in 0..self.per_word.min(left) {
                f(Symbol((w & mask) as u32));
                w >>= self.width;
            }
            left = left.saturating_sub(self.per_word);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::symbols;
    use proptest::prelude::*;

    #[test]
    fn widen_preserves_values() {
        let mut t = PackedText::with_width(&symbols(&[1, 0, 2, 1]), 2);
        t.widen(3);
        assert_eq!(t.width(), 3);
        assert_eq!(t.to_vec(), symbols(&[1, 0, 2, 1]));
    }

    #[test]
    fn widen_empty() {
        let mut t = PackedText::with_width(&[], 1);
        t.widen(4);
        assert_eq!(t.width(), 4);
        assert!(t.is_empty());
    }

    #[test]
    #[should_panic(expected = "cannot narrow")]
    fn widen_rejects_narrowing() {
        let mut t = PackedText::with_width(&symbols(&[1]), 3);
        t.widen(2);
    }

    #[test]
    fn widen_random_thousand() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<Symbol> = (0..1000).map(|_| Symbol(rng.gen_range(0..255))).collect();
        let mut t = PackedText::with_width(&v, 8);
        t.widen(9);
        assert_eq!(t.to_vec(), v);
    }

    #[test]
    fn compact_drops_dead_cells() {
        // c · a · b with two dead cells
        let mut t = PackedText::with_width(&symbols(&[2, 0, 0, 0, 1]), 2);
        t.mark_dead(1);
        t.mark_dead(3);
        assert_eq!(t.compact(), 2);
        assert_eq!(t.to_vec(), symbols(&[2, 0, 1]));
        assert_eq!(t.freed(), 2);
    }

    #[test]
    fn compact_without_dead_is_identity() {
        let v = symbols(&[3, 1, 4, 1, 5]);
        let mut t = PackedText::with_width(&v, 3);
        assert_eq!(t.compact(), 0);
        assert_eq!(t.to_vec(), v);
        assert_eq!(t.freed(), 0);
    }

    #[test]
    fn cells_do_not_straddle_words() {
        for x in 1..=32 {
            let q = cells_per_word(x);
            assert!(q as u32 * x <= 64 && q.is_multiple_of(2), "width {x}");
        }
    }

    proptest! {
        #[test]
        fn widen_round_trip(v in prop::collection::vec(0u32..30, 0..300), extra in 0u32..10) {
            let v = symbols(&v);
            let mut t = PackedText::with_width(&v, 5);
            t.widen(5 + extra);
            prop_assert_eq!(t.to_vec(), v);
        }

        #[test]
        fn compact_matches_filter(v in prop::collection::vec(0u32..6, 0..300), dead in prop::collection::vec(any::<bool>(), 300)) {
            let v = symbols(&v);
            let mut t = PackedText::with_width(&v, 3);
            let mut expect = Vec::new();
            for (i, s) in v.iter().enumerate() {
                if dead[i] { t.mark_dead(i) } else { expect.push(*s) }
            }
            let removed = t.compact();
            prop_assert_eq!(removed, v.len() - expect.len());
            prop_assert_eq!(t.to_vec(), expect);
        }
    }
}
