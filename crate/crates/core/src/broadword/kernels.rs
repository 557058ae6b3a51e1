use super::{ones, BroadwordContext};
use crate::freq::{rank, FrequencyTable};
use crate::model::{Bigram, MemoryAccountant, PackedText, Slot, Symbol};

/// Marks every cell of `word` equal to `c` with all ones and every other
/// cell with zeros.
///
/// XOR with `c` broadcast turns matches into zero cells. Subtracting the low
/// bits from `X | H` instead of `X` keeps every borrow inside its own cell,
/// so a zero cell is recognised by a cleared high bit in both `X` and the
/// difference; the final step smears each surviving high bit over its cell.
#[inline]
pub fn find_char_mask(word: u64, c: u64, ctx: &BroadwordContext) -> u64 {
    let x = word ^ ctx.broadcast(c);
    let y = (x | ctx.high).wrapping_sub(ctx.low);
    let z = !y & !x & ctx.high;
    (z.wrapping_sub(z >> (ctx.cell_width - 1)) | z) & ctx.used
}

/// Number of cells set in a mask produced by [`find_char_mask`].
#[inline]
pub fn popcount_cells(mask: u64, ctx: &BroadwordContext) -> u32 {
    mask.count_ones() / ctx.cell_width
}

/// Clears the maximal run of ones at the most significant end of the
/// `bits`-bit vector `x`.
#[inline]
pub fn delete_prefix_run(x: u64, bits: u32) -> u64 {
    let x = x & ones(bits);
    let inv = !x & ones(bits);
    if inv == 0 {
        return 0;
    }
    let top = 63 - inv.leading_zeros();
    x & (u64::MAX >> (63 - top))
}

/// Clears the maximal run of ones at the least significant end of `x`.
#[inline]
pub fn delete_suffix_run(x: u64) -> u64 {
    !((!x).wrapping_sub(1) & x) & x
}

/// Occurrences of `bb` inside the runs of a chunk that touch neither end
/// of it. `mask` marks the cells equal to `b` (as returned by
/// [`find_char_mask`]); `cells` is the number of valid cells.
///
/// Runs are split by the parity of their first cell; for a run starting at
/// `s` and ending at `e`, the cells of `[s, e)` with the parity of `s`
/// number exactly `⌊(e - s + 1)/2⌋`.
pub fn interior_run_pairs(mask: u64, cells: u32, ctx: &BroadwordContext) -> u32 {
    let x = ctx.cell_width;
    let valid = ctx.prefix_mask(cells);
    // Drop the run at the start of the chunk (low end) and at its end (high end).
    let m = delete_prefix_run(delete_suffix_run(mask & valid), cells * x);
    let starts = m & !(m << x);
    let ends = m & !(m >> x);
    let trimmed = m & !ends;
    let mut count = 0;
    for parity in 0..2 {
        let p = ctx.parity_cells(parity);
        let span = (ends & ctx.low).wrapping_sub(starts & ctx.low & p);
        count += (span & trimmed & p & ctx.low).count_ones();
    }
    count
}

/// Frequency of `b` in the packed text, computed word by word.
///
/// For `b ≠ c` the word is read as double-width cells twice: once as is
/// (pairs starting at even cells) and once shifted by one cell with the
/// reserved all-ones value filled in (pairs starting at odd cells); the
/// pair across each word border is checked separately. For `b = c` the runs
/// inside each word are counted with [`interior_run_pairs`] while runs
/// touching a border are accumulated across words.
pub fn packed_bigram_frequency(text: &PackedText, b: Bigram) -> usize {
    let ctx = BroadwordContext::for_text(text);
    if u64::from(b.left.0) >= text.dead_value() || u64::from(b.right.0) >= text.dead_value() {
        return 0;
    }
    if b.is_run() {
        run_frequency(text, b.left, &ctx)
    } else {
        pair_frequency(text, b, &ctx)
    }
}

fn pair_frequency(text: &PackedText, b: Bigram, ctx: &BroadwordContext) -> usize {
    let x = ctx.cell_width;
    let q = ctx.q;
    let pairs = ctx.doubled();
    let pattern = u64::from(b.left.0) | (u64::from(b.right.0) << x);
    let filler = text.dead_value() << ((q - 1) * x);
    let words = text.words();
    let mut count = 0usize;
    for w in 0..text.word_count() {
        let v = text.cells_in_word(w) as u32;
        let word = words[w];
        let even = find_char_mask(word, pattern, &pairs) & pairs.prefix_mask(v / 2);
        let odd = find_char_mask((word >> x) | filler, pattern, &pairs)
            & pairs.prefix_mask(v.saturating_sub(1) / 2);
        count += (popcount_cells(even, &pairs) + popcount_cells(odd, &pairs)) as usize;
        if v == q && w + 1 < text.word_count() {
            let last = (word >> ((q - 1) * x)) & ones(x);
            let first = words[w + 1] & ones(x);
            if last == u64::from(b.left.0) && first == u64::from(b.right.0) {
                count += 1;
            }
        }
    }
    count
}

fn run_frequency(text: &PackedText, s: Symbol, ctx: &BroadwordContext) -> usize {
    let x = ctx.cell_width;
    let mut count = 0usize;
    let mut carry = 0usize;
    for (w, &word) in text.words().iter().enumerate().take(text.word_count()) {
        let v = text.cells_in_word(w) as u32;
        let valid = ctx.prefix_mask(v);
        let mask = find_char_mask(word, u64::from(s.0), ctx) & valid;
        if mask == valid {
            carry += v as usize;
            continue;
        }
        let head = (mask.trailing_ones() / x) as usize;
        let tail_gap = 63 - (!mask & valid).leading_zeros();
        let tail = (v - 1 - tail_gap / x) as usize;
        count += (carry + head) / 2;
        count += interior_run_pairs(mask, v, ctx) as usize;
        carry = tail;
    }
    count + carry / 2
}

/// Replaces every greedy occurrence of `b` by `x` in place and returns the
/// number of replacements.
///
/// For each word, a mask `Y` marks the cells holding the second symbol of an
/// occurrence; they are overwritten with `(S & ¬Y) | ((Y & L)·x)` and the
/// cells of the first symbols are set to the reserved all-ones value, which
/// [`PackedText::compact`] then squeezes out. The text must already be wide
/// enough for `x`.
pub fn packed_replace(text: &mut PackedText, b: Bigram, x: Symbol) -> usize {
    assert!(u64::from(x.0) < text.dead_value(), "text too narrow for {x}");
    let ctx = BroadwordContext::for_text(text);
    if u64::from(b.left.0) >= text.dead_value() || u64::from(b.right.0) >= text.dead_value() {
        return 0;
    }
    let width = ctx.cell_width;
    let q = ctx.q;
    let top = (q - 1) * width;
    let cell = ones(width);
    let value = u64::from(x.0);
    let count = text.word_count();
    let lens: Vec<u32> = (0..count).map(|w| text.cells_in_word(w) as u32).collect();
    let words = text.words_mut();
    let mut h = 0usize;

    // b ≠ c: whether the previous (full) word ended with the left symbol.
    let mut prev_left = false;
    // b = c: length of the run of b reaching the end of the previous word.
    let mut run_carry = 0u32;

    for w in 0..count {
        let v = lens[w];
        let valid = ctx.prefix_mask(v);
        let word = words[w];
        let mut y;
        if !b.is_run() {
            let fl = find_char_mask(word, u64::from(b.left.0), &ctx) & valid;
            let fr = find_char_mask(word, u64::from(b.right.0), &ctx) & valid;
            y = fr & (fl << width);
            if prev_left && fr & cell != 0 {
                y |= cell;
                words[w - 1] |= cell << top;
            }
            prev_left = v == q && (fl >> top) & cell != 0;
        } else {
            let mut f = find_char_mask(word, u64::from(b.left.0), &ctx) & valid;
            y = 0;
            let mut next_carry = 0;
            while f != 0 {
                let start = f.trailing_zeros() / width;
                let len = (f >> (start * width)).trailing_ones() / width;
                let range = ones(len * width) << (start * width);
                let offset = if start == 0 { run_carry } else { 0 };
                // second symbols sit at cells i with (offset + i - start) odd
                let parity = (start + offset + 1) & 1;
                let seconds = range & ctx.parity_cells(parity);
                y |= seconds;
                if start == 0 && offset & 1 == 1 {
                    words[w - 1] |= cell << top;
                }
                if start + len == q {
                    next_carry = offset + len;
                }
                f &= !range;
            }
            run_carry = next_carry;
        }
        if y == 0 {
            continue;
        }
        h += popcount_cells(y, &ctx) as usize;
        let firsts = y >> width;
        words[w] = ((word & !y) | ((y & ctx.low).wrapping_mul(value))) | firsts;
    }
    if h > 0 {
        text.compact();
    }
    h
}

/// Frequencies of the `d` most frequent bigrams using one table of `d`
/// entries kept sorted by frequency.
///
/// Every text position's bigram is counted with
/// [`packed_bigram_frequency`] unless it already sits in the table, and is
/// inserted by binary search if it ranks among the best `d` seen so far.
pub fn top_d_bitparallel(
    text: &PackedText,
    d: usize,
    tau: u64,
    acct: Option<&mut MemoryAccountant>,
) -> FrequencyTable {
    assert!(d >= 1, "d must be positive");
    if let Some(a) = acct {
        let bits = crate::freq::table_entry_bits(a, tau) * d as u64;
        a.set(Slot::Table, bits);
    }
    let mut best: Vec<(Bigram, usize)> = Vec::with_capacity(d + 1);
    for i in 0..text.len().saturating_sub(1) {
        let b = Bigram::new(text.get(i), text.get(i + 1));
        if best.iter().any(|e| e.0 == b) {
            continue;
        }
        let entry = (b, packed_bigram_frequency(text, b));
        if best.len() == d && rank(&entry, &best[d - 1]).is_ge() {
            continue;
        }
        let at = best.partition_point(|e| rank(e, &entry).is_lt());
        best.insert(at, entry);
        best.truncate(d);
    }
    FrequencyTable::from_entries(best, d)
}
