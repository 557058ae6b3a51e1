//! Non-overlapping bigram frequencies.
//!
//! The frequency of a bigram is the number of its non-overlapping
//! occurrences, chosen greedily from the left. For `ab` with `a ≠ b` this is
//! simply the number of positions where `ab` starts; a run of `ℓ` equal
//! symbols `a` contributes `⌊ℓ/2⌋` occurrences of `aa`.

use std::collections::BTreeMap;

use crate::model::{Bigram, CapacityPolicy, MemoryAccountant, Slot, Symbol, SymbolSeq};

/// Greedy left-to-right count of non-overlapping occurrences of `b`.
pub fn bigram_frequency<S: SymbolSeq + ?Sized>(text: &S, b: Bigram) -> usize {
    let n = text.len();
    let mut count = 0;
    let mut i = 0;
    while i + 1 < n {
        if text.at(i) == b.left && text.at(i + 1) == b.right {
            count += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    count
}

/// Frequencies of every bigram of the text. This is the full-table counter
/// used when the table may be as large as the text, and the reference the
/// other counters are tested against.
pub fn all_frequencies<S: SymbolSeq + ?Sized>(text: &S) -> BTreeMap<Bigram, usize> {
    // bigram -> (count, first position where the next occurrence may start)
    let mut table: BTreeMap<Bigram, (usize, usize)> = BTreeMap::new();
    for i in 0..text.len().saturating_sub(1) {
        let b = Bigram::new(text.at(i), text.at(i + 1));
        let e = table.entry(b).or_insert((0, 0));
        if i >= e.1 {
            e.0 += 1;
            e.1 = i + 2;
        }
    }
    table.into_iter().map(|(b, (c, _))| (b, c)).collect()
}

/// Highest frequency in the text, or zero if it has no bigram.
pub fn max_frequency<S: SymbolSeq + ?Sized>(text: &S) -> usize {
    all_frequencies(text).into_values().max().unwrap_or(0)
}

/// Frequencies sorted descending: the reference top-d multiset.
pub fn sorted_frequencies<S: SymbolSeq + ?Sized>(text: &S) -> Vec<usize> {
    let mut v: Vec<usize> = all_frequencies(text).into_values().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// Orders entries by descending frequency, then ascending bigram.
#[inline]
pub fn rank(a: &(Bigram, usize), b: &(Bigram, usize)) -> std::cmp::Ordering {
    b.1.cmp(&a.1).then(a.0.cmp(&b.0))
}

/// A bounded table of `(bigram, frequency)` pairs.
///
/// During a round every entry has frequency at least `threshold`. Entries are
/// kept in no particular order; lookups and extremum queries scan linearly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    entries: Vec<(Bigram, usize)>,
    capacity: usize,
    pub threshold: usize,
}

impl FrequencyTable {
    pub fn with_capacity(capacity: usize) -> Self {
        FrequencyTable {
            entries: Vec::with_capacity(capacity),
            capacity,
            threshold: 0,
        }
    }

    /// Builds a table from entries, keeping the `capacity` best by rank.
    pub fn from_entries(mut entries: Vec<(Bigram, usize)>, capacity: usize) -> Self {
        entries.sort_unstable_by(rank);
        entries.dedup_by(|a, b| a.0 == b.0);
        entries.truncate(capacity);
        FrequencyTable {
            entries,
            capacity,
            threshold: 0,
        }
    }

    pub fn entries(&self) -> &[(Bigram, usize)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(Bigram, usize)> {
        self.entries
    }

    /// Frequencies in descending order.
    pub fn frequencies(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.iter().map(|e| e.1).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn min_frequency(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.1).min()
    }

    /// Drops every entry below `t` and makes `t` the threshold.
    pub fn retain_at_least(&mut self, t: usize) {
        self.entries.retain(|e| e.1 >= t);
        self.threshold = t;
    }

    pub fn set_capacity(&mut self, capacity: usize) {
        self.capacity = capacity;
    }

    fn position(&self, b: &Bigram) -> Option<usize> {
        self.entries.iter().position(|e| e.0 == *b)
    }
}

/// Operations the replacement engine needs from its frequency store.
pub trait FreqStore {
    fn len(&self) -> usize;
    fn capacity(&self) -> usize;
    fn get(&self, b: &Bigram) -> Option<usize>;
    /// Highest frequency; ties go to the lexicographically smaller bigram.
    fn max_entry(&self) -> Option<(Bigram, usize)>;
    /// Lowest frequency; ties go to the lexicographically larger bigram.
    fn min_entry(&self) -> Option<(Bigram, usize)>;
    fn remove(&mut self, b: &Bigram) -> Option<usize>;
    /// Overwrites the frequency of a present bigram. Returns `false` if the
    /// bigram is absent.
    fn update(&mut self, b: &Bigram, freq: usize) -> bool;
    /// Adds an absent bigram. The caller makes room first.
    fn insert(&mut self, b: Bigram, freq: usize);
    fn snapshot(&self) -> Vec<(Bigram, usize)>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FreqStore for FrequencyTable {
    fn len(&self) -> usize {
        self.entries.len()
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn get(&self, b: &Bigram) -> Option<usize> {
        self.position(b).map(|i| self.entries[i].1)
    }

    fn max_entry(&self) -> Option<(Bigram, usize)> {
        self.entries.iter().copied().min_by(rank)
    }

    fn min_entry(&self) -> Option<(Bigram, usize)> {
        self.entries.iter().copied().max_by(rank)
    }

    fn remove(&mut self, b: &Bigram) -> Option<usize> {
        self.position(b).map(|i| self.entries.swap_remove(i).1)
    }

    fn update(&mut self, b: &Bigram, freq: usize) -> bool {
        match self.position(b) {
            Some(i) => {
                self.entries[i].1 = freq;
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, b: Bigram, freq: usize) {
        debug_assert!(self.position(&b).is_none());
        self.entries.push((b, freq));
    }

    fn snapshot(&self) -> Vec<(Bigram, usize)> {
        self.entries.clone()
    }
}

/// Union of two tables holding exact whole-text frequencies, cut down to the
/// `d` best entries (descending frequency, ties by ascending bigram).
pub fn merge_tables(a: &FrequencyTable, b: &FrequencyTable, d: usize) -> FrequencyTable {
    let mut all = Vec::with_capacity(a.entries.len() + b.entries.len());
    all.extend_from_slice(&a.entries);
    all.extend_from_slice(&b.entries);
    // Sorting by bigram first groups duplicates; both copies carry the same
    // exact frequency.
    all.sort_unstable();
    all.dedup_by(|x, y| x.0 == y.0);
    FrequencyTable::from_entries(all, d)
}

/// Bits of one table entry for the text's current alphabet.
pub fn table_entry_bits(acct: &MemoryAccountant, tau: u64) -> u64 {
    u64::from(CapacityPolicy::entry_bits(tau + 1, acct.n()))
}

/// Frequencies of the `d` most frequent bigrams using two tables of `d`
/// entries.
///
/// The text is cut into blocks of `d` positions; consecutive blocks share one
/// position so that the bigram across the border belongs to the left block.
/// For each block, its distinct bigrams not yet in `F` go into the scratch
/// table `F′` sorted lexicographically, are counted over the whole text in
/// one scan with binary search into `F′`, and `F′` is merged into `F`,
/// keeping the `d` best. Blocks whose bigrams are all in `F` already skip
/// the scan.
///
/// `tau` is the current symbol count, used to size table entries for the
/// ledger.
///
/// # Panics
///
/// If `d` is zero.
pub fn top_d_tradeoff<S: SymbolSeq + ?Sized>(
    text: &S,
    d: usize,
    tau: u64,
    mut acct: Option<&mut MemoryAccountant>,
) -> FrequencyTable {
    assert!(d >= 1, "d must be positive");
    let n = text.len();
    if let Some(a) = acct.as_deref_mut() {
        let bits = table_entry_bits(a, tau) * d as u64;
        a.set(Slot::Table, bits);
        a.set(Slot::Scratch, bits);
    }
    let mut table = FrequencyTable::with_capacity(d);
    let mut scratch: Vec<(Bigram, usize)> = Vec::with_capacity(d);
    let bigrams = n.saturating_sub(1);
    let mut start = 0;
    while start < bigrams {
        let end = (start + d).min(bigrams);
        scratch.clear();
        for i in start..end {
            let b = Bigram::new(text.at(i), text.at(i + 1));
            if table.get(&b).is_none() {
                scratch.push((b, 0));
            }
        }
        scratch.sort_unstable();
        scratch.dedup_by(|x, y| x.0 == y.0);
        if !scratch.is_empty() {
            count_into(text, &mut scratch);
            let fresh = FrequencyTable {
                entries: std::mem::take(&mut scratch),
                capacity: d,
                threshold: 0,
            };
            table = merge_tables(&table, &fresh, d);
            scratch = fresh.entries;
        }
        start = end;
    }
    if let Some(a) = acct {
        a.release(Slot::Scratch);
    }
    table
}

/// Counts, in one left-to-right scan, the frequencies of the bigrams in the
/// lexicographically sorted `slots`. Runs of a symbol `s` are credited to
/// `ss` as `⌊ℓ/2⌋` when the run ends.
pub fn count_into<S: SymbolSeq + ?Sized>(text: &S, slots: &mut [(Bigram, usize)]) {
    if text.len() < 2 || slots.is_empty() {
        return;
    }
    let find = |slots: &[(Bigram, usize)], b: &Bigram| slots.binary_search_by(|e| e.0.cmp(b)).ok();
    // One-word filters on the symbols of the slot bigrams, so that most
    // positions are rejected without a search.
    let bit = |s: Symbol| 1u64 << (s.0 % 64);
    let (mut lefts, mut rights) = (0u64, 0u64);
    for (b, _) in slots.iter() {
        lefts |= bit(b.left);
        rights |= bit(b.right);
    }
    let mut run = 0usize;
    let mut prev: Option<Symbol> = None;
    text.for_each_symbol(|cur| {
        match prev {
            Some(p) if p == cur => run += 1,
            Some(p) => {
                if lefts & bit(p) != 0 {
                    if run >= 2 && rights & bit(p) != 0 {
                        if let Some(k) = find(slots, &Bigram::new(p, p)) {
                            slots[k].1 += run / 2;
                        }
                    }
                    if rights & bit(cur) != 0 {
                        if let Some(k) = find(slots, &Bigram::new(p, cur)) {
                            slots[k].1 += 1;
                        }
                    }
                }
                run = 1;
            }
            None => run = 1,
        }
        prev = Some(cur);
    });
    if let Some(p) = prev {
        if run >= 2 {
            if let Some(k) = find(slots, &Bigram::new(p, p)) {
                slots[k].1 += run / 2;
            }
        }
    }
}
