use std::cmp::{Ordering, Reverse};
use std::collections::HashMap;

use crate::freq::FreqStore;
use crate::model::{clog2, Bigram, MemoryAccountant, Slot};

type Key = (usize, Reverse<Bigram>);

#[derive(Clone, Copy, Debug)]
struct Entry {
    bigram: Bigram,
    freq: usize,
    max_pos: usize,
    min_pos: usize,
}

impl Entry {
    fn key(&self) -> Key {
        (self.freq, Reverse(self.bigram))
    }
}

/// The frequency table as a pair of array heaps.
///
/// Entries live in a slot store; the max-heap and the min-heap hold slot
/// numbers, and every entry records its position in both heaps so that a
/// frequency change can be sifted in either heap in `O(lg f)` time. Lookup
/// by bigram goes through a hash map from bigram to slot.
///
/// Both heaps order by `(frequency, reversed bigram)`, so the maximum breaks
/// ties towards the smaller bigram and the minimum towards the larger one.
#[derive(Clone, Debug, Default)]
pub struct FrequencyIndex {
    slots: Vec<Entry>,
    free: Vec<usize>,
    lookup: HashMap<Bigram, usize>,
    max_heap: Vec<usize>,
    min_heap: Vec<usize>,
    capacity: usize,
}

impl FrequencyIndex {
    pub fn with_capacity(capacity: usize) -> Self {
        FrequencyIndex {
            slots: Vec::with_capacity(capacity),
            free: Vec::new(),
            lookup: HashMap::with_capacity(capacity),
            max_heap: Vec::with_capacity(capacity),
            min_heap: Vec::with_capacity(capacity),
            capacity,
        }
    }

    pub fn from_entries(entries: &[(Bigram, usize)], capacity: usize) -> Self {
        let mut idx = Self::with_capacity(capacity.max(entries.len()));
        idx.capacity = capacity;
        for &(b, f) in entries {
            idx.insert(b, f);
        }
        idx
    }

    /// Bits charged for an index of `capacity` entries: the bigram store
    /// plus two heap positions and two heap cells per entry.
    pub fn charge(acct: &mut MemoryAccountant, capacity: usize, entry_bits: u64) {
        let ptr = u64::from(clog2(capacity as u64 + 1).max(1));
        acct.set(Slot::Index, capacity as u64 * (entry_bits + 4 * ptr));
    }

    pub fn lookup(&self, b: &Bigram) -> Option<usize> {
        self.lookup.get(b).map(|&s| self.slots[s].freq)
    }

    pub fn peek_max(&self) -> Option<(Bigram, usize)> {
        self.max_heap.first().map(|&s| (self.slots[s].bigram, self.slots[s].freq))
    }

    pub fn peek_min(&self) -> Option<(Bigram, usize)> {
        self.min_heap.first().map(|&s| (self.slots[s].bigram, self.slots[s].freq))
    }

    pub fn extract_max(&mut self) -> Option<(Bigram, usize)> {
        let top = self.peek_max()?;
        self.remove(&top.0);
        Some(top)
    }

    pub fn extract_min(&mut self) -> Option<(Bigram, usize)> {
        let low = self.peek_min()?;
        self.remove(&low.0);
        Some(low)
    }

    /// Lowers the frequency of `b` by one. Returns `false` if `b` is absent.
    pub fn decrement(&mut self, b: &Bigram) -> bool {
        match self.lookup(b) {
            Some(f) => self.update(b, f.saturating_sub(1)),
            None => false,
        }
    }

    /// Checks both heap properties and the position links.
    pub fn is_consistent(&self) -> bool {
        let live = self.lookup.len();
        if self.max_heap.len() != live || self.min_heap.len() != live {
            return false;
        }
        for (i, &s) in self.max_heap.iter().enumerate() {
            if self.slots[s].max_pos != i {
                return false;
            }
            if i > 0 && self.slots[self.max_heap[(i - 1) / 2]].key() < self.slots[s].key() {
                return false;
            }
        }
        for (i, &s) in self.min_heap.iter().enumerate() {
            if self.slots[s].min_pos != i {
                return false;
            }
            if i > 0 && self.slots[self.min_heap[(i - 1) / 2]].key() > self.slots[s].key() {
                return false;
            }
        }
        self.lookup.iter().all(|(b, &s)| self.slots[s].bigram == *b)
    }

    fn sift(&mut self, max: bool, mut i: usize) {
        let heap_len = if max { self.max_heap.len() } else { self.min_heap.len() };
        let better = |this: &Self, a: usize, b: usize| -> bool {
            let heap = if max { &this.max_heap } else { &this.min_heap };
            let (ka, kb) = (this.slots[heap[a]].key(), this.slots[heap[b]].key());
            if max {
                ka > kb
            } else {
                ka < kb
            }
        };
        // up
        while i > 0 {
            let parent = (i - 1) / 2;
            if better(self, i, parent) {
                self.swap(max, i, parent);
                i = parent;
            } else {
                break;
            }
        }
        // down
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < heap_len && better(self, l, best) {
                best = l;
            }
            if r < heap_len && better(self, r, best) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(max, i, best);
            i = best;
        }
    }

    fn swap(&mut self, max: bool, a: usize, b: usize) {
        if max {
            self.max_heap.swap(a, b);
            let (sa, sb) = (self.max_heap[a], self.max_heap[b]);
            self.slots[sa].max_pos = a;
            self.slots[sb].max_pos = b;
        } else {
            self.min_heap.swap(a, b);
            let (sa, sb) = (self.min_heap[a], self.min_heap[b]);
            self.slots[sa].min_pos = a;
            self.slots[sb].min_pos = b;
        }
    }

    fn detach(&mut self, max: bool, pos: usize) {
        let heap = if max { &mut self.max_heap } else { &mut self.min_heap };
        let last = heap.len() - 1;
        if pos != last {
            self.swap(max, pos, last);
        }
        let heap = if max { &mut self.max_heap } else { &mut self.min_heap };
        heap.pop();
        if pos < heap.len() {
            self.sift(max, pos);
        }
    }
}

impl FreqStore for FrequencyIndex {
    fn len(&self) -> usize {
        self.lookup.len()
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn get(&self, b: &Bigram) -> Option<usize> {
        self.lookup(b)
    }

    fn max_entry(&self) -> Option<(Bigram, usize)> {
        self.peek_max()
    }

    fn min_entry(&self) -> Option<(Bigram, usize)> {
        self.peek_min()
    }

    fn remove(&mut self, b: &Bigram) -> Option<usize> {
        let s = self.lookup.remove(b)?;
        let e = self.slots[s];
        self.detach(true, e.max_pos);
        let e = self.slots[s];
        self.detach(false, e.min_pos);
        self.free.push(s);
        Some(e.freq)
    }

    fn update(&mut self, b: &Bigram, freq: usize) -> bool {
        let Some(&s) = self.lookup.get(b) else {
            return false;
        };
        let old = self.slots[s].freq;
        self.slots[s].freq = freq;
        if freq.cmp(&old) != Ordering::Equal {
            let p = self.slots[s].max_pos;
            self.sift(true, p);
            let p = self.slots[s].min_pos;
            self.sift(false, p);
        }
        true
    }

    fn insert(&mut self, b: Bigram, freq: usize) {
        debug_assert!(!self.lookup.contains_key(&b));
        let entry = Entry {
            bigram: b,
            freq,
            max_pos: self.max_heap.len(),
            min_pos: self.min_heap.len(),
        };
        let s = match self.free.pop() {
            Some(s) => {
                self.slots[s] = entry;
                s
            }
            None => {
                self.slots.push(entry);
                self.slots.len() - 1
            }
        };
        self.lookup.insert(b, s);
        self.max_heap.push(s);
        self.min_heap.push(s);
        self.sift(true, entry.max_pos);
        self.sift(false, entry.min_pos);
    }

    fn snapshot(&self) -> Vec<(Bigram, usize)> {
        self.max_heap
            .iter()
            .map(|&s| (self.slots[s].bigram, self.slots[s].freq))
            .collect()
    }
}
