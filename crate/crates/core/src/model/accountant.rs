use super::{clog2, lg};
use crate::error::{Error, Result};

/// Slack words (of `lg n` bits each) allowed on top of the main budget term.
pub const DEFAULT_SLACK_WORDS: u32 = 64;

/// Structures whose bits are charged against the working-space budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    /// The frequency table `F` of the current round.
    Table,
    /// The block counter's scratch table `F′`.
    Scratch,
    /// The neighbor buffer `D`.
    Neighbors,
    /// The rule array `A`.
    Rules,
    /// Heaps, bigram store and pointer array of the frequency index.
    Index,
    /// Counter banks of the heuristics.
    Counters,
}

const SLOTS: usize = 6;

impl Slot {
    fn idx(self) -> usize {
        match self {
            Slot::Table => 0,
            Slot::Scratch => 1,
            Slot::Neighbors => 2,
            Slot::Rules => 3,
            Slot::Index => 4,
            Slot::Counters => 5,
        }
    }
}

/// Bit-level ledger of the auxiliary structures.
///
/// The budget is `max((n/c)·lg n, n·⌈lg τ⌉) + C·lg n` bits with `C` slack
/// words. `τ` is the current symbol count, so the budget only grows as
/// non-terminals are introduced. Transient space needed to widen the text is
/// not charged.
#[derive(Clone, Debug)]
pub struct MemoryAccountant {
    n: u64,
    c: u32,
    slack_words: u32,
    tau: u64,
    slots: [u64; SLOTS],
    peak: u64,
    enforce: bool,
    breaches: Vec<String>,
}

impl MemoryAccountant {
    pub fn new(n: usize, c: u32, tau: u64) -> Self {
        MemoryAccountant {
            n: n as u64,
            c: c.max(1),
            slack_words: DEFAULT_SLACK_WORDS,
            tau,
            slots: [0; SLOTS],
            peak: 0,
            enforce: false,
            breaches: Vec::new(),
        }
    }

    /// When enforcing, [`audit`](Self::audit) fails on a breach; otherwise
    /// breaches are only recorded.
    pub fn enforcing(mut self, enforce: bool) -> Self {
        self.enforce = enforce;
        self
    }

    pub fn budget_for(n: u64, c: u32, tau: u64, slack_words: u32) -> u64 {
        let lgn = lg(n);
        let by_n = n as f64 / f64::from(c) * lgn;
        let by_tau = (n * u64::from(clog2(tau))) as f64;
        (by_n.max(by_tau) + f64::from(slack_words) * lgn).floor() as u64
    }

    pub fn budget_bits(&self) -> u64 {
        Self::budget_for(self.n, self.c, self.tau, self.slack_words)
    }

    pub fn set_tau(&mut self, tau: u64) {
        self.tau = self.tau.max(tau);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn charged_bits(&self) -> u64 {
        self.slots.iter().sum()
    }

    pub fn slot(&self, slot: Slot) -> u64 {
        self.slots[slot.idx()]
    }

    pub fn peak_bits(&self) -> u64 {
        self.peak
    }

    /// Bits still available before the budget is reached.
    pub fn available(&self) -> u64 {
        self.budget_bits().saturating_sub(self.charged_bits())
    }

    pub fn set(&mut self, slot: Slot, bits: u64) {
        self.slots[slot.idx()] = bits;
        self.peak = self.peak.max(self.charged_bits());
    }

    pub fn add(&mut self, slot: Slot, bits: u64) {
        self.set(slot, self.slots[slot.idx()] + bits);
    }

    pub fn release(&mut self, slot: Slot) {
        self.slots[slot.idx()] = 0;
    }

    pub fn breaches(&self) -> &[String] {
        &self.breaches
    }

    /// Checks the current charge, and the peak since the last audit, against
    /// the budget.
    pub fn audit(&mut self, label: &str) -> Result<()> {
        let budget = self.budget_bits();
        let charged = self.peak.max(self.charged_bits());
        if charged <= budget {
            return Ok(());
        }
        self.breaches.push(format!("{label}: {charged} > {budget}"));
        if self.enforce {
            return Err(Error::BudgetExceeded {
                label: label.to_string(),
                charged,
                budget,
            });
        }
        Ok(())
    }

    /// Like [`audit`](Self::audit) but always fails on a breach.
    pub fn check(&mut self, label: &str) -> Result<()> {
        let enforce = self.enforce;
        self.enforce = true;
        let r = self.audit(label);
        self.enforce = enforce;
        r
    }
}
