//! The replacement loop.
//!
//! Turns are grouped into rounds. At the start of a round the `f_k` most
//! frequent bigrams are counted into a table `F`, and the smallest frequency
//! in it becomes the round's threshold `t`. Each turn replaces the most
//! frequent entry of `F` everywhere in the text and then fixes `F` up
//! locally: bigrams that lost occurrences are decremented, and bigrams
//! containing the new non-terminal are counted from the neighbors of its
//! occurrences and admitted when they reach `t`. The round ends when `F`
//! runs empty; the next one starts with a larger capacity, paid for by the
//! space the replacements freed.
//!
//! Only bigrams occurring at least three times go through this loop. Once
//! none is left, a simple scan handles the bigrams occurring twice.

use std::fmt;
use std::str::FromStr;

use crate::broadword::{hybrid_pick, packed_replace, top_d_bitparallel, CountingMethod, FrequencyIndex};
use crate::error::{Error, Result};
use crate::freq::{all_frequencies, rank, top_d_tradeoff, FreqStore};
use crate::model::{
    cell_width, model_width, Bigram, CapacityPolicy, Grammar, MemoryAccountant, PackedText, Slot,
    Symbol, SymbolSeq,
};

/// Smallest frequency the main loop replaces.
pub const MIN_LOOP_FREQUENCY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Block-wise top-d counting with a linearly scanned table.
    SmallSpace,
    /// Full frequency table recomputed every turn.
    Naive,
    /// Word-packed counting and replacement with a heap-backed table.
    BitParallel,
    /// Per round, whichever of the two counters is estimated to be cheaper.
    Hybrid,
    /// Replaces most frequent maximal repeats instead of bigrams.
    Mr,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::SmallSpace,
        Strategy::Naive,
        Strategy::BitParallel,
        Strategy::Hybrid,
        Strategy::Mr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SmallSpace => "smallspace",
            Strategy::Naive => "naive",
            Strategy::BitParallel => "bitparallel",
            Strategy::Hybrid => "hybrid",
            Strategy::Mr => "mr",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// One replacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TurnRecord {
    /// 1-based turn number.
    pub turn: usize,
    /// The bigram chosen (for maximal repeats, the bigram they grew from).
    pub replaced: Bigram,
    /// Its frequency in the text before the turn.
    pub freq: usize,
    pub new_symbol: Symbol,
    /// 0-based round the turn belongs to.
    pub round: usize,
}

/// Bookkeeping for one round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundStat {
    pub round: usize,
    /// Capacity `f_k` granted by the growth rule.
    pub capacity: usize,
    /// Entries actually allocated: `f_k` cut down to the text length and the
    /// remaining budget.
    pub allocated: usize,
    /// Growth factor `γ` evaluated at the start of the round.
    pub gamma: f64,
    /// Threshold at the start of the round, zero if no bigram qualified.
    pub threshold: usize,
    pub turns: usize,
    pub method: CountingMethod,
    /// Whether this is the closing phase for bigrams occurring twice.
    pub tail: bool,
}

/// Result of a compression run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub grammar: Grammar,
    pub turns: Vec<TurnRecord>,
    pub rounds: Vec<RoundStat>,
    pub peak_bits: u64,
    pub budget_bits: u64,
    pub breaches: Vec<String>,
}

impl Outcome {
    pub fn turn_count(&self) -> usize {
        self.turns.len()
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }
}

/// Options of [`run_repair_with`].
#[derive(Clone, Copy, Debug)]
pub struct RepairConfig {
    pub policy: CapacityPolicy,
    pub strategy: Strategy,
    /// Fail with [`Error::BudgetExceeded`] instead of only recording breaches.
    pub enforce_budget: bool,
}

impl RepairConfig {
    pub fn new(policy: CapacityPolicy, strategy: Strategy) -> Self {
        RepairConfig {
            policy,
            strategy,
            enforce_budget: false,
        }
    }
}

/// State exposed to an observer after each turn of the main loop.
pub struct Checkpoint<'a> {
    pub text: &'a PackedText,
    pub table: Vec<(Bigram, usize)>,
    pub threshold: usize,
    pub round: usize,
    /// Symbol count when the round started.
    pub round_start_tau: u64,
}

/// Mutable state of the current round.
#[derive(Debug)]
pub struct RoundState<S> {
    pub k: usize,
    pub capacity: usize,
    pub threshold: usize,
    pub table: S,
    /// Global turn counter.
    pub turn: usize,
}

/// Scratch buffer for the symbols next to the occurrences of a new
/// non-terminal.
#[derive(Clone, Debug, Default)]
pub struct NeighborBuffer {
    pub chars: Vec<Symbol>,
}

impl NeighborBuffer {
    /// Symbols directly left of each run of `x`; also returns the number of
    /// non-overlapping `xx` occurrences inside those runs.
    pub fn fill_left<S: SymbolSeq + ?Sized>(&mut self, text: &S, x: Symbol) -> usize {
        self.chars.clear();
        let mut xx = 0;
        let mut i = 0;
        let n = text.len();
        while i < n {
            if text.at(i) != x {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && text.at(i) == x {
                i += 1;
            }
            xx += (i - start) / 2;
            if start > 0 {
                self.chars.push(text.at(start - 1));
            }
        }
        xx
    }

    /// Symbols directly right of each run of `x`.
    pub fn fill_right<S: SymbolSeq + ?Sized>(&mut self, text: &S, x: Symbol) {
        self.chars.clear();
        let n = text.len();
        let mut i = 0;
        while i < n {
            if text.at(i) != x {
                i += 1;
                continue;
            }
            while i < n && text.at(i) == x {
                i += 1;
            }
            if i < n {
                self.chars.push(text.at(i));
            }
        }
    }

    /// Sorts the buffer and returns each distinct symbol with its count.
    pub fn counts(&mut self) -> Vec<(Symbol, usize)> {
        self.chars.sort_unstable();
        let mut out: Vec<(Symbol, usize)> = Vec::new();
        for &s in &self.chars {
            match out.last_mut() {
                Some((last, c)) if *last == s => *c += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }
}

/// Scans for the greedy occurrences of `b` and reports the bigrams whose
/// frequency each replacement lowers by one.
///
/// Calls `on_match(p)` for each occurrence start `p` in increasing order,
/// after the neighbors of `p` have been read. The callback may rewrite the
/// cells `p` and `p + 1`; everything else is read before it is touched.
fn scan_occurrences(
    text: &mut PackedText,
    b: Bigram,
    events: &mut Vec<Bigram>,
    mut on_match: impl FnMut(&mut PackedText, usize),
) -> usize {
    let n = text.len();
    let mut h = 0;
    // Position of the last pair already reported, so that the pair between
    // two abutting occurrences is reported once.
    let mut last_reported: Option<usize> = None;
    // Start of the previous occurrence: its right cell may already be
    // rewritten, but originally held `b.right`.
    let mut prev: Option<usize> = None;
    let original = |text: &PackedText, prev: Option<usize>, j: usize| -> Symbol {
        match prev {
            Some(p) if j == p + 1 => b.right,
            Some(p) if j == p => b.left,
            _ => text.get(j),
        }
    };
    let mut i = 0;
    while i + 1 < n {
        if text.get(i) != b.left || text.get(i + 1) != b.right {
            i += 1;
            continue;
        }
        let p = i;
        if p > 0 && last_reported != Some(p - 1) {
            let a = original(text, prev, p - 1);
            report(text, b, Bigram::new(a, b.left), p - 1, events);
        }
        if p + 2 < n {
            let d = text.get(p + 2);
            report(text, b, Bigram::new(b.right, d), p + 1, events);
            last_reported = Some(p + 1);
        }
        on_match(text, p);
        prev = Some(p);
        h += 1;
        i += 2;
    }
    h
}

/// Records the loss of the pair `pair` at position `j` (covering `j, j+1`).
fn report(
    text: &PackedText,
    b: Bigram,
    pair: Bigram,
    j: usize,
    events: &mut Vec<Bigram>,
) {
    if pair == b {
        return;
    }
    if !pair.is_run() {
        events.push(pair);
        return;
    }
    // A run of `s` loses one end symbol; its ⌊ℓ/2⌋ drops iff ℓ is even.
    // Only possible for b ≠ c: the run ends at `j + 1` (s = b) or starts
    // at `j` (s = c). The run cells themselves are never rewritten.
    let s = pair.left;
    let len = if s == b.left {
        let mut k = j + 1;
        while k > 0 && text.get(k - 1) == s {
            k -= 1;
        }
        j + 2 - k
    } else {
        let mut k = j + 1;
        while k < text.len() && text.get(k) == s {
            k += 1;
        }
        k - j
    };
    if len % 2 == 0 {
        events.push(pair);
    }
}

/// Replaces every greedy occurrence of `b` by `x`, compacts the text and
/// returns the number of replacements together with the bigrams whose
/// frequency dropped by one (one entry per lost occurrence).
///
/// A pair formed by two symbols of the replaced bigram itself is not
/// reported; runs of one symbol are reported only when their non-overlapping
/// count actually drops. The text must be wide enough to hold `x`.
pub fn replace_all(text: &mut PackedText, b: Bigram, x: Symbol) -> (usize, Vec<Bigram>) {
    assert!(u64::from(x.0) < text.dead_value(), "text too narrow for {x}");
    let mut events = Vec::new();
    let h = scan_occurrences(text, b, &mut events, |t, p| {
        t.set(p, x);
        t.mark_dead(p + 1);
    });
    if h > 0 {
        text.compact();
    }
    (h, events)
}

/// The decrement events of replacing `b`, without touching the text.
pub fn decrement_events(text: &PackedText, b: Bigram) -> (usize, Vec<Bigram>) {
    let mut events = Vec::new();
    // The scan only mutates through the callback, which does nothing here.
    let mut view = text.clone();
    let h = scan_occurrences(&mut view, b, &mut events, |_, _| {});
    (h, events)
}

/// Inserts `(b, freq)` when it reaches the threshold, evicting the minimum if
/// the table is full. Whatever is left out raises the threshold so that
/// every bigram outside the table stays at or below it.
fn admit<S: FreqStore + ?Sized>(table: &mut S, threshold: &mut usize, b: Bigram, freq: usize) {
    if freq < *threshold {
        return;
    }
    if table.len() < table.capacity() {
        table.insert(b, freq);
        return;
    }
    match table.min_entry() {
        Some(min) if rank(&(b, freq), &min).is_lt() => {
            table.remove(&min.0);
            table.insert(b, freq);
            *threshold = (*threshold).max(min.1);
        }
        _ => *threshold = (*threshold).max(freq),
    }
}

/// Brings the table in line with the text after `b` was replaced by `x`:
/// removes `b`, applies the decrements, and counts the bigrams `ax`, `xd`
/// and `xx` from the neighbors of `x`.
pub fn update_after_replace<S: FreqStore + ?Sized>(
    table: &mut S,
    threshold: &mut usize,
    text: &PackedText,
    b: Bigram,
    x: Symbol,
    dec_events: &[Bigram],
    buffer: &mut NeighborBuffer,
) {
    table.remove(&b);
    for e in dec_events {
        if let Some(f) = table.get(e) {
            if f <= *threshold {
                // f − 1 < t
                table.remove(e);
            } else {
                table.update(e, f - 1);
            }
        }
    }
    let xx = buffer.fill_left(text, x);
    for (a, f) in buffer.counts() {
        admit(table, threshold, Bigram::new(a, x), f);
    }
    admit(table, threshold, Bigram::new(x, x), xx);
    buffer.fill_right(text, x);
    for (d, f) in buffer.counts() {
        admit(table, threshold, Bigram::new(x, d), f);
    }
}

/// Capacity of the next round's table; see [`CapacityPolicy::next_capacity`].
pub fn next_capacity(policy: &CapacityPolicy, f_k: usize, n: usize, n_i: usize, sigma_next: u64) -> usize {
    policy.next_capacity(f_k, n as u64, n_i as u64, sigma_next)
}

/// Capacity after a round that started with growth factor `gamma`: the
/// growth rule evaluated now, but never below `⌈γ·f_k⌉`.
pub(crate) fn grown_capacity(
    policy: &CapacityPolicy,
    f_k: usize,
    gamma: f64,
    n: usize,
    n_i: usize,
    sigma_next: u64,
) -> usize {
    next_capacity(policy, f_k, n, n_i, sigma_next).max((gamma * f_k as f64).ceil() as usize)
}

/// Compresses `input` with default options except for the policy and the
/// strategy.
pub fn run_repair(input: &[Symbol], policy: &CapacityPolicy, strategy: Strategy) -> Result<Outcome> {
    run_repair_with(input, &RepairConfig::new(*policy, strategy), None)
}

/// Compresses `input`. The terminal alphabet is `0..=max(input)`.
///
/// `observer`, if given, is called after every turn of the main loop.
pub fn run_repair_with(
    input: &[Symbol],
    config: &RepairConfig,
    observer: Option<&mut dyn FnMut(&Checkpoint)>,
) -> Result<Outcome> {
    if input.is_empty() {
        return Err(Error::EmptyInput);
    }
    match config.strategy {
        Strategy::Mr => crate::variants::mr_repair_with(input, config),
        Strategy::Naive => Engine::new(input, config).run_naive(),
        _ => Engine::new(input, config).run(observer),
    }
}

/// Terminal count of an input: one more than its largest id.
pub(crate) fn terminal_count(input: &[Symbol]) -> u32 {
    input.iter().map(|s| s.0).max().map_or(0, |m| m + 1)
}

pub(crate) struct Engine {
    pub text: PackedText,
    pub grammar: Grammar,
    pub acct: MemoryAccountant,
    pub turns: Vec<TurnRecord>,
    pub rounds: Vec<RoundStat>,
    pub policy: CapacityPolicy,
    pub strategy: Strategy,
    pub n: usize,
    buffer: NeighborBuffer,
}

impl Engine {
    pub fn new(input: &[Symbol], config: &RepairConfig) -> Self {
        let sigma = terminal_count(input);
        let tau = u64::from(sigma);
        Engine {
            text: PackedText::from_symbols(input, tau),
            grammar: Grammar::new(sigma),
            acct: MemoryAccountant::new(input.len(), config.policy.c, tau)
                .enforcing(config.enforce_budget),
            turns: Vec::new(),
            rounds: Vec::new(),
            policy: config.policy,
            strategy: config.strategy,
            n: input.len(),
            buffer: NeighborBuffer::default(),
        }
    }

    pub fn tau(&self) -> u64 {
        u64::from(self.grammar.tau())
    }

    /// Bits per table entry for the next replacement.
    fn entry_bits(&self) -> u64 {
        u64::from(CapacityPolicy::entry_bits(self.tau() + 1, self.text.len() as u64))
    }

    fn rules_bits(&self) -> u64 {
        let w = u64::from(model_width(self.tau()));
        self.grammar.rules.iter().map(|r| r.len() as u64 * w).sum()
    }

    /// Largest table the remaining budget can hold next to the rules and a
    /// full neighbor buffer, at `per_entry` bits an entry.
    fn affordable(&self, per_entry: u64) -> usize {
        let w = u64::from(model_width(self.tau() + 1));
        let fixed = self.rules_bits() + self.text.len().div_ceil(2) as u64 * w;
        let room = self.acct.budget_bits().saturating_sub(fixed);
        (room / per_entry.max(1)) as usize
    }

    /// Introduces a new non-terminal for `rhs`, widening the text if needed.
    pub fn new_rule(&mut self, rhs: Vec<Symbol>) -> Symbol {
        let x = self.grammar.push_rule(rhs);
        let tau = self.tau();
        let width = cell_width(tau);
        if width > self.text.width() {
            self.text.widen(width);
        }
        self.acct.set_tau(tau);
        let bits = self.rules_bits();
        self.acct.set(Slot::Rules, bits);
        x
    }

    pub fn record(&mut self, b: Bigram, freq: usize, x: Symbol, round: usize) {
        let turn = self.turns.len() + 1;
        self.turns.push(TurnRecord {
            turn,
            replaced: b,
            freq,
            new_symbol: x,
            round,
        });
    }

    fn charge_neighbors(&mut self, h: usize) {
        let w = u64::from(model_width(self.tau()));
        self.acct.set(Slot::Neighbors, h as u64 * w);
    }

    fn method_for(&self, round: usize, f_k: usize) -> CountingMethod {
        match self.strategy {
            Strategy::BitParallel => CountingMethod::BitParallel,
            Strategy::Hybrid => hybrid_pick(round, f_k, self.text.len(), self.tau()),
            _ => CountingMethod::Tradeoff,
        }
    }

    fn run(mut self, mut observer: Option<&mut dyn FnMut(&Checkpoint)>) -> Result<Outcome> {
        let mut capacity = self.policy.f0;
        loop {
            let n_i = self.text.len();
            if n_i < 2 {
                break;
            }
            let k = self.rounds.len();
            let method = self.method_for(k, capacity);
            let delta = self.entry_bits();
            let per_entry = match method {
                CountingMethod::Tradeoff => 2 * delta,
                CountingMethod::BitParallel => delta + 4 * u64::from(model_width(n_i as u64)),
            };
            let allocated = capacity.min(n_i - 1).min(self.affordable(per_entry)).max(1);
            let gamma = self.policy.gamma(self.tau() + 1, n_i as u64, self.n as u64);
            let tau = self.tau();
            let mut entries = match method {
                CountingMethod::Tradeoff => {
                    top_d_tradeoff(&self.text, allocated, tau, Some(&mut self.acct)).into_entries()
                }
                CountingMethod::BitParallel => {
                    let t = top_d_bitparallel(&self.text, allocated, tau, Some(&mut self.acct));
                    self.acct.release(Slot::Table);
                    FrequencyIndex::charge(&mut self.acct, allocated, delta);
                    t.into_entries()
                }
            };
            entries.retain(|e| e.1 >= MIN_LOOP_FREQUENCY);
            let threshold = entries.iter().map(|e| e.1).min().unwrap_or(0);
            self.rounds.push(RoundStat {
                round: k,
                capacity,
                allocated,
                gamma,
                threshold,
                turns: 0,
                method,
                tail: false,
            });
            self.acct.audit(&format!("round {k} start"))?;
            if entries.is_empty() {
                break;
            }
            let turns = match method {
                CountingMethod::Tradeoff => {
                    let mut table = crate::freq::FrequencyTable::from_entries(entries, allocated);
                    table.threshold = threshold;
                    let state = RoundState {
                        k,
                        capacity: allocated,
                        threshold,
                        table,
                        turn: self.turns.len(),
                    };
                    self.run_round(state, false, &mut observer)?
                }
                CountingMethod::BitParallel => {
                    let table = FrequencyIndex::from_entries(&entries, allocated);
                    let state = RoundState {
                        k,
                        capacity: allocated,
                        threshold,
                        table,
                        turn: self.turns.len(),
                    };
                    self.run_round(state, true, &mut observer)?
                }
            };
            self.rounds[k].turns = turns;
            self.acct.release(Slot::Table);
            self.acct.release(Slot::Index);
            capacity = grown_capacity(&self.policy, capacity, gamma, self.n, self.text.len(), self.tau() + 1);
        }
        self.finish()
    }

    fn run_round<S: FreqStore>(
        &mut self,
        mut state: RoundState<S>,
        packed: bool,
        observer: &mut Option<&mut dyn FnMut(&Checkpoint)>,
    ) -> Result<usize> {
        let round_start_tau = self.tau();
        let mut turns = 0;
        while let Some((b, freq)) = state.table.max_entry() {
            let x = self.new_rule(vec![b.left, b.right]);
            let (h, events) = if packed {
                let (h, events) = decrement_events(&self.text, b);
                let h2 = packed_replace(&mut self.text, b, x);
                debug_assert_eq!(h, h2);
                (h, events)
            } else {
                replace_all(&mut self.text, b, x)
            };
            debug_assert_eq!(h, freq, "table frequency of {b} is stale");
            self.charge_neighbors(h);
            update_after_replace(
                &mut state.table,
                &mut state.threshold,
                &self.text,
                b,
                x,
                &events,
                &mut self.buffer,
            );
            self.record(b, freq, x, state.k);
            state.turn += 1;
            turns += 1;
            self.acct.audit(&format!("turn {}", state.turn))?;
            self.acct.release(Slot::Neighbors);
            if let Some(obs) = observer.as_deref_mut() {
                obs(&Checkpoint {
                    text: &self.text,
                    table: state.table.snapshot(),
                    threshold: state.threshold,
                    round: state.k,
                    round_start_tau,
                });
            }
        }
        Ok(turns)
    }

    /// Reference loop: a full frequency table every turn.
    fn run_naive(mut self) -> Result<Outcome> {
        loop {
            let k = self.rounds.len();
            let all = all_frequencies(&self.text);
            let delta = self.entry_bits();
            self.acct.set(Slot::Table, all.len() as u64 * delta);
            let best = all.into_iter().min_by(rank).filter(|e| e.1 >= MIN_LOOP_FREQUENCY);
            self.rounds.push(RoundStat {
                round: k,
                capacity: self.text.len(),
                allocated: self.text.len(),
                gamma: self.policy.gamma(self.tau() + 1, self.text.len() as u64, self.n as u64),
                threshold: best.map_or(0, |e| e.1),
                turns: usize::from(best.is_some()),
                method: CountingMethod::Tradeoff,
                tail: false,
            });
            self.acct.audit(&format!("round {k} start"))?;
            let Some((b, freq)) = best else { break };
            let x = self.new_rule(vec![b.left, b.right]);
            let (h, _) = replace_all(&mut self.text, b, x);
            debug_assert_eq!(h, freq);
            self.charge_neighbors(h);
            self.record(b, freq, x, k);
            self.acct.audit(&format!("turn {}", self.turns.len()))?;
            self.acct.release(Slot::Neighbors);
        }
        self.acct.release(Slot::Table);
        self.finish()
    }

    /// Runs the closing phase and packages the result.
    pub fn finish(mut self) -> Result<Outcome> {
        let round = self.rounds.len();
        let before = self.turns.len();
        low_freq_phase_inner(&mut self, round, &mut |_, _| None)?;
        self.close_tail(before, round);
        self.into_outcome()
    }

    pub fn close_tail(&mut self, before: usize, round: usize) {
        let made = self.turns.len() - before;
        if made > 0 {
            self.rounds.push(RoundStat {
                round,
                capacity: 0,
                allocated: 0,
                gamma: 1.0,
                threshold: 2,
                turns: made,
                method: CountingMethod::Tradeoff,
                tail: true,
            });
        }
    }

    pub fn into_outcome(mut self) -> Result<Outcome> {
        self.acct.audit("final")?;
        self.grammar.sequence = self.text.to_vec();
        Ok(Outcome {
            grammar: self.grammar,
            turns: self.turns,
            rounds: self.rounds,
            peak_bits: self.acct.peak_bits(),
            budget_bits: self.acct.budget_bits(),
            breaches: self.acct.breaches().to_vec(),
        })
    }
}

/// Hook letting a caller widen a bigram found twice into a longer rule.
/// Given the text and the two occurrence starts, returns the new starts of
/// both occurrences and the right-hand side, or `None` to keep the bigram.
/// The first start may not move left of one position before the cursor.
pub(crate) type TailExtender<'a> =
    dyn FnMut(&PackedText, (usize, usize)) -> Option<(usize, usize, Vec<Symbol>)> + 'a;

/// Replaces, one at a time, bigrams that occur exactly twice.
///
/// A cursor `k` moves left to right with no repeated bigram starting before
/// it. At `j`, the rest of the text is searched for a second occurrence of
/// `T[j]T[j+1]` not overlapping the first; if one exists both are replaced
/// and the scan resumes one position before `j`, where the new non-terminal
/// may have created a repeated bigram.
pub(crate) fn low_freq_phase_inner(
    engine: &mut Engine,
    round: usize,
    extend: &mut TailExtender<'_>,
) -> Result<usize> {
    let mut k = 0usize;
    let mut made = 0;
    while k + 1 < engine.text.len() {
        let b = Bigram::new(engine.text.get(k), engine.text.get(k + 1));
        let n_i = engine.text.len();
        let mut second = None;
        let mut j = k + 2;
        while j + 1 < n_i {
            if engine.text.get(j) == b.left && engine.text.get(j + 1) == b.right {
                second = Some(j);
                break;
            }
            j += 1;
        }
        let Some(j2) = second else {
            k += 1;
            continue;
        };
        let (s1, s2, rhs) = extend(&engine.text, (k, j2)).unwrap_or((k, j2, vec![b.left, b.right]));
        let len = rhs.len();
        let x = engine.new_rule(rhs);
        engine.text.set(s1, x);
        engine.text.set(s2, x);
        for i in 1..len {
            engine.text.mark_dead(s1 + i);
            engine.text.mark_dead(s2 + i);
        }
        engine.text.compact();
        engine.charge_neighbors(2);
        engine.record(b, 2, x, round);
        engine.acct.audit(&format!("turn {}", engine.turns.len()))?;
        engine.acct.release(Slot::Neighbors);
        made += 1;
        k = s1.saturating_sub(1);
    }
    Ok(made)
}

/// Runs only the closing phase on `text`, appending rules to `grammar`.
/// Meant for texts in which no bigram occurs three times or more.
pub fn low_freq_phase(text: &[Symbol], grammar: &mut Grammar) -> Result<Vec<Symbol>> {
    let config = RepairConfig::new(CapacityPolicy::default(), Strategy::SmallSpace);
    let mut engine = Engine::new(text, &config);
    engine.grammar = grammar.clone();
    let tau = engine.tau();
    engine.text = PackedText::from_symbols(text, tau);
    low_freq_phase_inner(&mut engine, 0, &mut |_, _| None)?;
    *grammar = engine.grammar;
    Ok(engine.text.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::{bigram_frequency, max_frequency, FrequencyTable};
    use crate::model::{from_letters, symbols};
    use rand::{Rng, SeedableRng};

    const WORKED: &str = "cabaacabcabaacaaabcab";

    fn packed(v: &[Symbol], extra: u64) -> PackedText {
        PackedText::from_symbols(v, u64::from(terminal_count(v)) + extra)
    }

    #[test]
    fn replace_worked_example() {
        let v = from_letters(WORKED);
        let mut t = packed(&v, 1);
        let (h, _) = replace_all(&mut t, Bigram::new(0, 1), Symbol(3));
        assert_eq!(h, 5);
        let x = 3;
        assert_eq!(t.to_vec(), symbols(&[2, x, 0, 0, 2, x, 2, x, 0, 0, 2, 0, 0, x, 2, x]));
        assert_eq!(t.len(), 16);
    }

    #[test]
    fn replace_overlapping_and_isolated() {
        let mut t = packed(&from_letters("aaa"), 1);
        assert_eq!(replace_all(&mut t, Bigram::new(0, 0), Symbol(1)).0, 1);
        assert_eq!(t.to_vec(), symbols(&[1, 0]));

        let mut t = packed(&from_letters("bb"), 1);
        let (h, ev) = replace_all(&mut t, Bigram::new(1, 1), Symbol(2));
        assert_eq!((h, ev.len()), (1, 0));
        assert_eq!(t.to_vec(), symbols(&[2]));

        let mut t = packed(&from_letters("abc"), 1);
        assert_eq!(replace_all(&mut t, Bigram::new(2, 2), Symbol(3)).0, 0);
        assert_eq!(t.to_vec(), from_letters("abc"));
    }

    /// Exact frequency changes, checked against recounting before and after.
    #[test]
    fn decrement_events_match_recount() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3000 {
            let sigma = rng.gen_range(1..=4u32);
            let n = rng.gen_range(2..60);
            let v: Vec<Symbol> = (0..n).map(|_| Symbol(rng.gen_range(0..sigma))).collect();
            let b = Bigram::new(v[0], v[1]);
            let x = Symbol(sigma);
            let before = all_frequencies(&v);
            let mut t = PackedText::from_symbols(&v, u64::from(sigma) + 1);
            let (h, events) = replace_all(&mut t, b, x);
            assert_eq!(h, before[&b]);
            let after = all_frequencies(&t.to_vec());
            for (bg, f) in &before {
                if *bg == b {
                    continue;
                }
                let lost = events.iter().filter(|e| *e == bg).count();
                let now = after.get(bg).copied().unwrap_or(0);
                assert_eq!(f - lost, now, "{v:?} replacing {b}: {bg}");
            }
        }
    }

    #[test]
    fn neighbor_pass_counts_runs_without_overlap() {
        let x = Symbol(5);
        let text = vec![Symbol(0), x, x, x, x, Symbol(1), x];
        let mut buf = NeighborBuffer::default();
        assert_eq!(buf.fill_left(&text, x), 2);
        assert_eq!(buf.counts(), vec![(Symbol(0), 1), (Symbol(1), 1)]);
        buf.fill_right(&text, x);
        assert_eq!(buf.counts(), vec![(Symbol(1), 1)]);

        let xs = vec![x; 4];
        assert_eq!(buf.fill_left(&xs, x), 2);
        assert!(buf.counts().is_empty());
    }

    #[test]
    fn worked_example_turn_matches_oracle() {
        let v = from_letters(WORKED);
        let top = top_d_tradeoff(&v, 3, 3, None);
        let mut table = FrequencyTable::from_entries(top.into_entries(), 3);
        let mut t = table.min_frequency().unwrap();
        assert_eq!(t, 3);
        let mut text = packed(&v, 1);
        let b = table.max_entry().unwrap().0;
        assert_eq!(b, Bigram::new(0, 1));
        let (_, events) = replace_all(&mut text, b, Symbol(3));
        update_after_replace(&mut table, &mut t, &text, b, Symbol(3), &events, &mut NeighborBuffer::default());
        let truth = all_frequencies(&text);
        for (bg, f) in table.entries() {
            assert_eq!(truth[bg], *f);
            assert!(*f >= t);
        }
        // Everything left out is at or below the threshold.
        for (bg, f) in &truth {
            if table.get(bg).is_none() {
                assert!(*f <= t, "{bg} has {f}");
            }
        }
    }

    #[test]
    fn unary_eight() {
        let out = run_repair(&[Symbol(0); 8], &CapacityPolicy::default(), Strategy::SmallSpace).unwrap();
        assert_eq!(out.grammar.rules, vec![symbols(&[0, 0]), symbols(&[1, 1])]);
        assert_eq!(out.grammar.sequence, symbols(&[2, 2]));
    }

    #[test]
    fn unique_bigrams_give_no_rules() {
        let v = from_letters("abcdefg");
        let out = run_repair(&v, &CapacityPolicy::default(), Strategy::SmallSpace).unwrap();
        assert!(out.grammar.rules.is_empty());
        assert_eq!(out.grammar.sequence, v);
    }

    #[test]
    fn empty_and_single() {
        assert!(matches!(
            run_repair(&[], &CapacityPolicy::default(), Strategy::SmallSpace),
            Err(Error::EmptyInput)
        ));
        let out = run_repair(&[Symbol(0)], &CapacityPolicy::default(), Strategy::SmallSpace).unwrap();
        assert!(out.grammar.rules.is_empty());
        assert_eq!(out.grammar.sequence, vec![Symbol(0)]);
    }

    #[test]
    fn closing_phase_examples() {
        let mut g = Grammar::new(3);
        let out = low_freq_phase(&from_letters("abcab"), &mut g).unwrap();
        assert_eq!(g.rules, vec![symbols(&[0, 1])]);
        assert_eq!(out, symbols(&[3, 2, 3]));

        let mut g = Grammar::new(3);
        assert_eq!(low_freq_phase(&from_letters("abc"), &mut g).unwrap(), from_letters("abc"));
        assert!(g.rules.is_empty());

        let mut g = Grammar::new(2);
        assert_eq!(low_freq_phase(&from_letters("abab"), &mut g).unwrap(), symbols(&[2, 2]));
        assert_eq!(g.rules, vec![symbols(&[0, 1])]);
    }

    #[test]
    fn every_strategy_round_trips_and_picks_a_maximum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for case in 0..300 {
            let sigma = rng.gen_range(1..=5u32);
            let n = rng.gen_range(1..150);
            let v: Vec<Symbol> = (0..n).map(|_| Symbol(rng.gen_range(0..sigma))).collect();
            for st in [Strategy::SmallSpace, Strategy::Naive, Strategy::BitParallel, Strategy::Hybrid] {
                let out = run_repair(&v, &CapacityPolicy::default(), st).unwrap();
                assert_eq!(out.grammar.expand().unwrap(), v, "case {case} {st}");
                // Replay the main-loop turns against the brute-force maximum.
                let mut text = v.clone();
                let sigma = terminal_count(&v);
                for (tau, r) in (sigma..).zip(out.turns.iter().take_while(|r| r.freq >= 3)) {
                    assert_eq!(r.freq, max_frequency(&text), "case {case} {st} turn {}", r.turn);
                    assert_eq!(r.freq, bigram_frequency(&text, r.replaced));
                    let mut p = PackedText::from_symbols(&text, u64::from(tau) + 1);
                    replace_all(&mut p, r.replaced, Symbol(tau));
                    text = p.to_vec();
                }
                assert!(max_frequency(&text) <= 2, "case {case} {st}");
                assert!(max_frequency(&out.grammar.sequence) <= 1, "case {case} {st}");
            }
        }
    }

    #[test]
    fn strategy_names_parse() {
        for st in Strategy::ALL {
            assert_eq!(st.name().parse::<Strategy>().unwrap(), st);
        }
        assert!("fast".parse::<Strategy>().is_err());
    }
}
