use crate::engine::{
    grown_capacity, low_freq_phase_inner, replace_all, update_after_replace, Engine, NeighborBuffer, Outcome,
    RepairConfig, RoundStat, Strategy, MIN_LOOP_FREQUENCY,
};
use crate::broadword::CountingMethod;
use crate::error::{Error, Result};
use crate::freq::{bigram_frequency, top_d_tradeoff, FreqStore, FrequencyTable};
use crate::model::{Bigram, CapacityPolicy, PackedText, Slot, Symbol, SymbolSeq};

/// A repeated substring that cannot be extended without losing occurrences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalRepeat {
    pub content: Vec<Symbol>,
    pub freq: usize,
    pub source_bigram: Bigram,
    /// Start positions of the non-overlapping occurrences that were grown.
    pub starts: Vec<usize>,
}

/// Greedy non-overlapping occurrence starts of `b`.
fn occurrences<S: SymbolSeq + ?Sized>(text: &S, b: Bigram) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < text.len() {
        if text.at(i) == b.left && text.at(i + 1) == b.right {
            out.push(i);
            i += 2;
        } else {
            i += 1;
        }
    }
    out
}

/// Grows the occurrences at `starts` (each of length `len`) to the left and
/// then to the right while all of them see the same next symbol and stay
/// disjoint. Returns how far they moved left and their final length.
fn grow<S: SymbolSeq + ?Sized>(text: &S, starts: &[usize], mut len: usize) -> (usize, usize) {
    let disjoint = |shift_left: usize, len: usize| {
        starts
            .windows(2)
            .all(|w| w[0] - shift_left + len <= w[1] - shift_left)
    };
    let mut left = 0;
    loop {
        if starts[0] < left + 1 || !disjoint(left + 1, len + 1) {
            break;
        }
        let s = text.at(starts[0] - left - 1);
        if starts.iter().all(|&p| text.at(p - left - 1) == s) {
            left += 1;
            len += 1;
        } else {
            break;
        }
    }
    loop {
        let last = *starts.last().unwrap() - left + len;
        if last >= text.len() || !disjoint(left, len + 1) {
            break;
        }
        let s = text.at(starts[0] - left + len);
        if starts.iter().all(|&p| text.at(p - left + len) == s) {
            len += 1;
        } else {
            break;
        }
    }
    (left, len)
}

/// Moves each greedy occurrence of `aa` inside a run of odd length one
/// position right, so that the occurrences end where the run ends.
fn right_aligned<S: SymbolSeq + ?Sized>(text: &S, a: Symbol, starts: &[usize]) -> Vec<usize> {
    let mut out = starts.to_vec();
    let mut i = 0;
    while i < out.len() {
        let run_start = out[i];
        let mut end = run_start;
        while end < text.len() && text.at(end) == a {
            end += 1;
        }
        let mut j = i;
        while j < out.len() && out[j] < end {
            j += 1;
        }
        if (end - run_start) % 2 == 1 {
            for p in &mut out[i..j] {
                *p += 1;
            }
        }
        i = j;
    }
    out
}

/// Extends the greedy occurrences of `b` to a maximal repeat: first to the
/// left, then to the right, as long as every occurrence agrees on the next
/// symbol and the occurrences remain non-overlapping.
pub fn extend_to_maximal_repeat<S: SymbolSeq + ?Sized>(text: &S, b: Bigram) -> Result<MaximalRepeat> {
    let starts = occurrences(text, b);
    if starts.len() < 2 {
        return Err(Error::NotRepeated);
    }
    let (mut left, mut len) = grow(text, &starts, 2);
    let mut starts = starts;
    if b.left == b.right {
        // In a run of odd length the last symbol is left over; aligning the
        // occurrences to the run ends instead may allow growth to the right.
        let shifted = right_aligned(text, b.left, &starts);
        if shifted != starts {
            let (l, n) = grow(text, &shifted, 2);
            if n > len {
                (left, len, starts) = (l, n, shifted);
            }
        }
    }
    let first = starts[0] - left;
    Ok(MaximalRepeat {
        content: (first..first + len).map(|i| text.at(i)).collect(),
        freq: starts.len(),
        source_bigram: b,
        starts: starts.iter().map(|p| p - left).collect(),
    })
}

/// MR-Re-Pair with the default options for everything but the policy.
pub fn mr_repair(input: &[Symbol], policy: &CapacityPolicy) -> Result<Outcome> {
    if input.is_empty() {
        return Err(Error::EmptyInput);
    }
    mr_repair_with(input, &RepairConfig::new(*policy, Strategy::Mr))
}

/// Replaces the occurrences of `rep` by `x` and compacts the text.
fn replace_repeat(text: &mut PackedText, rep: &MaximalRepeat, x: Symbol) {
    for &p in &rep.starts {
        text.set(p, x);
        for i in 1..rep.content.len() {
            text.mark_dead(p + i);
        }
    }
    text.compact();
}

pub(crate) fn mr_repair_with(input: &[Symbol], config: &RepairConfig) -> Result<Outcome> {
    let mut engine = Engine::new(input, config);
    let mut capacity = engine.policy.f0;
    let mut buffer = NeighborBuffer::default();
    loop {
        let n_i = engine.text.len();
        if n_i < 2 {
            break;
        }
        let k = engine.rounds.len();
        let tau = engine.tau();
        let gamma = engine.policy.gamma(tau + 1, n_i as u64, engine.n as u64);
        let delta = u64::from(CapacityPolicy::entry_bits(tau + 1, n_i as u64));
        let allocated = capacity.min(n_i - 1).min(affordable(&engine, 2 * delta)).max(1);
        let mut table = top_d_tradeoff(&engine.text, allocated, tau, Some(&mut engine.acct));
        table.retain_at_least(MIN_LOOP_FREQUENCY);
        let threshold = table.min_frequency().unwrap_or(0);
        table.threshold = threshold;
        engine.rounds.push(RoundStat {
            round: k,
            capacity,
            allocated,
            gamma,
            threshold,
            turns: 0,
            method: CountingMethod::Tradeoff,
            tail: false,
        });
        engine.acct.audit(&format!("round {k} start"))?;
        if table.is_empty() {
            break;
        }
        let mut t = threshold;
        let mut turns = 0;
        while let Some((b, freq)) = table.max_entry() {
            let rep = extend_to_maximal_repeat(&engine.text, b)?;
            debug_assert_eq!(rep.freq, freq);
            let x = engine.new_rule(rep.content.clone());
            if rep.content.len() == 2 {
                let (_, events) = replace_all(&mut engine.text, b, x);
                update_after_replace(&mut table, &mut t, &engine.text, b, x, &events, &mut buffer);
            } else {
                replace_repeat(&mut engine.text, &rep, x);
                recount(&mut table, &mut t, &engine.text, &rep, x, &mut buffer);
            }
            engine.acct.set(Slot::Neighbors, freq as u64 * u64::from(crate::model::model_width(engine.tau())));
            engine.record(b, freq, x, k);
            turns += 1;
            engine.acct.audit(&format!("turn {}", engine.turns.len()))?;
            engine.acct.release(Slot::Neighbors);
        }
        engine.rounds[k].turns = turns;
        engine.acct.release(Slot::Table);
        capacity = grown_capacity(&engine.policy, capacity, gamma, engine.n, engine.text.len(), engine.tau() + 1);
    }
    let round = engine.rounds.len();
    let before = engine.turns.len();
    low_freq_phase_inner(&mut engine, round, &mut |text, (p1, p2)| {
        // Inside a run `aaa` either of the two overlapping `aa` may be the
        // one that grows further; try both for each occurrence.
        let shifts = |p: usize| {
            let run = text.get(p) == text.get(p + 1) && p + 2 < text.len() && text.get(p + 2) == text.get(p);
            if run { vec![p, p + 1] } else { vec![p] }
        };
        let mut best: Option<(usize, usize, usize)> = None;
        for a in shifts(p1) {
            for b in shifts(p2) {
                if a + 2 > b {
                    continue;
                }
                let (left, len) = grow(text, &[a, b], 2);
                if best.is_none_or(|(_, _, l)| len > l) {
                    best = Some((a - left, b - left, len));
                }
            }
        }
        let (s1, s2, len) = best?;
        (len > 2).then(|| (s1, s2, (s1..s1 + len).map(|i| text.get(i)).collect()))
    })?;
    engine.close_tail(before, round);
    engine.into_outcome()
}

fn affordable(engine: &Engine, per_entry: u64) -> usize {
    let w = u64::from(crate::model::model_width(engine.tau() + 1));
    let rules: u64 = engine.grammar.rules.iter().map(|r| r.len() as u64 * w).sum();
    let fixed = rules + engine.text.len().div_ceil(2) as u64 * w;
    (engine.acct.budget_bits().saturating_sub(fixed) / per_entry.max(1)) as usize
}

/// Table maintenance after replacing a repeat longer than a bigram: every
/// entry sharing a symbol with the repeat is recounted, then the bigrams
/// around `x` are admitted as usual.
fn recount(
    table: &mut FrequencyTable,
    threshold: &mut usize,
    text: &PackedText,
    rep: &MaximalRepeat,
    x: Symbol,
    buffer: &mut NeighborBuffer,
) {
    table.remove(&rep.source_bigram);
    let touched: Vec<Bigram> = table
        .entries()
        .iter()
        .map(|e| e.0)
        .filter(|b| rep.content.contains(&b.left) || rep.content.contains(&b.right))
        .collect();
    for b in touched {
        let f = bigram_frequency(text, b);
        if f < *threshold {
            table.remove(&b);
        } else {
            table.update(&b, f);
        }
    }
    // The decrement list is empty: everything affected was recounted.
    update_after_replace(table, threshold, text, Bigram::new(x, x), x, &[], buffer);
}
