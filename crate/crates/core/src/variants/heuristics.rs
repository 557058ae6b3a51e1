use crate::engine::{replace_all, terminal_count, NeighborBuffer, TurnRecord, MIN_LOOP_FREQUENCY};
use crate::error::{Error, Result};
use crate::freq::{bigram_frequency, rank};
use crate::model::{cell_width, clog2, lg, Bigram, Grammar, MemoryAccountant, PackedText, Slot, Symbol};

/// Result of [`heuristic_full_table`].
#[derive(Clone, Debug)]
pub struct FullTableRun {
    /// Rules created so far; `grammar.sequence` is left empty.
    pub grammar: Grammar,
    /// The text after the last replacement.
    pub text: Vec<Symbol>,
    pub turns: Vec<TurnRecord>,
    /// Whether the matrix outgrew the budget before the text ran out of
    /// bigrams occurring three times or more.
    pub handed_off: bool,
}

/// Dense `τ × τ` frequency matrix kept exact across replacements.
struct Matrix {
    tau: usize,
    cells: Vec<usize>,
}

impl Matrix {
    fn at(&mut self, b: Bigram) -> &mut usize {
        &mut self.cells[b.left.index() * self.tau + b.right.index()]
    }

    fn grow(&mut self, tau: usize) {
        let mut cells = vec![0; tau * tau];
        for l in 0..self.tau {
            cells[l * tau..l * tau + self.tau].copy_from_slice(&self.cells[l * self.tau..(l + 1) * self.tau]);
        }
        self.tau = tau;
        self.cells = cells;
    }

    fn best(&self) -> Option<(Bigram, usize)> {
        // Scanning in bigram order and keeping strict improvements yields
        // the smallest bigram among the maxima.
        let mut best: Option<(Bigram, usize)> = None;
        for (i, &f) in self.cells.iter().enumerate() {
            if f > best.map_or(0, |b| b.1) {
                best = Some((Bigram::new((i / self.tau) as u32, (i % self.tau) as u32), f));
            }
        }
        best
    }
}

/// Re-Pair with a full `τ × τ` frequency matrix, usable while `τ² lg n`
/// bits fit in `budget_bits`.
///
/// One scan fills the matrix; each turn replaces the maximum and corrects
/// the matrix from the replacement's decrement list and the neighbors of the
/// new symbol. The loop stops, handing the text back, as soon as the matrix
/// for one more symbol would not fit, or when no bigram occurs three times.
pub fn heuristic_full_table(text: &[Symbol], budget_bits: u64) -> FullTableRun {
    let sigma = terminal_count(text);
    let mut grammar = Grammar::new(sigma);
    let mut turns = Vec::new();
    let n = text.len() as u64;
    let fits = |tau: u64| (tau * tau) as f64 * lg(n) <= budget_bits as f64;
    if !fits(u64::from(sigma)) {
        return FullTableRun {
            grammar,
            text: text.to_vec(),
            turns,
            handed_off: true,
        };
    }
    let mut m = Matrix {
        tau: sigma as usize,
        cells: vec![0; (sigma as usize).pow(2)],
    };
    for (b, f) in crate::freq::all_frequencies(text) {
        *m.at(b) = f;
    }
    let mut packed = PackedText::from_symbols(text, u64::from(sigma));
    let mut buffer = NeighborBuffer::default();
    let mut handed_off = false;
    while let Some((b, freq)) = m.best().filter(|e| e.1 >= MIN_LOOP_FREQUENCY) {
        let tau = u64::from(grammar.tau()) + 1;
        if !fits(tau) {
            handed_off = true;
            break;
        }
        let x = grammar.push_rule(vec![b.left, b.right]);
        if cell_width(tau) > packed.width() {
            packed.widen(cell_width(tau));
        }
        m.grow(tau as usize);
        let (_, events) = replace_all(&mut packed, b, x);
        *m.at(b) = 0;
        for e in events {
            *m.at(e) -= 1;
        }
        let xx = buffer.fill_left(&packed, x);
        for (a, f) in buffer.counts() {
            *m.at(Bigram::new(a, x)) = f;
        }
        *m.at(Bigram::new(x, x)) = xx;
        buffer.fill_right(&packed, x);
        for (d, f) in buffer.counts() {
            *m.at(Bigram::new(x, d)) = f;
        }
        turns.push(TurnRecord {
            turn: turns.len() + 1,
            replaced: b,
            freq,
            new_symbol: x,
            round: 0,
        });
    }
    FullTableRun {
        grammar,
        text: packed.to_vec(),
        turns,
        handed_off,
    }
}

/// A most frequent bigram found through prefix counts.
///
/// Entry `j` of an array of `n − 1` counters receives the number of
/// non-overlapping occurrences of `T[j]T[j+1]` starting at or before `j`.
/// The array is filled in one pass per distinct first symbol, each pass
/// keeping a bank of counters indexed by the second symbol. The largest
/// entry is the highest frequency; among the bigrams reaching it the
/// smallest is returned.
pub fn heuristic_position_table(
    text: &[Symbol],
    acct: Option<&mut MemoryAccountant>,
) -> Result<(Bigram, usize)> {
    let n = text.len();
    if n < 2 {
        return Err(Error::TooShort);
    }
    let tau = terminal_count(text) as usize;
    if let Some(a) = acct {
        let entry = u64::from(clog2((n as u64 / 2).max(2)));
        a.set(Slot::Table, (n as u64 - 1) * entry);
        a.set(Slot::Counters, tau as u64 * u64::from(clog2(n as u64).max(1)));
    }
    let mut prefix = vec![0usize; n - 1];
    let mut counters = vec![0usize; tau];
    let mut firsts: Vec<Symbol> = text[..n - 1].to_vec();
    firsts.sort_unstable();
    firsts.dedup();
    for first in firsts {
        counters.iter_mut().for_each(|c| *c = 0);
        // Next position an occurrence of `first first` may start at.
        let mut free_from = 0;
        for j in 0..n - 1 {
            if text[j] != first {
                continue;
            }
            let second = text[j + 1];
            if second == first {
                if j >= free_from {
                    counters[second.index()] += 1;
                    free_from = j + 2;
                }
            } else {
                counters[second.index()] += 1;
            }
            prefix[j] = counters[second.index()];
        }
    }
    let mut best = (Bigram::new(text[0], text[1]), prefix[0]);
    for j in 1..n - 1 {
        let cand = (Bigram::new(text[j], text[j + 1]), prefix[j]);
        if rank(&cand, &best).is_lt() {
            best = cand;
        }
    }
    Ok(best)
}

/// Result of [`heuristic_majority`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MajorityVote {
    pub bigram: Bigram,
    /// Exact non-overlapping frequency of `bigram`.
    pub freq: usize,
    /// Whether `freq` exceeds the summed frequencies of all other bigrams,
    /// in which case `bigram` is guaranteed to be the most frequent one.
    pub premise_holds: bool,
}

/// Boyer–Moore majority vote over the stream of adjacent pairs, followed by
/// a verification scan.
///
/// The vote runs over all `n − 1` overlapping pairs. The second scan counts
/// the candidate's non-overlapping occurrences and the total of all
/// frequencies, `(n − 1) − Σ (ℓ − 1 − ⌊ℓ/2⌋)` over runs of length `ℓ`, to
/// report whether the skewed-input premise holds.
pub fn heuristic_majority(text: &[Symbol]) -> Result<MajorityVote> {
    if text.len() < 2 {
        return Err(Error::TooShort);
    }
    let mut candidate = Bigram::new(text[0], text[1]);
    let mut votes = 0usize;
    for w in text.windows(2) {
        let b = Bigram::new(w[0], w[1]);
        if votes == 0 {
            candidate = b;
            votes = 1;
        } else if b == candidate {
            votes += 1;
        } else {
            votes -= 1;
        }
    }
    let freq = bigram_frequency(text, candidate);
    let mut total = text.len() - 1;
    let mut run = 1;
    for i in 1..=text.len() {
        if i < text.len() && text[i] == text[i - 1] {
            run += 1;
        } else {
            total -= run - 1 - run / 2;
            run = 1;
        }
    }
    Ok(MajorityVote {
        bigram: candidate,
        freq,
        premise_holds: freq > total - freq,
    })
}
