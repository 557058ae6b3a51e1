//! Prefix benchmarks.
//!
//! Each row compresses the first `prefix_bytes` bytes of a dataset and
//! reports the wall-clock time of the fastest of several repetitions
//! together with the run's turn, round and rule counts, the grammar size and
//! the peak of the working-space ledger.

use std::time::Instant;

use rand::{Rng, SeedableRng};

use crate::codec::bytes_to_symbols;
use crate::engine::{run_repair_with, RepairConfig};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "dataset,prefix_bytes,seconds,turns,rounds,rules,grammar_size,peak_bits";

/// Name of the generated unary dataset.
pub const UNARY: &str = "unary";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub prefix_bytes: usize,
    pub seconds: f64,
    pub turns: usize,
    pub rounds: usize,
    pub rules: usize,
    pub grammar_size: usize,
    pub peak_bits: u64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.6},{},{},{},{},{}",
            self.dataset.replace(',', "_"),
            self.prefix_bytes,
            self.seconds,
            self.turns,
            self.rounds,
            self.rules,
            self.grammar_size,
            self.peak_bits
        )
    }
}

/// `len` copies of the byte `a`.
pub fn unary_dataset(len: usize) -> Vec<u8> {
    vec![b'a'; len]
}

/// Deterministic text-like data: words drawn from a small random vocabulary
/// with a skewed distribution, separated by spaces.
pub fn generated_text(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<Vec<u8>> = (0..200)
        .map(|_| {
            let l = rng.gen_range(2..9);
            (0..l).map(|_| rng.gen_range(b'a'..=b'z')).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(len + 10);
    while out.len() < len {
        // Squaring a uniform draw favors the first words.
        let u: f64 = rng.gen();
        let w = &vocab[((u * u) * vocab.len() as f64) as usize];
        out.extend_from_slice(w);
        out.push(b' ');
    }
    out.truncate(len);
    out
}

/// Parses sizes such as `4096`, `64K`, `1M` (binary multiples).
pub fn parse_size(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    let (digits, mult) = match s.chars().last() {
        Some('K' | 'k') => (&s[..s.len() - 1], 1usize << 10),
        Some('M' | 'm') => (&s[..s.len() - 1], 1 << 20),
        Some('G' | 'g') => (&s[..s.len() - 1], 1 << 30),
        _ => (s, 1),
    };
    let v: usize = digits.parse().map_err(|_| format!("invalid size `{s}`"))?;
    v.checked_mul(mult).ok_or_else(|| format!("size `{s}` too large"))
}

/// Benchmarks one prefix, keeping the fastest of `repeats` runs.
pub fn run_prefix(
    dataset: &str,
    data: &[u8],
    prefix: usize,
    config: &RepairConfig,
    repeats: usize,
) -> Result<BenchRow> {
    if prefix == 0 || prefix > data.len() {
        return Err(Error::TooShort);
    }
    let (symbols, _) = bytes_to_symbols(&data[..prefix]);
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = run_repair_with(&symbols, config, None)?;
        best = best.min(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    let out = last.unwrap();
    Ok(BenchRow {
        dataset: dataset.to_string(),
        prefix_bytes: prefix,
        seconds: best,
        turns: out.turn_count(),
        rounds: out.round_count(),
        rules: out.grammar.rules.len(),
        grammar_size: out.grammar.size(),
        peak_bits: out.peak_bits,
    })
}
