#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repair_core::bench::generated_text;
use repair_core::Symbol;

/// Greedy non-overlapping count of `pattern` in `text`, written out
/// independently of the library.
pub fn count(text: &[Symbol], pattern: &[Symbol]) -> usize {
    let (n, m) = (text.len(), pattern.len());
    let mut c = 0;
    let mut i = 0;
    while i + m <= n {
        if &text[i..i + m] == pattern {
            c += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    c
}

/// Highest bigram frequency by trying every adjacent pair.
pub fn max_bigram(text: &[Symbol]) -> usize {
    let mut seen = std::collections::HashSet::new();
    let mut best = 0;
    for w in text.windows(2) {
        if seen.insert((w[0], w[1])) {
            best = best.max(count(text, w));
        }
    }
    best
}

/// Replaces the greedy non-overlapping occurrences of `pattern` by `x`.
pub fn substitute(text: &[Symbol], pattern: &[Symbol], x: Symbol) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(text.len());
    let mut i = 0;
    while i < text.len() {
        if i + pattern.len() <= text.len() && &text[i..i + pattern.len()] == pattern {
            out.push(x);
            i += pattern.len();
        } else {
            out.push(text[i]);
            i += 1;
        }
    }
    out
}

pub fn random_text(rng: &mut ChaCha8Rng, max_len: usize, max_sigma: u32) -> Vec<Symbol> {
    let sigma = rng.gen_range(1..=max_sigma);
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| Symbol(rng.gen_range(0..sigma))).collect()
}

/// Texts made of runs, so that same-symbol runs often cross word borders.
pub fn runny_text(rng: &mut ChaCha8Rng, len: usize, sigma: u32) -> Vec<Symbol> {
    let mut v = Vec::with_capacity(len);
    while v.len() < len {
        let s = Symbol(rng.gen_range(0..sigma));
        let run = if rng.gen_bool(0.3) { rng.gen_range(1..80) } else { rng.gen_range(1..4) };
        v.extend(std::iter::repeat_n(s, run));
    }
    v.truncate(len);
    v
}

fn fibonacci_word(len: usize) -> Vec<u8> {
    let (mut a, mut b) = (b"a".to_vec(), b"ab".to_vec());
    while b.len() < len {
        let next = [b.as_slice(), a.as_slice()].concat();
        a = b;
        b = next;
    }
    b.truncate(len);
    b
}

/// The files every round-trip and budget check runs on.
pub fn corpus() -> Vec<(&'static str, Vec<u8>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let random: Vec<u8> = (0..4096).map(|_| rng.gen()).collect();
    let dna: Vec<u8> = {
        let unit: Vec<u8> = (0..300).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect();
        let mut v = Vec::new();
        while v.len() < 6000 {
            let mut piece = unit.clone();
            for _ in 0..5 {
                let at = rng.gen_range(0..piece.len());
                piece[at] = b"ACGT"[rng.gen_range(0..4)];
            }
            v.extend(piece);
        }
        v
    };
    vec![
        ("text", generated_text(8 * 1024, 7)),
        ("source-engine", include_bytes!("../../src/engine.rs")[..6000].to_vec()),
        ("source-freq", include_bytes!("../../src/freq.rs")[..6000].to_vec()),
        ("unary", vec![b'a'; 4096]),
        ("random", random),
        ("dna", dna),
        ("periodic", b"abc".repeat(2000)),
        ("fibonacci", fibonacci_word(4181)),
        ("squares-mod-7", (0..5000u32).map(|i| (i * i % 7) as u8).collect()),
        ("single", b"x".to_vec()),
        ("pair", b"xy".to_vec()),
        ("all-bytes", (0..=255u8).cycle().take(2048).collect()),
    ]
}
