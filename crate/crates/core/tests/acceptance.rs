//! Acceptance checks. Runs without the test harness so that every check
//! prints one PASS or FAIL line; exits non-zero if any check fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{corpus, count, max_bigram, random_text, runny_text, substitute};
use repair_core::bench::{generated_text, run_prefix};
use repair_core::broadword::{
    delete_prefix_run, delete_suffix_run, find_char_mask, interior_run_pairs, packed_bigram_frequency,
    packed_replace, popcount_cells, BroadwordContext,
};
use repair_core::codec::{compress, decode, decompress_file, encode};
use repair_core::engine::{replace_all, RepairConfig};
use repair_core::freq::all_frequencies;
use repair_core::model::{clog2, from_letters, lg};
use repair_core::{run_repair, Bigram, CapacityPolicy, PackedText, Strategy, Symbol};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const WORKED: &str = "cabaacabcabaacaaabcab";

fn unary_rounds() -> Result<String, String> {
    let mut parts = Vec::new();
    for (exp, turns, rounds) in [(16, 15, 16), (17, 16, 17), (18, 17, 18)] {
        let start = Instant::now();
        let out = run_repair(&vec![Symbol(0); 1 << exp], &CapacityPolicy::default(), Strategy::SmallSpace)
            .map_err(|e| e.to_string())?;
        let took = start.elapsed();
        ensure(
            (out.turn_count(), out.round_count()) == (turns, rounds),
            || format!("a^2^{exp}: {} turns, {} rounds", out.turn_count(), out.round_count()),
        )?;
        ensure(took < Duration::from_secs(10), || format!("a^2^{exp} took {took:?}"))?;
        parts.push(format!("2^{exp}: {turns}/{rounds} in {:.2}s", took.as_secs_f64()));
    }
    Ok(parts.join(", "))
}

fn worked_example_frequencies() -> Result<String, String> {
    let v = from_letters(WORKED);
    let all = all_frequencies(&v);
    let ab = all[&Bigram::new(0, 1)];
    let ca = all[&Bigram::new(2, 0)];
    ensure(ab == 5 && ca == 5, || format!("ab={ab} ca={ca}"))?;
    let ab_oracle = count(&v, &from_letters("ab"));
    ensure(ab_oracle == 5, || format!("oracle ab={ab_oracle}"))?;
    let out = run_repair(&v, &CapacityPolicy::new(4, 2.0, 3), Strategy::SmallSpace).map_err(|e| e.to_string())?;
    let t = out.rounds[0].threshold;
    ensure(t == 3, || format!("first threshold {t}"))?;
    Ok(format!("ab=5 ca=5, first round threshold {t}"))
}

fn oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut turns = 0;
    let cases = 1000;
    for case in 0..cases {
        let v = random_text(&mut rng, 128, 6);
        for strategy in [Strategy::SmallSpace, Strategy::BitParallel, Strategy::Hybrid] {
            let out = run_repair(&v, &CapacityPolicy::default(), strategy).map_err(|e| e.to_string())?;
            let mut text = v.clone();
            for (r, rhs) in out.turns.iter().zip(&out.grammar.rules) {
                let best = max_bigram(&text);
                ensure(r.freq == best, || format!("case {case} {strategy} turn {}: {} vs max {best}", r.turn, r.freq))?;
                text = substitute(&text, rhs, r.new_symbol);
                turns += 1;
            }
            ensure(text == out.grammar.sequence, || format!("case {case} {strategy}: replay diverged"))?;
            ensure(max_bigram(&text) <= 1, || format!("case {case} {strategy}: repeated bigram left"))?;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{cases} texts x 3 strategies, {turns} turns, {:.1}s", took.as_secs_f64()))
}

fn broadword_differential() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut freq_cases, mut replace_cases) = (0, 0);
    for case in 0..10_000u32 {
        let width = 1 + case % 16;
        let dead = (1u64 << width) - 1;
        let sigma = rng.gen_range(1..=dead.min(5)) as u32;
        let len = rng.gen_range(0..400);
        let v = if case % 2 == 0 { runny_text(&mut rng, len, sigma) } else { random_text(&mut rng, 400, sigma) };
        let text = PackedText::with_width(&v, width);
        let b = if v.len() >= 2 && rng.gen_bool(0.7) {
            let i = rng.gen_range(0..v.len() - 1);
            Bigram::new(v[i], v[i + 1])
        } else {
            Bigram::new(rng.gen_range(0..sigma), rng.gen_range(0..sigma))
        };
        let want = count(&v, &[b.left, b.right]);
        let got = packed_bigram_frequency(&text, b);
        ensure(got == want, || format!("case {case} width {width} {b}: {got} vs {want}"))?;
        freq_cases += 1;
        // A new symbol needs a free value below the dead marker.
        if u64::from(sigma) < dead {
            let x = Symbol(sigma);
            let mut packed = text.clone();
            let mut scalar = text.clone();
            let h = packed_replace(&mut packed, b, x);
            let (h2, _) = replace_all(&mut scalar, b, x);
            let expect = substitute(&v, &[b.left, b.right], x);
            ensure(h == h2 && packed.to_vec() == expect && scalar.to_vec() == expect, || {
                format!("case {case} width {width} replacing {b}")
            })?;
            replace_cases += 1;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!(
        "{freq_cases} frequency and {replace_cases} replacement cases, widths 1-16, {:.1}s",
        took.as_secs_f64()
    ))
}

fn worked_examples() -> Result<String, String> {
    let ctx = BroadwordContext::new(3, 3);
    let mask = find_char_mask(0b101_010_000, 0b010, &ctx);
    ensure(mask == 0b000_111_000, || format!("mask {mask:09b}"))?;
    ensure(popcount_cells(mask, &ctx) == 1, || "popcount".into())?;
    let p = delete_prefix_run(0b1110_0110, 8);
    let s = delete_suffix_run(0b0110_0111);
    ensure(p == 0b0000_0110 && s == 0b0110_0000, || format!("prefix {p:08b} suffix {s:08b}"))?;
    let v = from_letters("bbdbbdcbbbdbb");
    let text = PackedText::from_symbols(&v, 4);
    let ctx = BroadwordContext::for_text(&text);
    let interior = interior_run_pairs(find_char_mask(text.words()[0], 1, &ctx), v.len() as u32, &ctx);
    ensure(interior == 2, || format!("interior bb = {interior}"))?;
    Ok("mask 000111000, popcount 1, run deletion 00000110/01100000, interior bb 2".into())
}

fn restore_model() -> Result<String, String> {
    let files = corpus();
    let mut checked = 0;
    for (name, data) in &files {
        for strategy in Strategy::ALL {
            let config = RepairConfig::new(CapacityPolicy::default(), strategy);
            let (file, _) = compress(data, &config).map_err(|e| format!("{name} {strategy}: {e}"))?;
            let decoded = decode(&encode(&file)).map_err(|e| format!("{name} {strategy}: {e}"))?;
            let restored = decompress_file(&decoded).map_err(|e| format!("{name} {strategy}: {e}"))?;
            ensure(&restored == data, || format!("{name} {strategy}: bytes differ"))?;
            checked += 1;
        }
    }
    Ok(format!("{} files x {} strategies = {checked} round trips", files.len(), Strategy::ALL.len()))
}

fn budget(n: usize, c: u32, tau: u64) -> u64 {
    let by_n = n as f64 / f64::from(c) * lg(n as u64);
    let by_tau = (n as u64 * u64::from(clog2(tau))) as f64;
    (by_n.max(by_tau) + 64.0 * lg(n as u64)).floor() as u64
}

fn space_budget() -> Result<String, String> {
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    for (name, data) in corpus().into_iter().filter(|(_, d)| d.len() >= 1024) {
        for strategy in [Strategy::SmallSpace, Strategy::BitParallel, Strategy::Hybrid, Strategy::Mr] {
            let mut config = RepairConfig::new(CapacityPolicy::new(4, 2.0, 3), strategy);
            config.enforce_budget = true;
            let (file, out) = compress(&data, &config).map_err(|e| format!("{name} {strategy}: {e}"))?;
            let limit = budget(data.len(), 4, u64::from(file.grammar.tau()));
            ensure(out.peak_bits <= limit, || format!("{name} {strategy}: peak {} > {limit}", out.peak_bits))?;
            ensure(out.breaches.is_empty(), || format!("{name} {strategy}: {:?}", out.breaches))?;
            worst = worst.max(out.peak_bits as f64 / limit as f64);
            runs += 1;
        }
    }
    Ok(format!("{runs} runs with n >= 1024, highest peak/budget ratio {worst:.3}"))
}

fn capacity_growth() -> Result<String, String> {
    let mut runs = 0;
    let mut rounds_seen = 0;
    let mut inputs: Vec<Vec<Symbol>> = corpus()
        .into_iter()
        .map(|(_, d)| repair_core::codec::bytes_to_symbols(&d).0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    inputs.extend((0..200).map(|_| random_text(&mut rng, 300, 4)));
    for v in &inputs {
        for strategy in [Strategy::SmallSpace, Strategy::BitParallel, Strategy::Hybrid, Strategy::Mr] {
            let out = run_repair(v, &CapacityPolicy::default(), strategy).map_err(|e| e.to_string())?;
            let main: Vec<_> = out.rounds.iter().filter(|r| !r.tail).collect();
            for w in main.windows(2) {
                let need = (w[0].gamma * w[0].capacity as f64).ceil() as usize;
                ensure(w[1].capacity >= need, || {
                    format!("{strategy}: round {} capacity {} < {need}", w[1].round, w[1].capacity)
                })?;
            }
            let gamma = main.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min);
            if gamma.is_finite() && v.len() > 1 {
                let bound = ((v.len() as f64).ln() / gamma.ln()).ceil() as usize + 2;
                ensure(out.round_count() <= bound, || {
                    format!("{strategy}: {} rounds > {bound}", out.round_count())
                })?;
            }
            rounds_seen += out.round_count();
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, {rounds_seen} rounds checked"))
}

fn mr_repair_maximal() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rules = 0;
    let cases = 1000;
    for case in 0..cases {
        let v = random_text(&mut rng, 128, 4);
        let mr = run_repair(&v, &CapacityPolicy::default(), Strategy::Mr).map_err(|e| e.to_string())?;
        let rp = run_repair(&v, &CapacityPolicy::default(), Strategy::SmallSpace).map_err(|e| e.to_string())?;
        ensure(mr.grammar.expand().map_err(|e| e.to_string())? == v, || format!("case {case}: expansion"))?;
        ensure(mr.grammar.size() <= rp.grammar.size(), || {
            format!("case {case}: MR size {} > Re-Pair size {}", mr.grammar.size(), rp.grammar.size())
        })?;
        let mut text = v.clone();
        let tau0 = mr.grammar.terminal_count;
        for (i, rhs) in mr.grammar.rules.iter().enumerate() {
            let f = count(&text, rhs);
            ensure(f >= 2, || format!("case {case} rule {i}: frequency {f}"))?;
            let mut extensions = std::collections::BTreeSet::new();
            for p in 0..text.len() {
                if text[p..].starts_with(rhs) {
                    if p > 0 {
                        extensions.insert([&text[p - 1..p], rhs.as_slice()].concat());
                    }
                    if p + rhs.len() < text.len() {
                        extensions.insert([rhs.as_slice(), &text[p + rhs.len()..p + rhs.len() + 1]].concat());
                    }
                }
            }
            for e in &extensions {
                let fe = count(&text, e);
                ensure(fe < f, || format!("case {case} rule {i}: extension keeps frequency {f}"))?;
            }
            text = substitute(&text, rhs, Symbol(tau0 + i as u32));
            rules += 1;
        }
        ensure(text == mr.grammar.sequence, || format!("case {case}: replay diverged"))?;
    }
    Ok(format!("{cases} texts, {rules} rules maximal, sizes never above Re-Pair"))
}

fn superlinear_runtime() -> Result<String, String> {
    let data = generated_text(8 * 1024, 11);
    let config = RepairConfig::new(CapacityPolicy::default(), Strategy::SmallSpace);
    let small = 1024;
    let large = 8 * 1024;
    let t_small = run_prefix("text", &data, small, &config, 3).map_err(|e| e.to_string())?.seconds;
    let t_large = run_prefix("text", &data, large, &config, 3).map_err(|e| e.to_string())?.seconds;
    let ratio = t_large / t_small;
    let size_ratio = (large / small) as f64;
    ensure(ratio > size_ratio, || format!("time ratio {ratio:.1} for size ratio {size_ratio}"))?;
    Ok(format!("{small} B: {t_small:.4}s, {large} B: {t_large:.4}s, time ratio {ratio:.1} > {size_ratio}"))
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("unary turns and rounds", unary_rounds),
        ("worked-example frequencies", worked_example_frequencies),
        ("turn frequencies match the oracle", oracle_equivalence),
        ("broadword differential", broadword_differential),
        ("broadword worked examples", worked_examples),
        ("restore model", restore_model),
        ("space budget", space_budget),
        ("capacity growth", capacity_growth),
        ("MR-Re-Pair maximal repeats", mr_repair_maximal),
        ("super-linear running time", superlinear_runtime),
    ];
    // Keep panics from individual checks out of the report.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", checks.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", checks.len());
}
