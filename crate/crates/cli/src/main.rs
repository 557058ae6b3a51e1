use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use repair_core::bench::{self, BenchRow, CSV_HEADER, UNARY};
use repair_core::codec::{self, GrammarFile};
use repair_core::engine::{Outcome, RepairConfig};
use repair_core::{CapacityPolicy, Strategy};

/// Re-Pair grammar compression in small working space.
#[derive(Parser)]
#[command(name = "rpss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into a grammar file.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Restore the original file from a grammar file.
    Decompress { input: PathBuf, output: PathBuf },
    /// Compress a file and print run statistics.
    Stats {
        input: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Time compression of dataset prefixes and print CSV.
    Bench {
        /// Files to benchmark; `unary` selects a generated run of one byte.
        #[arg(default_value = UNARY)]
        datasets: Vec<String>,
        /// Comma-separated prefix sizes, e.g. 64K,128K,256K.
        #[arg(long, default_value = "64K")]
        prefixes: String,
        /// Repetitions per prefix; the fastest is reported.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Compress, decompress and compare with the input.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args, Clone)]
struct RunOpts {
    /// smallspace, naive, bitparallel, hybrid or mr.
    #[arg(long, default_value = "smallspace")]
    strategy: Strategy,
    /// Constant c of the (n/c)·lg n space budget.
    #[arg(long, default_value_t = 4)]
    c: u32,
    /// Capacity of the first frequency table.
    #[arg(long, default_value_t = 3)]
    f0: usize,
    /// Fail as soon as the working-space ledger exceeds its budget.
    #[arg(long)]
    audit: bool,
}

impl RunOpts {
    fn config(&self) -> Result<RepairConfig> {
        if self.c == 0 {
            bail!("--c must be positive");
        }
        if self.f0 == 0 {
            bail!("--f0 must be positive");
        }
        let defaults = CapacityPolicy::default();
        let mut config = RepairConfig::new(
            CapacityPolicy::new(self.c, defaults.alpha, self.f0),
            self.strategy,
        );
        config.enforce_budget = self.audit;
        Ok(config)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).with_context(|| format!("cannot write {}", path.display()))
}

fn compress(input: &Path, opts: &RunOpts) -> Result<(Vec<u8>, GrammarFile, Outcome)> {
    let data = read(input)?;
    let (file, outcome) = codec::compress(&data, &opts.config()?)?;
    Ok((data, file, outcome))
}

fn print_stats(out: &mut impl Write, data_len: usize, file: &GrammarFile, o: &Outcome) -> Result<()> {
    let g = &file.grammar;
    writeln!(out, "input bytes:   {data_len}")?;
    writeln!(out, "alphabet:      {}", g.terminal_count)?;
    writeln!(out, "rules:         {}", g.rules.len())?;
    writeln!(out, "turns:         {}", o.turn_count())?;
    writeln!(out, "rounds:        {}", o.round_count())?;
    writeln!(out, "final length:  {}", g.sequence.len())?;
    writeln!(out, "grammar size:  {}", g.size())?;
    writeln!(out, "peak bits:     {} of {}", o.peak_bits, o.budget_bits)?;
    writeln!(out, "breaches:      {}", o.breaches.len())?;
    writeln!(out)?;
    writeln!(out, "n={data_len}")?;
    writeln!(out, "sigma={}", g.terminal_count)?;
    writeln!(out, "rules={}", g.rules.len())?;
    writeln!(out, "turns={}", o.turn_count())?;
    writeln!(out, "rounds={}", o.round_count())?;
    writeln!(out, "final_length={}", g.sequence.len())?;
    writeln!(out, "grammar_size={}", g.size())?;
    writeln!(out, "peak_bits={}", o.peak_bits)?;
    writeln!(out, "budget_bits={}", o.budget_bits)?;
    writeln!(out, "breaches={}", o.breaches.len())?;
    Ok(())
}

fn bench_rows(datasets: &[String], prefixes: &str, repeats: usize, opts: &RunOpts) -> Result<Vec<BenchRow>> {
    let sizes = prefixes
        .split(',')
        .map(bench::parse_size)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(anyhow::Error::msg)?;
    let largest = sizes.iter().copied().max().context("no prefix sizes given")?;
    let config = opts.config()?;
    let mut rows = Vec::new();
    for name in datasets {
        let data = if name == UNARY {
            bench::unary_dataset(largest)
        } else {
            read(Path::new(name))?
        };
        for &size in &sizes {
            if size == 0 || size > data.len() {
                eprintln!("skipping {name}: prefix {size} exceeds {} bytes", data.len());
                continue;
            }
            rows.push(bench::run_prefix(name, &data, size, &config, repeats)?);
        }
    }
    Ok(rows)
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Compress { input, output, opts } => {
            let (_, file, _) = compress(&input, &opts)?;
            write(&output, &codec::encode(&file))?;
        }
        Command::Decompress { input, output } => {
            let bytes = read(&input)?;
            let file = codec::decode(&bytes)?;
            write(&output, &codec::decompress_file(&file)?)?;
        }
        Command::Stats { input, opts } => {
            let (data, file, outcome) = compress(&input, &opts)?;
            print_stats(&mut out, data.len(), &file, &outcome)?;
        }
        Command::Bench {
            datasets,
            prefixes,
            repeats,
            opts,
        } => {
            writeln!(out, "{CSV_HEADER}")?;
            for row in bench_rows(&datasets, &prefixes, repeats, &opts)? {
                writeln!(out, "{}", row.to_csv())?;
            }
        }
        Command::Verify { input, opts } => {
            let (data, file, _) = compress(&input, &opts)?;
            let encoded = codec::encode(&file);
            let restored = codec::decompress_file(&codec::decode(&encoded)?)?;
            if restored != data {
                bail!("round trip changed the data");
            }
            writeln!(out, "ok: {} bytes, {} rules, {} bytes encoded", data.len(), file.grammar.rules.len(), encoded.len())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
