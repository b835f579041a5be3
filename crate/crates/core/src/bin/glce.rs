//! Command-line front end: build and query grammar-compressed LCE indexes,
//! verify them against brute-force oracles, and dump benchmark numbers.

use std::error::Error;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use glce::block_index::LayerParams;
use glce::format::{format_grammar, parse_grammar};
use glce::index_file::SlpIndex;
use glce::repair::build_grammar;
use glce::slp::{naive_lce, Slp, DEFAULT_EXPANSION_CAP};
use glce::synth::{gen_synthetic, random_slp, RandomSlpConfig, SyntheticKind};

#[derive(Parser)]
#[command(
    name = "glce",
    version,
    about = "Grammar-compressed random access and LCE queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a synthetic grammar in the text format.
    Gen(GenArgs),
    /// Build an index from a grammar file (or raw text with --raw).
    Build(BuildArgs),
    /// Print the character at one position, or one per stdin line.
    Access(AccessArgs),
    /// Print the substring between two positions, inclusive.
    Extract(ExtractArgs),
    /// Print the LCE of two positions, or one per `i j` stdin line.
    Lce(LceArgs),
    /// Re-check index answers against the brute-force oracles.
    Verify(VerifyArgs),
    /// Print hop-count statistics and space buckets as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Chain,
    Fibonacci,
    ThueMorse,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Doublings (chain), order (fibonacci/thue-morse), or pair-rule count (random).
    #[arg(long)]
    k: u32,
    /// Chain character.
    #[arg(long, default_value = "a")]
    ch: char,
    /// Alphabet size for random grammars.
    #[arg(long, default_value_t = 4)]
    alphabet: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Expansion cap for random grammars.
    #[arg(long, default_value_t = 1 << 20)]
    max_len: usize,
    /// Output path; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// Grammar file; stdin when absent or `-`.
    input: Option<PathBuf>,
    /// Treat the input as raw text and compress it first.
    #[arg(long)]
    raw: bool,
    /// Comma-separated layer parameters, e.g. `8,64`.
    #[arg(long)]
    layers: Option<String>,
    /// Cap on in-memory expansion during construction.
    #[arg(long, default_value_t = DEFAULT_EXPANSION_CAP)]
    cap: usize,
    /// Index output path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct AccessArgs {
    index: PathBuf,
    /// Position; batch mode over stdin lines when absent.
    position: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    index: PathBuf,
    start: Option<usize>,
    end: Option<usize>,
}

#[derive(Args)]
struct LceArgs {
    index: PathBuf,
    i: Option<usize>,
    j: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    index: PathBuf,
    /// Sample size for strings too long to check exhaustively.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0x61ce)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    index: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

fn parse_layers(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad layer parameter {p:?}: {e}"))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            // A reader closing the pipe early is not a failure.
            if let Some(io_err) = e.downcast_ref::<io::Error>() {
                if io_err.kind() == io::ErrorKind::BrokenPipe {
                    return ExitCode::SUCCESS;
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn Error>> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Build(a) => build(a),
        Command::Access(a) => access(a),
        Command::Extract(a) => extract(a),
        Command::Lce(a) => lce(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    }
}

fn gen(a: GenArgs) -> Result<ExitCode, Box<dyn Error>> {
    if a.k < 1 {
        return Err("--k must be at least 1".into());
    }
    let slp = match a.kind {
        GenKind::Chain => gen_synthetic(SyntheticKind::Chain {
            ch: a.ch as u32,
            doublings: a.k,
        }),
        GenKind::Fibonacci => gen_synthetic(SyntheticKind::Fibonacci { order: a.k }),
        GenKind::ThueMorse => gen_synthetic(SyntheticKind::ThueMorse { order: a.k }),
        GenKind::Random => random_slp(
            RandomSlpConfig {
                pair_rules: a.k as usize,
                alphabet: a.alphabet,
                max_len: a.max_len,
            },
            a.seed,
        ),
    };
    let text = format_grammar(&slp);
    match a.output {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>, Box<dyn Error>> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(std::fs::read(p)?),
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn build(a: BuildArgs) -> Result<ExitCode, Box<dyn Error>> {
    let bytes = read_input(a.input.as_deref())?;
    let slp: Slp = if a.raw {
        let codes: Vec<u32> = bytes.iter().map(|&b| b as u32).collect();
        build_grammar(&codes)?
    } else {
        parse_grammar(
            std::str::from_utf8(&bytes).map_err(|e| format!("grammar file is not UTF-8: {e}"))?,
        )?
    };
    slp.validate()?;
    if slp.text_len() > a.cap {
        return Err(format!("string length {} exceeds --cap {}", slp.text_len(), a.cap).into());
    }
    if slp.text_len() >= u32::MAX as usize {
        return Err("strings of 2^32 characters or more are not indexable".into());
    }
    let params = match a.layers.as_deref() {
        Some(choice) => LayerParams::new(parse_layers(choice)?)?,
        None => LayerParams::default_for(slp.text_len()),
    };
    if params.xs().last().copied().unwrap_or(0) > slp.text_len() {
        eprintln!(
            "warning: top layer parameter {} exceeds the string length {}",
            params.xs().last().unwrap(),
            slp.text_len()
        );
    }
    let idx = SlpIndex::build(slp, params);
    idx.save(&a.output)?;
    Ok(ExitCode::SUCCESS)
}

fn fmt_code(c: u32) -> String {
    match char::from_u32(c) {
        Some(ch) if !ch.is_control() => ch.to_string(),
        _ => format!("\\x{c:02x}"),
    }
}

fn access(a: AccessArgs) -> Result<ExitCode, Box<dyn Error>> {
    let idx = SlpIndex::load(&a.index)?;
    match a.position {
        Some(i) => {
            let c = idx.access(i)?;
            println!("{}", fmt_code(c));
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for line in io::stdin().lines() {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let i: usize = trimmed
                    .parse()
                    .map_err(|e| format!("bad position {trimmed:?}: {e}"))?;
                writeln!(out, "{}", fmt_code(idx.access(i)?))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn extract(a: ExtractArgs) -> Result<ExitCode, Box<dyn Error>> {
    let idx = SlpIndex::load(&a.index)?;
    let render = |chars: Vec<u32>| -> String { chars.into_iter().map(fmt_code).collect() };
    match (a.start, a.end) {
        (Some(i), Some(j)) => println!("{}", render(idx.extract(i, j)?)),
        (None, None) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for line in io::stdin().lines() {
                let line = line?;
                let mut parts = line.split_whitespace();
                let (Some(i), Some(j)) = (parts.next(), parts.next()) else {
                    if line.trim().is_empty() {
                        continue;
                    }
                    return Err(format!("expected `start end`, got {line:?}").into());
                };
                let i: usize = i.parse()?;
                let j: usize = j.parse()?;
                writeln!(out, "{}", render(idx.extract(i, j)?))?;
            }
        }
        _ => return Err("extract needs both positions or neither".into()),
    }
    Ok(ExitCode::SUCCESS)
}

fn lce(a: LceArgs) -> Result<ExitCode, Box<dyn Error>> {
    let idx = SlpIndex::load(&a.index)?;
    match (a.i, a.j) {
        (Some(i), Some(j)) => println!("{}", idx.lce(i, j)?),
        (None, None) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for line in io::stdin().lines() {
                let line = line?;
                let mut parts = line.split_whitespace();
                let (Some(i), Some(j)) = (parts.next(), parts.next()) else {
                    if line.trim().is_empty() {
                        continue;
                    }
                    return Err(format!("expected `i j`, got {line:?}").into());
                };
                let i: usize = i.parse()?;
                let j: usize = j.parse()?;
                writeln!(out, "{}", idx.lce(i, j)?)?;
            }
        }
        _ => return Err("lce needs both positions or neither".into()),
    }
    Ok(ExitCode::SUCCESS)
}

/// All-pairs LCE rows from the back, for exhaustive verification: row i is
/// computed from row i+1 with one comparison per column, so the whole check
/// is quadratic regardless of how long the extensions are.
fn lce_row_oracle(text: &[u32]) -> impl Iterator<Item = (usize, Vec<usize>)> + '_ {
    let n = text.len();
    let mut next: Vec<usize> = vec![0; n + 1];
    (0..n).rev().map(move |i| {
        let mut row = vec![0usize; n + 1];
        for j in 0..n {
            row[j] = if text[i] == text[j] {
                next[j + 1] + 1
            } else {
                0
            };
        }
        next = row.clone();
        (i, row)
    })
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

fn verify(a: VerifyArgs) -> Result<ExitCode, Box<dyn Error>> {
    let idx = SlpIndex::load(&a.index)?;
    let slp = idx.grammar();
    let n = idx.text_len();
    let mut rng = SplitMix(a.seed);

    // Access versus the top-down grammar descent.
    let mut access_ok = 0usize;
    let mut access_total = 0usize;
    if n <= 100_000 {
        for i in 0..n {
            access_total += 1;
            if idx.access(i).ok() == slp.naive_access(i).ok() {
                access_ok += 1;
            }
        }
    } else {
        for _ in 0..a.samples {
            let i = (rng.next() % n as u64) as usize;
            access_total += 1;
            if idx.access(i).ok() == slp.naive_access(i).ok() {
                access_ok += 1;
            }
        }
    }

    // LCE versus the character scan.
    let mut lce_ok = 0usize;
    let mut lce_total = 0usize;
    if n <= 2000 {
        let text = slp.expand()?;
        for (i, row) in lce_row_oracle(&text) {
            for (j, &want) in row.iter().enumerate().take(n) {
                lce_total += 1;
                if idx.lce(i, j).ok() == Some(want) {
                    lce_ok += 1;
                }
            }
        }
    } else {
        let text = slp.expand()?;
        for _ in 0..a.samples {
            let i = (rng.next() % n as u64) as usize;
            let j = (rng.next() % n as u64) as usize;
            lce_total += 1;
            if idx.lce(i, j).ok() == naive_lce(&text, i, j).ok() {
                lce_ok += 1;
            }
        }
    }

    println!("access {access_ok}/{access_total} ok, lce {lce_ok}/{lce_total} ok");
    if access_ok == access_total && lce_ok == lce_total {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn bench(a: BenchArgs) -> Result<ExitCode, Box<dyn Error>> {
    let idx = SlpIndex::load(&a.index)?;
    let layered = idx.layered();
    let n = idx.text_len();
    let k = layered.layer_count();

    let positions: Vec<usize> = if n <= a.samples {
        (0..n).collect()
    } else {
        let mut rng = SplitMix(1);
        (0..a.samples)
            .map(|_| (rng.next() % n as u64) as usize)
            .collect()
    };
    let mut max_total = 0u64;
    let mut sum_total = 0u64;
    let mut max_layer = vec![0u32; k];
    for &i in &positions {
        let (_, hops) = layered.access_instrumented(i)?;
        let total: u32 = hops.iter().sum();
        max_total = max_total.max(total as u64);
        sum_total += total as u64;
        for (li, &h) in hops.iter().enumerate() {
            max_layer[li] = max_layer[li].max(h);
        }
    }

    let report = layered.space_report();
    let stats = layered.layer_stats();

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "section,name,layer,value")?;
    writeln!(out, "hops,max_total,,{max_total}")?;
    writeln!(
        out,
        "hops,mean_total,,{:.3}",
        sum_total as f64 / positions.len().max(1) as f64
    )?;
    for (li, h) in max_layer.iter().enumerate() {
        writeln!(out, "hops,max_scanned,{},{h}", k - li)?;
    }
    writeln!(
        out,
        "space,leaf_strings_bytes,,{}",
        report.leaf_strings_bytes
    )?;
    for (li, b) in report.layer_table_bytes.iter().enumerate() {
        writeln!(out, "space,table_bytes,{},{b}", li + 1)?;
    }
    writeln!(out, "space,grammar_bytes,,{}", report.grammar_bytes)?;
    writeln!(out, "space,total_bytes,,{}", report.total)?;
    for (li, st) in stats.iter().enumerate() {
        let layer = li + 1;
        writeln!(out, "blocks,x,{layer},{}", st.x)?;
        writeln!(out, "blocks,m,{layer},{}", st.blocks)?;
        writeln!(out, "blocks,d,{layer},{}", st.distinct)?;
        writeln!(out, "blocks,k_max,{layer},{}", st.k_max)?;
        writeln!(out, "blocks,inner_k_max,{layer},{}", st.inner_k_max)?;
        writeln!(out, "blocks,added_rules,{layer},{}", st.added_rules)?;
    }
    let lce_report = idx.lce_index().space_report();
    writeln!(
        out,
        "lce,top_sampled,,{}",
        idx.lce_index().top_sampled_count()
    )?;
    writeln!(
        out,
        "lce,leaf_full_text,,{}",
        idx.lce_index().leaf_full_text_len()
    )?;
    writeln!(out, "lce,top_sparse_bytes,,{}", lce_report.top_sparse_bytes)?;
    for (li, b) in lce_report.layer_sparse_bytes.iter().enumerate() {
        writeln!(out, "lce,layer_sparse_bytes,{},{b}", li + 2)?;
    }
    writeln!(out, "lce,leaf_full_bytes,,{}", lce_report.leaf_full_bytes)?;
    writeln!(out, "lce,total_bytes,,{}", lce_report.total)?;
    Ok(ExitCode::SUCCESS)
}
