//! `seqlev`: mine top-k sequential patterns, generate synthetic corpora with
//! planted patterns, and score a ranking against the planted truth.
//!
//! Exit codes: 0 success, 2 usage or input/output problem, 3 empty database.

mod tsv;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use seqlev::search::search;
use seqlev::synthgen::{self, GenConfig, GroundTruth, MatchFlag};
use seqlev::{Aggregation, Error, MeasureConfig, SearchConfig, SequenceDatabase};

const EXIT_USAGE: u8 = 2;
const EXIT_EMPTY: u8 = 3;

#[derive(Parser)]
#[command(name = "seqlev", version, about = "Exact top-k sequential pattern mining under leverage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the top-k patterns of a corpus and write them as TSV.
    ///
    /// Ties are broken by support (higher first) and then by the order in
    /// which items first appear in the input, so the ranking, including who
    /// takes k-th place, does not depend on traversal order.
    Mine(MineArgs),
    /// Generate a synthetic corpus with planted patterns.
    Gen(GenArgs),
    /// Compare a ranking TSV against a ground-truth file.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Leverage,
    Support,
}

#[derive(Clone, Copy, ValueEnum)]
enum Agg {
    Mean,
    Min,
}

#[derive(clap::Args)]
struct MineArgs {
    /// Corpus, one record per line, whitespace-separated tokens.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_enum, default_value_t = Measure::Leverage)]
    measure: Measure,
    /// How composition supports combine within a partition.
    #[arg(long, value_enum, default_value_t = Agg::Mean)]
    agg: Agg,
    /// Longest pattern considered; unlimited by default.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    max_length: Option<u64>,
    /// Skip the breadth-first pass over two-item patterns.
    #[arg(long)]
    no_bootstrap: bool,
    /// Enumerate exhaustively up to --max-length. For measurements only.
    #[arg(long, requires = "max_length")]
    no_prune: bool,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print run time and search counters to standard error.
    #[arg(long)]
    stats: bool,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    items: u64,
    #[arg(long, default_value_t = 10_000)]
    sequences: u64,
    #[arg(long, default_value_t = 1)]
    patterns: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record length is Poisson(rate) + 1.
    #[arg(long, default_value_t = 9.0)]
    length_rate: f64,
    #[arg(long)]
    out_data: PathBuf,
    #[arg(long)]
    out_truth: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    /// A TSV written by `seqlev mine`.
    #[arg(long)]
    ranking: PathBuf,
    #[arg(long, default_value_t = 20)]
    k: usize,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EmptyDatabase => EXIT_EMPTY,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Mine(args) => mine(args),
        Command::Gen(args) => gen(args),
        Command::Eval(args) => eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("seqlev: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn write_failure(path: Option<&Path>) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| match path {
        Some(p) => Failure::usage(format!("cannot write {}: {e}", p.display())),
        None => Failure::usage(format!("cannot write output: {e}")),
    }
}

fn mine(args: MineArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let db = SequenceDatabase::parse(open(&args.input)?)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.input.display())))?;
    let measure = match args.measure {
        Measure::Support => MeasureConfig::support(),
        Measure::Leverage => MeasureConfig::leverage(match args.agg {
            Agg::Mean => Aggregation::Mean,
            Agg::Min => Aggregation::Min,
        }),
    };
    let cfg = SearchConfig {
        k: args.k as usize,
        max_pattern_length: args.max_length.map(|m| m as usize),
        measure,
        bootstrap: !args.no_bootstrap,
        pruning: !args.no_prune,
        trace_prunes: false,
    };
    let outcome = search(&db, &cfg)?;

    let fail = write_failure(args.output.as_deref());
    match &args.output {
        Some(path) => {
            let mut out = create(path)?;
            tsv::write_ranking(&mut out, &outcome.ranking, db.item_table()).map_err(&fail)?;
            out.flush().map_err(&fail)?;
        }
        None => {
            let mut out = io::stdout().lock();
            tsv::write_ranking(&mut out, &outcome.ranking, db.item_table()).map_err(&fail)?;
            out.flush().map_err(&fail)?;
        }
    }

    if args.stats {
        let s = outcome.stats;
        eprintln!("records\t{}", db.n());
        eprintln!("items\t{}", db.num_items());
        eprintln!("wall_time_s\t{:.3}", started.elapsed().as_secs_f64());
        eprintln!("nodes_expanded\t{}", s.nodes_expanded);
        eprintln!("patterns_scored\t{}", s.patterns_scored);
        eprintln!("pruned_subtrees\t{}", s.pruned_subtrees);
        eprintln!("candidates_skipped\t{}", s.candidates_skipped);
        eprintln!("bootstrap_pairs_scored\t{}", s.bootstrap_pairs_scored);
        eprintln!("max_depth\t{}", s.max_depth);
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let cfg = GenConfig {
        vocab_size: args.items as usize,
        n_sequences: args.sequences as usize,
        base_length_rate: args.length_rate,
        n_patterns: args.patterns as usize,
        seed: args.seed,
        ..GenConfig::default()
    };
    let (db, truth) = synthgen::generate(&cfg)?;

    let fail = write_failure(Some(&args.out_data));
    let mut out = create(&args.out_data)?;
    db.write_to(&mut out).map_err(&fail)?;
    out.flush().map_err(&fail)?;

    if let Some(path) = &args.out_truth {
        let fail = write_failure(Some(path));
        let mut out = create(path)?;
        truth.write_to(&mut out).map_err(&fail)?;
        out.flush().map_err(&fail)?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let truth = GroundTruth::parse(open(&args.truth)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.truth.display())))?;
    let ranking = tsv::read_ranking(open(&args.ranking)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.ranking.display())))?;
    let report = synthgen::recall_at_k(&truth, &ranking, args.k);

    let mut out = io::stdout().lock();
    let fail = write_failure(None);
    writeln!(out, "recall\t{}", report.recall().to_fixed(6)).map_err(&fail)?;
    for (p, found) in truth.patterns.iter().zip(&report.found_at) {
        let status = match found {
            Some(rank) => format!("found@{rank}"),
            None => "missing".to_owned(),
        };
        writeln!(out, "{}\t{status}", p.tokens.join(" ")).map_err(&fail)?;
    }
    for (i, flag) in report.flags.iter().enumerate() {
        if *flag == MatchFlag::Subpattern {
            writeln!(out, "{}\tsubpattern@{}", ranking[i].join(" "), i + 1).map_err(&fail)?;
        }
    }
    out.flush().map_err(&fail)
}
