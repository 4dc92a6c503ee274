//! Command-line driver for the sparsity-aware 1D multiply.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spgemm1d::runtime::{DEFAULT_BLOCKS, DEFAULT_CV_THRESHOLD};
use spgemm1d::Accumulator;

#[derive(Parser, Debug)]
#[command(name = "spgemm1d", version, about = "Sparsity-aware 1D SpGEMM on a simulated distributed runtime")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Number of logical processes.
    #[arg(long, short = 'p', global = true, default_value_t = 1)]
    pub procs: usize,
    /// Upper bound on blocked reads per remote process.
    #[arg(long, short = 'k', global = true, default_value_t = DEFAULT_BLOCKS)]
    pub blocks: usize,
    /// identity | random:SEED | partition:PATH
    #[arg(long, global = true, default_value = "identity", value_parser = parse_strategy)]
    pub strategy: StrategyArg,
    /// Partition an asymmetric pattern through A + Aᵀ.
    #[arg(long, global = true)]
    pub symmetrize: bool,
    #[arg(long, global = true, value_enum, default_value_t = SemiringArg::Real)]
    pub semiring: SemiringArg,
    #[arg(long, global = true, value_enum, default_value_t = AccumulatorArg::Hybrid)]
    pub accumulator: AccumulatorArg,
    /// Worker threads; 0 means one per process.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Include wall-clock phase times in the report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// C = A * B.
    Multiply {
        a: PathBuf,
        b: PathBuf,
        /// Result matrix (Matrix Market).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the serial multiply and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// C = A * A.
    Square {
        a: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        oracle: bool,
    },
    /// Coarse operator Rᵀ A R; R from a file or from distance-2 aggregation of A.
    Galerkin {
        a: PathBuf,
        #[arg(long)]
        restriction: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Onedim)]
        mode: ModeArg,
        /// Random tie-breaking for the aggregation roots.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        oracle: bool,
    },
    /// Betweenness centrality from sampled sources.
    Bc {
        graph: PathBuf,
        /// Number of sources; all vertices when omitted.
        #[arg(long)]
        sources: Option<usize>,
        #[arg(long, default_value_t = 64)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scores, one per line.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Communication volume of A * B (B defaults to A) without running it.
    Analyze {
        a: PathBuf,
        b: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CV_THRESHOLD)]
        threshold: f64,
    },
    /// Greedy BFS partition into --procs parts.
    Partition {
        a: PathBuf,
        /// Partition vector, one part id per line.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyArg {
    Identity,
    Random(u64),
    Partition(PathBuf),
}

impl StrategyArg {
    pub fn label(&self) -> String {
        match self {
            StrategyArg::Identity => "identity".into(),
            StrategyArg::Random(s) => format!("random:{s}"),
            StrategyArg::Partition(p) => format!("partition:{}", p.display()),
        }
    }
}

fn parse_strategy(s: &str) -> Result<StrategyArg, String> {
    match s.split_once(':') {
        None if s == "identity" => Ok(StrategyArg::Identity),
        Some(("random", seed)) => seed
            .parse()
            .map(StrategyArg::Random)
            .map_err(|_| format!("bad seed {seed:?}")),
        Some(("partition", path)) if !path.is_empty() => Ok(StrategyArg::Partition(path.into())),
        _ => Err("expected identity, random:SEED or partition:PATH".into()),
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiringArg {
    Real,
    Integer,
    Boolean,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccumulatorArg {
    Heap,
    Hash,
    Hybrid,
}

impl From<AccumulatorArg> for Accumulator {
    fn from(a: AccumulatorArg) -> Self {
        match a {
            AccumulatorArg::Heap => Accumulator::Heap,
            AccumulatorArg::Hash => Accumulator::Hash,
            AccumulatorArg::Hybrid => Accumulator::Hybrid,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Onedim,
    OuterProductRight,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("spgemm1d: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
