//! Command-line arguments.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use sparse_lsq_core::solver::{Mode, SolveConfig};

use crate::error::{Error, Result};
use crate::generate::SyntheticSpec;
use crate::report::Suite;
use crate::run::{InputSource, RunSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Det,
    Rand,
}

/// Sparse least-squares solutions via column sampling, with numerical checks
/// of every guarantee behind them.
#[derive(Debug, Parser)]
#[command(name = "sparse-lsq", version)]
pub struct Args {
    /// Matrix file: Matrix Market (array or coordinate) or headerless CSV.
    #[arg(long, value_name = "PATH", conflicts_with = "generate", requires = "vector")]
    pub matrix: Option<PathBuf>,
    /// Right-hand side, one value per line.
    #[arg(long, value_name = "PATH", conflicts_with = "generate", requires = "matrix")]
    pub vector: Option<PathBuf>,
    /// Synthetic instance, e.g. `m=30,n=20,gamma=0.5` (keys: m, n, k_true,
    /// gamma | spectrum=s1:s2:..., eta, seed).
    #[arg(long, value_name = "KEY=VAL[,...]")]
    pub generate: Option<String>,
    /// Target rank k.
    #[arg(long)]
    pub k: usize,
    /// Accuracy parameter, strictly between 0 and 1/2.
    #[arg(long = "eps")]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "det")]
    pub mode: ModeArg,
    /// Seed; required in randomized mode, also the base seed of Monte Carlo suites.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explicit column budget replacing the guaranteed one.
    #[arg(long = "r", value_name = "INT")]
    pub r_override: Option<usize>,
    /// Verification suite to evaluate.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Emit a CSV table `r,residual,bound_rhs` for these budgets instead of a report.
    #[arg(long, value_delimiter = ',', value_name = "R1,R2,...")]
    pub frontier: Option<Vec<usize>>,
    /// Output file (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seeds for the randomized theorem suite.
    #[arg(long, default_value_t = 200)]
    pub seeds: usize,
    /// Monte Carlo trials for the lemma suite.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

impl Args {
    pub fn into_spec(self) -> Result<RunSpec> {
        let input = match (self.generate, self.matrix, self.vector) {
            (Some(g), None, None) => InputSource::Generate(SyntheticSpec::parse(&g)?),
            (None, Some(matrix), Some(vector)) => InputSource::Files { matrix, vector },
            _ => return Err(Error::Usage("give either --generate or both --matrix and --vector".into())),
        };
        let mode = match self.mode {
            ModeArg::Det => Mode::Deterministic,
            ModeArg::Rand => Mode::Randomized,
        };
        let config =
            SolveConfig { k: self.k, epsilon: self.epsilon, mode, seed: self.seed, r_override: self.r_override };
        Ok(RunSpec {
            input,
            config,
            suite: self.suite,
            frontier: self.frontier,
            out: self.out,
            seeds: self.seeds,
            trials: self.trials,
        })
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let args = Args::parse();
    match args.into_spec() {
        Ok(spec) => crate::run::run(&spec),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
