//! Monte Carlo drivers that fan seeds and trials out over a rayon pool.
//!
//! Results are collected in seed/trial order, so output does not depend on
//! the number of threads.

use rayon::prelude::*;
use sparse_lsq_core::bounds::{measure_lemma_trial, summarize_lemma_trials, BoundReport, LemmaConfig};
use sparse_lsq_core::linalg::RankSplit;
use sparse_lsq_core::sampling::SamplingPlan;
use sparse_lsq_core::solver::{solve_randomized_split, SolveConfig, SparseSolution};
use sparse_lsq_core::DenseMatrix;

use crate::error::{Error, Result};

/// Environment variable capping Monte Carlo parallelism.
pub const THREADS_ENV: &str = "SPARSE_LSQ_THREADS";

/// Pool sized by [`THREADS_ENV`], or by the available cores when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(value) => match value.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`"))),
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker threads: {e}")))
}

/// One randomized solve per seed; `cfg.seed` is replaced by each seed.
pub fn randomized_runs(
    pool: &rayon::ThreadPool,
    split: &RankSplit,
    b: &[f64],
    cfg: &SolveConfig,
    seeds: &[u64],
) -> Result<Vec<(u64, SparseSolution, SamplingPlan)>> {
    pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let cfg = SolveConfig { seed: Some(seed), ..cfg.clone() };
                let (x, plan) = solve_randomized_split(split, b, &cfg)?;
                Ok((seed, x, plan))
            })
            .collect()
    })
}

/// Parallel version of `sparse_lsq_core::bounds::lemma_suite`; identical output.
pub fn lemma_suite(
    pool: &rayon::ThreadPool,
    v_t: &DenseMatrix,
    e: &DenseMatrix,
    r: usize,
    trials: usize,
    seed: u64,
    cfg: &LemmaConfig,
) -> Result<Vec<BoundReport>> {
    let measured = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| measure_lemma_trial(v_t, e, r, seed, t))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(summarize_lemma_trials(v_t, e, r, seed, cfg, &measured)?)
}
