//! Orchestration: load or generate a problem, solve, evaluate the requested
//! suites and write the JSON report or the frontier table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sparse_lsq_core::bounds::{
    structural_bound_split, theorem1_report_split, theorem2_report_split, BoundReport, Context, LemmaConfig,
    SeedOutcome, Status,
};
use sparse_lsq_core::linalg::{pseudo_inverse_apply, residual_norm, RankSplit};
use sparse_lsq_core::sampling::SamplingPlan;
use sparse_lsq_core::solver::{
    concentration_budget, solve_deterministic_split, solve_randomized_split, Mode, SolveConfig, SparseSolution,
};
use sparse_lsq_core::{DenseMatrix, Error as CoreError, Vector};

use crate::error::{Error, Result};
use crate::generate::{generate, SyntheticSpec};
use crate::io::{ingest, write_text};
use crate::parallel;
use crate::report::{Baselines, ConfigEcho, InputEcho, ProblemSummary, RunReport, SolutionSummary, Suite, Timings};

/// Exit status when an asserted inequality failed.
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    Files { matrix: PathBuf, vector: PathBuf },
    Generate(SyntheticSpec),
}

/// Everything one invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub input: InputSource,
    pub config: SolveConfig,
    pub suite: Option<Suite>,
    /// When set, the run produces the frontier table instead of a report.
    pub frontier: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    /// Seeds for the randomized theorem suite.
    pub seeds: usize,
    /// Trials for the lemma suite.
    pub trials: usize,
}

pub enum Outcome {
    Report(Box<RunReport>),
    Frontier(FrontierTable),
}

struct Problem {
    a: DenseMatrix,
    b: Vector,
    echo: InputEcho,
}

fn load(input: &InputSource) -> Result<Problem> {
    match input {
        InputSource::Files { matrix, vector } => {
            let (a, b) = ingest(matrix, vector)?;
            let echo = InputEcho::Files { matrix: matrix.display().to_string(), vector: vector.display().to_string() };
            Ok(Problem { a, b, echo })
        }
        InputSource::Generate(spec) => {
            let inst = generate(spec)?;
            Ok(Problem { a: inst.a, b: inst.b, echo: InputEcho::Generated { metadata: inst.metadata } })
        }
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn solve_split(split: &RankSplit, b: &[f64], cfg: &SolveConfig) -> Result<(SparseSolution, SamplingPlan)> {
    Ok(match cfg.mode {
        Mode::Deterministic => solve_deterministic_split(split, b, cfg)?,
        Mode::Randomized => solve_randomized_split(split, b, cfg)?,
    })
}

fn context(split: &RankSplit, r: usize, cfg: &SolveConfig) -> Context {
    let (m, n) = split.matrix().shape();
    Context { m, n, k: split.k(), r, epsilon: Some(cfg.epsilon), seed: cfg.seed }
}

/// The structural report, or a not-applicable one when the sketch lost rank.
fn structural_or_skip(split: &RankSplit, b: &[f64], plan: &SamplingPlan, cfg: &SolveConfig) -> Result<BoundReport> {
    match structural_bound_split(split, b, plan) {
        Ok(mut report) => {
            report.context.epsilon = Some(cfg.epsilon);
            report.context.seed = cfg.seed;
            Ok(report)
        }
        Err(CoreError::RankDeficientSketch { sigma_k, .. }) => Ok(BoundReport::not_applicable(
            "structural",
            "sampled sketch has rank below k",
            context(split, plan.len(), cfg),
        )
        .with_term("sketch_sigma_k", sigma_k)),
        Err(e) => Err(e.into()),
    }
}

fn theorem1_suite(
    split: &RankSplit,
    b: &[f64],
    cfg: &SolveConfig,
    main: &(SparseSolution, SamplingPlan),
) -> Result<BoundReport> {
    let det_cfg = SolveConfig { mode: Mode::Deterministic, seed: None, ..cfg.clone() };
    let owned;
    let (x, plan) = if cfg.mode == Mode::Deterministic {
        (&main.0, &main.1)
    } else {
        match solve_deterministic_split(split, b, &det_cfg) {
            Ok(run) => {
                owned = run;
                (&owned.0, &owned.1)
            }
            Err(CoreError::Budget { r, .. }) => {
                return Ok(BoundReport::not_applicable(
                    "theorem_deterministic",
                    "deterministic budget exceeds n; pass --r",
                    context(split, r, &det_cfg),
                ))
            }
            Err(e) => return Err(e.into()),
        }
    };
    Ok(theorem1_report_split(split, b, cfg.epsilon, x, plan)?)
}

fn theorem2_suite(
    pool: &rayon::ThreadPool,
    split: &RankSplit,
    b: &[f64],
    cfg: &SolveConfig,
    seeds: usize,
) -> Result<(Vec<BoundReport>, Vec<SeedOutcome>)> {
    let base = cfg.seed.unwrap_or(0);
    // sampling is with replacement, so the guaranteed budget may exceed n
    let r = cfg.r_override.unwrap_or_else(|| SolveConfig { mode: Mode::Randomized, ..cfg.clone() }.theorem_budget());
    let rand_cfg = SolveConfig { mode: Mode::Randomized, seed: Some(base), r_override: Some(r), ..cfg.clone() };
    let seed_list: Vec<u64> = (0..seeds as u64).map(|i| base.wrapping_add(i)).collect();
    let runs = parallel::randomized_runs(pool, split, b, &rand_cfg, &seed_list)?;

    let mut violations = 0usize;
    let mut skipped = 0usize;
    let mut worst_margin = f64::INFINITY;
    for (_, _, plan) in &runs {
        match structural_bound_split(split, b, plan) {
            Ok(rep) => {
                violations += usize::from(!rep.holds);
                worst_margin = worst_margin.min(rep.margin);
            }
            Err(CoreError::RankDeficientSketch { .. }) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let mut ctx = context(split, r, &rand_cfg);
    ctx.seed = Some(base);
    let mut structural = BoundReport::new("structural_all_seeds", violations as f64, 0.0, true, ctx)
        .with_term("seeds", runs.len() as f64)
        .with_term("rank_deficient_seeds", skipped as f64);
    if worst_margin.is_finite() {
        structural = structural.with_term("worst_margin", worst_margin);
    }

    let pairs: Vec<(u64, SparseSolution)> = runs.into_iter().map(|(s, x, _)| (s, x)).collect();
    let aggregate = theorem2_report_split(split, b, cfg.epsilon, &pairs)?;
    Ok((vec![aggregate.aggregate, structural], aggregate.per_seed))
}

fn lemma_suite(
    pool: &rayon::ThreadPool,
    split: &RankSplit,
    cfg: &SolveConfig,
    trials: usize,
) -> Result<Vec<BoundReport>> {
    let lemma_cfg = LemmaConfig::default();
    let r = cfg.r_override.unwrap_or_else(|| concentration_budget(split.k(), lemma_cfg.epsilon, lemma_cfg.delta));
    parallel::lemma_suite(pool, split.v_k_t(), split.residual(), r, trials, cfg.seed.unwrap_or(0), &lemma_cfg)
}

fn check_common(spec: &RunSpec) -> Result<()> {
    spec.config.validate()?;
    if spec.seeds == 0 || spec.trials == 0 {
        return Err(Error::Usage("--seeds and --trials must be positive".into()));
    }
    Ok(())
}

/// Runs the solver and the requested suites.
pub fn execute(spec: &RunSpec) -> Result<Outcome> {
    check_common(spec)?;
    let problem = load(&spec.input)?;
    if let Some(r_values) = &spec.frontier {
        return Ok(Outcome::Frontier(frontier(&problem.a, &problem.b, &spec.config, r_values)?));
    }
    Ok(Outcome::Report(Box::new(report(spec, problem)?)))
}

fn report(spec: &RunSpec, problem: Problem) -> Result<RunReport> {
    let total = Instant::now();
    let cfg = &spec.config;
    let b = problem.b.as_slice();

    let start = Instant::now();
    let split = RankSplit::new(&problem.a, cfg.k)?;
    split.require_proper()?;
    let factorization_ms = elapsed_ms(start);

    let start = Instant::now();
    let main = solve_split(&split, b, cfg)?;
    let solve_ms = elapsed_ms(start);

    let min_norm = pseudo_inverse_apply(split.factor(), b)?;
    let truncated = split.truncated_solution(b)?;
    let baselines = Baselines {
        min_norm_residual: residual_norm(&problem.a, &min_norm, b)?,
        truncated_residual: residual_norm(&problem.a, &truncated, b)?,
    };

    let start = Instant::now();
    let mut reports = Vec::new();
    let mut seed_outcomes = Vec::new();
    if let Some(suite) = spec.suite {
        let pool = parallel::thread_pool()?;
        if suite.includes(Suite::Structural) {
            reports.push(structural_or_skip(&split, b, &main.1, cfg)?);
        }
        if suite.includes(Suite::Theorem1) {
            reports.push(theorem1_suite(&split, b, cfg, &main)?);
        }
        if suite.includes(Suite::Theorem2) {
            let (r, outcomes) = theorem2_suite(&pool, &split, b, cfg, spec.seeds)?;
            reports.extend(r);
            seed_outcomes = outcomes;
        }
        if suite.includes(Suite::Lemmas) {
            reports.extend(lemma_suite(&pool, &split, cfg, spec.trials)?);
        }
    }
    let suites_ms = elapsed_ms(start);

    let (x, plan) = &main;
    let solution = SolutionSummary {
        residual: residual_norm(&problem.a, &x.densify(), b)?,
        nnz: x.nnz(),
        budget_r: x.budget_r(),
        nonzeros: x.nonzeros().to_vec(),
        selected: plan.selected().to_vec(),
        scales: plan.scales().to_vec(),
    };
    let (m, n) = problem.a.shape();
    Ok(RunReport {
        schema_version: crate::report::SCHEMA_VERSION.to_string(),
        config: ConfigEcho {
            k: cfg.k,
            epsilon: cfg.epsilon,
            mode: cfg.mode,
            seed: cfg.seed,
            r: cfg.budget(),
            r_theorem: cfg.theorem_budget(),
            r_override: cfg.r_override,
            suite: spec.suite,
            seeds: spec.seeds,
            trials: spec.trials,
            input: problem.echo,
        },
        problem: ProblemSummary {
            m,
            n,
            numerical_rank: split.factor().numerical_rank(),
            sigma_k: split.sigma_k(),
            residual_fnorm: split.residual_fnorm(),
            b_norm: problem.b.norm(),
        },
        baselines,
        solution,
        all_asserted_hold: !reports.iter().any(|r| r.status == Status::Violated),
        reports,
        seed_outcomes,
        timings: Timings { factorization_ms, solve_ms, suites_ms, total_ms: elapsed_ms(total) },
    })
}

/// One row per budget: the sparse residual and the structural right-hand side
/// (absent when the sampled sketch lost rank).
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierTable {
    pub rows: Vec<(usize, f64, Option<f64>)>,
    pub warnings: Vec<String>,
}

impl FrontierTable {
    /// `r,residual,bound_rhs`, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,residual,bound_rhs\n");
        for (r, residual, rhs) in &self.rows {
            let rhs = rhs.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{r},{residual},{rhs}");
        }
        out
    }
}

/// Solves once per budget in `r_values` (sorted, duplicates dropped with a
/// warning). Monotonicity in `r` is not guaranteed and is not checked.
pub fn frontier(a: &DenseMatrix, b: &Vector, cfg: &SolveConfig, r_values: &[usize]) -> Result<FrontierTable> {
    let split = RankSplit::new(a, cfg.k)?;
    split.require_proper()?;
    let n = a.cols();
    let mut sorted = r_values.to_vec();
    sorted.sort_unstable();
    let mut warnings = Vec::new();
    let before = sorted.len();
    sorted.dedup();
    if sorted.len() < before {
        warnings.push(format!("dropped {} duplicate r value(s)", before - sorted.len()));
    }
    if sorted.is_empty() {
        return Err(Error::Usage("--frontier needs at least one r".into()));
    }
    if let Some(&bad) = sorted.iter().find(|&&r| r < cfg.k || r > n) {
        return Err(Error::Usage(format!("frontier r = {bad} is outside k..=n = {}..={n}", cfg.k)));
    }
    let mut rows = Vec::with_capacity(sorted.len());
    for r in sorted {
        if cfg.mode == Mode::Deterministic && r == cfg.k {
            warnings.push(format!("skipped r = {r}: the deterministic sampler needs r > k"));
            continue;
        }
        let run_cfg = SolveConfig { r_override: Some(r), ..cfg.clone() };
        let (x, plan) = solve_split(&split, b, &run_cfg)?;
        let residual = residual_norm(a, &x.densify(), b)?;
        let rhs = match structural_bound_split(&split, b, &plan) {
            Ok(rep) => Some(rep.rhs),
            Err(CoreError::RankDeficientSketch { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push((r, residual, rhs));
    }
    Ok(FrontierTable { rows, warnings })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs `spec`, writes the output and returns the process exit code:
/// 0 when every asserted inequality held, 3 on a violation, 2 on input
/// errors and 1 on internal failures.
pub fn run(spec: &RunSpec) -> i32 {
    let result = execute(spec).and_then(|outcome| match outcome {
        Outcome::Report(report) => {
            emit(spec.out.as_deref(), &report.to_json()?)?;
            if !report.all_asserted_hold {
                for r in report.reports.iter().filter(|r| r.is_violation()) {
                    eprintln!("violated: {} (lhs {} > rhs {})", r.name, r.lhs, r.rhs);
                }
                return Ok(EXIT_VIOLATION);
            }
            Ok(0)
        }
        Outcome::Frontier(table) => {
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
            emit(spec.out.as_deref(), &table.to_csv())?;
            Ok(0)
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
