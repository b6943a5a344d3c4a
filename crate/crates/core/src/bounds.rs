//! Both sides of every inequality the solvers rely on, evaluated numerically.
//!
//! Every evaluator returns a [`BoundReport`]. A report records whether the
//! inequality held; it never turns a violated inequality into an error. Errors
//! are reserved for broken preconditions and malformed inputs.
//!
//! Reports are either *asserted* (the inequality is guaranteed for these
//! inputs, so a violation is a bug) or *informational* (the inputs sit outside
//! the regime the guarantee covers, e.g. a column budget chosen by hand).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, pinv_of, residual_norm, spectral_norm, svd, svd_default, RankSplit};
use crate::math;
use crate::matrix::DenseMatrix;
use crate::rng::trial_stream;
use crate::sampling::{random_sampling, SamplingPlan};
use crate::solver::{concentration_budget, deterministic_budget, randomized_budget, scatter, SparseSolution};

/// Absolute part of the comparison tolerance.
pub const ABS_TOL: f64 = 1e-10;
/// Relative part of the comparison tolerance.
pub const REL_TOL: f64 = 1e-8;
/// A sketch `Z^T Omega S` counts as rank `k` when
/// `sigma_k > RANK_PRECONDITION_TOL * sigma_1`.
pub const RANK_PRECONDITION_TOL: f64 = 1e-10;
/// Success probability of the randomized guarantee.
pub const RANDOMIZED_SUCCESS: f64 = 0.7;
/// Fewest runs accepted by [`theorem2_report`].
pub const MIN_SEEDS: usize = 50;

/// Tolerance used for `lhs <= rhs`: `ABS_TOL + REL_TOL * max(|lhs|, |rhs|)`.
pub fn tolerance(lhs: f64, rhs: f64) -> f64 {
    ABS_TOL + REL_TOL * lhs.abs().max(rhs.abs())
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + tolerance(lhs, rhs)
}

/// Two-standard-deviation slack on an empirical frequency of an event with
/// probability `p` over `trials` independent trials.
pub fn binomial_slack(p: f64, trials: usize) -> f64 {
    2.0 * math::sqrt(p * (1.0 - p) / trials as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Status {
    /// Asserted and held.
    Holds,
    /// Asserted and failed.
    Violated,
    /// A precondition of the inequality does not hold for these inputs.
    NotApplicable,
    /// Measured but outside the guaranteed regime.
    Informational,
}

/// Which norm a matrix inequality is stated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NormKind {
    Spectral,
    Frobenius,
}

impl NormKind {
    fn of(self, a: &DenseMatrix) -> Result<f64> {
        match self {
            NormKind::Spectral => spectral_norm(a),
            NormKind::Frobenius => Ok(frobenius_norm(a)),
        }
    }

    fn label(self) -> &'static str {
        match self {
            NormKind::Spectral => "spectral",
            NormKind::Frobenius => "frobenius",
        }
    }
}

/// Parameters of the run a report belongs to.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Context {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
}

/// One link of an inequality chain.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceStep {
    pub label: String,
    pub value: f64,
    /// Whether `previous <= value` is guaranteed for this run.
    pub asserted: bool,
    /// Whether `previous <= value` held (within tolerance). Always true for
    /// the first step.
    pub dominates_previous: bool,
}

/// An inequality chain `v_0 <= v_1 <= ... <= v_last`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProofTrace {
    pub steps: Vec<TraceStep>,
}

impl ProofTrace {
    pub fn push(&mut self, label: &str, value: f64, asserted: bool) {
        let dominates_previous = self.steps.last().is_none_or(|p| within(p.value, value));
        self.steps.push(TraceStep { label: label.to_string(), value, asserted, dominates_previous });
    }

    /// True when every asserted link held.
    pub fn asserted_links_hold(&self) -> bool {
        self.steps.iter().all(|s| !s.asserted || s.dominates_previous)
    }

    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.value).collect()
    }
}

/// Both sides of one inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    /// `lhs <= rhs` within [`tolerance`].
    pub holds: bool,
    pub status: Status,
    /// Named intermediate quantities.
    pub terms: Vec<(String, f64)>,
    pub context: Context,
    pub trace: Option<ProofTrace>,
}

impl BoundReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, asserted: bool, context: Context) -> Self {
        let holds = within(lhs, rhs);
        let status = match (asserted, holds) {
            (false, _) => Status::Informational,
            (true, true) => Status::Holds,
            (true, false) => Status::Violated,
        };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            holds,
            status,
            terms: Vec::new(),
            context,
            trace: None,
        }
    }

    /// A report whose precondition failed; both sides are zero.
    pub fn not_applicable(name: &str, reason: &str, context: Context) -> Self {
        let mut report = Self::new(name, 0.0, 0.0, false, context);
        report.status = Status::NotApplicable;
        report.terms.push((format!("not_applicable: {reason}"), 0.0));
        report
    }

    pub fn with_term(mut self, label: &str, value: f64) -> Self {
        self.terms.push((label.to_string(), value));
        self
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|(l, _)| l == label).map(|&(_, v)| v)
    }

    pub fn is_violation(&self) -> bool {
        self.status == Status::Violated
    }

    pub fn is_asserted(&self) -> bool {
        matches!(self.status, Status::Holds | Status::Violated)
    }
}

/// `Z^T Omega S` together with its pseudo-inverse, once the rank-`k`
/// precondition has been checked.
struct Sketch {
    pinv: DenseMatrix,
    sigma_k: f64,
}

impl Sketch {
    fn of(z_t: &DenseMatrix, plan: &SamplingPlan) -> Result<Self> {
        let k = z_t.rows();
        let w = plan.apply(z_t)?;
        let full = svd(&w, 0.0)?;
        let sigma_k = full.sigma().get(k - 1).copied().unwrap_or(0.0);
        let threshold = RANK_PRECONDITION_TOL * full.sigma_max();
        if !(sigma_k > threshold) {
            return Err(Error::RankDeficientSketch { sigma_k, threshold });
        }
        let pinv = pinv_of(&svd(&w, RANK_PRECONDITION_TOL)?)?;
        Ok(Self { pinv, sigma_k })
    }
}

fn column(values: Vec<f64>) -> DenseMatrix {
    let len = values.len();
    DenseMatrix::new(len, 1, values).unwrap_or_else(|_| DenseMatrix::zeros(len, 1))
}

/// Quantities shared by the structural inequality and the deterministic proof
/// chain.
struct StructuralParts {
    sparse_residual: f64,
    truncated_residual: f64,
    sampled_term: f64,
    sampled_term_matrix_form: f64,
    /// `E Omega S` (merged plan).
    e_sketch: DenseMatrix,
    sketch: Sketch,
    /// `Sigma_k^{-1} U_k^T b`.
    whitened: Vec<f64>,
}

fn structural_parts(split: &RankSplit, b: &[f64], plan: &SamplingPlan) -> Result<StructuralParts> {
    let a = split.matrix();
    if plan.source_dim() != a.cols() {
        return Err(Error::DimensionMismatch {
            op: "structural_bound",
            expected: (a.cols(), 1),
            found: (plan.source_dim(), 1),
        });
    }
    let merged = plan.merged();
    let sketch = Sketch::of(split.v_k_t(), &merged)?;

    let c = merged.apply(a)?;
    let x_r = crate::linalg::pseudo_inverse_apply(&svd_default(&c)?, b)?;
    let x_hat = scatter(&x_r, &merged, a.cols())?;
    let sparse_residual = residual_norm(a, &x_hat.densify(), b)?;
    let truncated_residual = residual_norm(a, &split.truncated_solution(b)?, b)?;

    let e_sketch = merged.apply(split.residual())?;
    let whitened = split.whitened_projection(b)?;
    // vector form: E Omega S ((V_k^T Omega S)^+ g)
    let y = sketch.pinv.matvec(&whitened)?;
    let sampled_term = math::norm2(&e_sketch.matvec(&y)?);
    // matrix form: || (E Omega S (V_k^T Omega S)^+) G ||_F with G = g as a column
    let sampled_term_matrix_form = frobenius_norm(&e_sketch.matmul(&sketch.pinv)?.matmul(&column(whitened.clone()))?);

    Ok(StructuralParts {
        sparse_residual,
        truncated_residual,
        sampled_term,
        sampled_term_matrix_form,
        e_sketch,
        sketch,
        whitened,
    })
}

fn context_of(a: &DenseMatrix, k: usize, r: usize) -> Context {
    Context { m: a.rows(), n: a.cols(), k, r, epsilon: None, seed: None }
}

/// `||A x_hat - b|| <= ||A x_k* - b|| + ||(A - A_k) Omega S (V_k^T Omega S)^+ Sigma_k^{-1} U_k^T b||`,
/// with `x_hat` rebuilt from `plan`. Holds for every plan whose sketch
/// `V_k^T Omega S` has rank `k`; always asserted.
///
/// Errors with [`Error::RankDeficientSketch`] when that precondition fails.
pub fn structural_bound(a: &DenseMatrix, b: &[f64], k: usize, plan: &SamplingPlan) -> Result<BoundReport> {
    let split = RankSplit::new(a, k)?;
    structural_bound_split(&split, b, plan)
}

/// As [`structural_bound`] on a precomputed split.
pub fn structural_bound_split(split: &RankSplit, b: &[f64], plan: &SamplingPlan) -> Result<BoundReport> {
    let parts = structural_parts(split, b, plan)?;
    let rhs = parts.truncated_residual + parts.sampled_term;
    let context = context_of(split.matrix(), split.k(), plan.len());
    Ok(BoundReport::new("structural", parts.sparse_residual, rhs, true, context)
        .with_term("truncated_residual", parts.truncated_residual)
        .with_term("sampled_term", parts.sampled_term)
        .with_term("sampled_term_matrix_form", parts.sampled_term_matrix_form)
        .with_term("sketch_sigma_k", parts.sketch.sigma_k))
}

/// Column-based approximation of a target `B` (`m x w`) by sampled columns of
/// `A = H Z^T + E`:
///
/// `||B - C C^+ B|| <= ||B - H H^+ B|| + ||E Omega S (Z^T Omega S)^+ H^+ B||`
///
/// with `C = A Omega S`, in the spectral or Frobenius norm. `Z` (`n x k`) must
/// have orthonormal columns and `Z^T Omega S` must have rank `k`.
pub fn generalized_bound(
    b_target: &DenseMatrix,
    h: &DenseMatrix,
    z: &DenseMatrix,
    e: &DenseMatrix,
    plan: &SamplingPlan,
    norm: NormKind,
) -> Result<BoundReport> {
    let (m, n) = e.shape();
    let k = z.cols();
    if h.rows() != m || h.cols() != k || z.rows() != n || b_target.rows() != m {
        return Err(Error::DimensionMismatch { op: "generalized_bound", expected: (m, k), found: h.shape() });
    }
    let deviation = z.orthonormality_defect(false);
    if deviation > crate::sampling::ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let merged = plan.merged();
    let z_t = z.transpose();
    let sketch = Sketch::of(&z_t, &merged)?;

    let a = h.matmul(&z_t)?.add(e)?;
    let c = merged.apply(&a)?;
    let c_fit = c.matmul(&pinv_of(&svd_default(&c)?)?.matmul(b_target)?)?;
    let lhs = norm.of(&b_target.sub(&c_fit)?)?;

    let h_pinv_b = pinv_of(&svd_default(h)?)?.matmul(b_target)?;
    let h_fit = h.matmul(&h_pinv_b)?;
    let projection_residual = norm.of(&b_target.sub(&h_fit)?)?;
    let sampled_term = norm.of(&merged.apply(e)?.matmul(&sketch.pinv)?.matmul(&h_pinv_b)?)?;

    let name = format!("generalized_{}", norm.label());
    let context = Context { m, n, k, r: plan.len(), epsilon: None, seed: None };
    Ok(BoundReport::new(&name, lhs, projection_residual + sampled_term, true, context)
        .with_term("projection_residual", projection_residual)
        .with_term("sampled_term", sampled_term)
        .with_term("sketch_sigma_k", sketch.sigma_k))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: "must lie strictly between 0 and 1/2" });
    }
    Ok(())
}

fn check_solution(split: &RankSplit, solution: &SparseSolution, plan: &SamplingPlan) -> Result<()> {
    let n = split.matrix().cols();
    if solution.dim() != n || plan.source_dim() != n {
        return Err(Error::ParameterMismatch { reason: "solution, plan and matrix disagree on n" });
    }
    let mut in_plan = vec![false; n];
    for &i in plan.selected() {
        in_plan[i] = true;
    }
    if solution.support().iter().any(|&i| !in_plan[i]) {
        return Err(Error::ParameterMismatch { reason: "solution support is not inside the plan" });
    }
    Ok(())
}

/// Deterministic guarantee
/// `||A x_hat - b|| <= ||A x_k* - b|| + (1 + eps) ||b|| ||A - A_k||_F / sigma_k(A)`
/// for a solution produced by the deterministic solver, with the chain of
/// intermediate bounds that establishes it:
///
/// 1. `sampled_term = ||E Omega S (V_k^T Omega S)^+ Sigma_k^{-1} U_k^T b||`
/// 2. `<= ||E Omega S (V_k^T Omega S)^+||_F ||Sigma_k^{-1} U_k^T b||`
/// 3. `<= ||E Omega S||_F ||(V_k^T Omega S)^+|| ||b|| / sigma_k(A)`
/// 4. `<= ||E||_F (1 - sqrt(k/r))^-2 ||b|| / sigma_k(A)`
/// 5. `<= (1 + eps) ||E||_F ||b|| / sigma_k(A)`
///
/// Links 2–4 hold for any budget; link 5 and the theorem itself are asserted
/// only when the run used `r = ceil(9k / eps^2)`. The tighter right-hand side
/// built from link 4 is reported as the `rhs_tight` term.
pub fn theorem1_report(
    a: &DenseMatrix,
    b: &[f64],
    k: usize,
    epsilon: f64,
    solution: &SparseSolution,
    plan: &SamplingPlan,
) -> Result<BoundReport> {
    check_epsilon(epsilon)?;
    let split = RankSplit::new(a, k)?;
    theorem1_report_split(&split, b, epsilon, solution, plan)
}

/// As [`theorem1_report`] on a precomputed split.
pub fn theorem1_report_split(
    split: &RankSplit,
    b: &[f64],
    epsilon: f64,
    solution: &SparseSolution,
    plan: &SamplingPlan,
) -> Result<BoundReport> {
    check_epsilon(epsilon)?;
    check_solution(split, solution, plan)?;
    let a = split.matrix();
    let k = split.k();
    let r = solution.budget_r();
    let at_budget = r == deterministic_budget(k, epsilon);

    let parts = structural_parts(split, b, plan)?;
    let lhs = residual_norm(a, &solution.densify(), b)?;
    let b_norm = math::norm2(b);
    let e_fnorm = split.residual_fnorm();
    let sigma_k = split.sigma_k();
    let base = e_fnorm * b_norm / sigma_k;
    let sampler_factor = 1.0 - math::sqrt(k as f64 / r as f64);
    let tight_factor = 1.0 / (sampler_factor * sampler_factor);

    let mut trace = ProofTrace::default();
    trace.push("sampled_term", parts.sampled_term, true);
    trace.push(
        "split_right_hand_side",
        frobenius_norm(&parts.e_sketch.matmul(&parts.sketch.pinv)?) * math::norm2(&parts.whitened),
        true,
    );
    trace.push("submultiplicative", frobenius_norm(&parts.e_sketch) / parts.sketch.sigma_k * b_norm / sigma_k, true);
    trace.push("sampler_guarantee", tight_factor * base, true);
    trace.push("accuracy_parameter", (1.0 + epsilon) * base, at_budget);

    let rhs = parts.truncated_residual + (1.0 + epsilon) * base;
    let mut context = context_of(a, k, r);
    context.epsilon = Some(epsilon);
    let mut report = BoundReport::new("theorem_deterministic", lhs, rhs, at_budget, context)
        .with_term("truncated_residual", parts.truncated_residual)
        .with_term("additive_term", (1.0 + epsilon) * base)
        .with_term("rhs_tight", parts.truncated_residual + tight_factor * base)
        .with_term("structural_rhs", parts.truncated_residual + parts.sampled_term)
        .with_term("theorem_budget", deterministic_budget(k, epsilon) as f64);
    if !trace.asserted_links_hold() {
        report.status = Status::Violated;
    }
    report.trace = Some(trace);
    Ok(report)
}

/// Outcome of one seeded randomized run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedOutcome {
    pub seed: u64,
    pub residual: f64,
    pub holds: bool,
}

/// Aggregate over seeds plus the per-seed outcomes.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AggregateReport {
    pub aggregate: BoundReport,
    pub per_seed: Vec<SeedOutcome>,
}

/// Randomized guarantee
/// `||A x_hat - b|| <= ||A x_k* - b|| + eps ||b|| ||A - A_k||_F / sigma_k(A)`,
/// which holds with probability at least 0.7.
///
/// The aggregate report compares the failure frequency over the supplied runs
/// with `0.3 + 2 sigma` (binomial standard deviation at that run count). It is
/// asserted only when every run used `r = ceil(36 k ln(20k) / eps^2)`.
pub fn theorem2_report(
    a: &DenseMatrix,
    b: &[f64],
    k: usize,
    epsilon: f64,
    runs: &[(u64, SparseSolution)],
) -> Result<AggregateReport> {
    check_epsilon(epsilon)?;
    let split = RankSplit::new(a, k)?;
    theorem2_report_split(&split, b, epsilon, runs)
}

/// As [`theorem2_report`] on a precomputed split.
pub fn theorem2_report_split(
    split: &RankSplit,
    b: &[f64],
    epsilon: f64,
    runs: &[(u64, SparseSolution)],
) -> Result<AggregateReport> {
    check_epsilon(epsilon)?;
    if runs.len() < MIN_SEEDS {
        return Err(Error::TooFewSeeds { got: runs.len(), required: MIN_SEEDS });
    }
    let a = split.matrix();
    let k = split.k();
    let n = a.cols();
    if runs.iter().any(|(_, s)| s.dim() != n) {
        return Err(Error::ParameterMismatch { reason: "solution length differs from n" });
    }
    let truncated_residual = residual_norm(a, &split.truncated_solution(b)?, b)?;
    let additive = epsilon * math::norm2(b) * split.residual_fnorm() / split.sigma_k();
    let rhs = truncated_residual + additive;

    let per_seed = runs
        .iter()
        .map(|(seed, s)| {
            let residual = residual_norm(a, &s.densify(), b)?;
            Ok(SeedOutcome { seed: *seed, residual, holds: within(residual, rhs) })
        })
        .collect::<Result<Vec<_>>>()?;

    let trials = runs.len();
    let failures = per_seed.iter().filter(|o| !o.holds).count();
    let failure_rate = failures as f64 / trials as f64;
    let slack = binomial_slack(RANDOMIZED_SUCCESS, trials);
    let theorem_r = randomized_budget(k, epsilon);
    let at_budget = runs.iter().all(|(_, s)| s.budget_r() == theorem_r);
    let r = runs[0].1.budget_r();

    let mut context = context_of(a, k, r);
    context.epsilon = Some(epsilon);
    let aggregate = BoundReport::new(
        "theorem_randomized_failure_rate",
        failure_rate,
        1.0 - RANDOMIZED_SUCCESS + slack,
        at_budget,
        context,
    )
    .with_term("success_rate", 1.0 - failure_rate)
    .with_term("required_success_rate", RANDOMIZED_SUCCESS - slack)
    .with_term("seeds", trials as f64)
    .with_term("truncated_residual", truncated_residual)
    .with_term("additive_term", additive)
    .with_term("per_seed_rhs", rhs)
    .with_term("theorem_budget", theorem_r as f64);
    Ok(AggregateReport { aggregate, per_seed })
}

/// Parameters of the sampler lemma suite.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaConfig {
    /// Concentration accuracy, `0 < epsilon < 1`.
    pub epsilon: f64,
    /// Failure probability, `0 < delta < 1`.
    pub delta: f64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self { epsilon: 0.5, delta: 0.1 }
    }
}

/// Relative half-width accepted for the mean of `||E Omega S||_F^2` around
/// `||E||_F^2` (the 2-standard-error slack is used instead when larger).
pub const MEAN_RELATIVE_SLACK: f64 = 0.05;

/// Sampled quantities of one leverage-sampling trial, with
/// `M = V^T Omega S`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaTrial {
    /// `||M M^T - I_k||_2`.
    pub concentration: f64,
    /// `||M^+ - M^T||_2`, `None` when `M` lost rank.
    pub pinv_transpose_gap: Option<f64>,
    /// `||E Omega S||_F^2`.
    pub sketch_energy: f64,
    /// `||E Omega S S^T Omega^T V||_F^2`.
    pub cross_energy: f64,
}

fn check_lemma_inputs(v_t: &DenseMatrix, e: &DenseMatrix, r: usize, cfg: &LemmaConfig) -> Result<()> {
    if e.cols() != v_t.cols() {
        return Err(Error::DimensionMismatch { op: "lemma_suite", expected: (e.rows(), v_t.cols()), found: e.shape() });
    }
    if r == 0 {
        return Err(Error::Budget { r, n: v_t.cols(), reason: "at least one sample is required" });
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: "must lie in (0, 1)" });
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidParameter { name: "delta", reason: "must lie in (0, 1)" });
    }
    Ok(())
}

/// Runs leverage sampling once on trial stream `trial` of `seed` and measures
/// every quantity the lemma suite needs.
pub fn measure_lemma_trial(v_t: &DenseMatrix, e: &DenseMatrix, r: usize, seed: u64, trial: u64) -> Result<LemmaTrial> {
    let k = v_t.rows();
    // merging repeats leaves M M^T, ||E Omega S||_F and E Omega S S^T Omega^T V unchanged
    let plan = random_sampling(v_t, r, &mut trial_stream(seed, trial))?.merged();
    let m = plan.apply(v_t)?;
    let gram = m.matmul(&m.transpose())?.sub(&DenseMatrix::identity(k))?;
    let concentration = spectral_norm(&gram)?;
    let full = svd(&m, 0.0)?;
    let pinv_transpose_gap =
        if full.numerical_rank() >= k && full.sigma()[k - 1] > RANK_PRECONDITION_TOL * full.sigma_max() {
            // M = P diag(s) Q^T gives M^+ - M^T = Q diag(1/s - s) P^T
            Some(full.sigma().iter().map(|s| (1.0 / s - s).abs()).fold(0.0, f64::max))
        } else {
            None
        };
    let e_sketch = plan.apply(e)?;
    let sketch_energy = e_sketch.frobenius_norm_sq();
    let cross_energy = e_sketch.matmul(&m.transpose())?.frobenius_norm_sq();
    Ok(LemmaTrial { concentration, pinv_transpose_gap, sketch_energy, cross_energy })
}

/// Turns per-trial measurements into one aggregate report per sampler lemma:
///
/// * `concentration`: `P(||M M^T - I|| > eps) <= delta` (asserted when
///   `r >= ceil(4k ln(2k/delta) / eps^2)`);
/// * `pinv_transpose`: on trials with `||M M^T - I|| <= eps`,
///   `||M^+ - M^T|| <= eps / sqrt(1 - eps)`;
/// * `expected_sketch_energy`: mean of `||E Omega S||_F^2` equals `||E||_F^2`;
/// * `markov_sketch_energy`: `P(||E Omega S||_F^2 > ||E||_F^2 / delta) <= delta`;
/// * `cross_term`: `P(||E Omega S S^T Omega^T V||_F^2 > k ||E||_F^2 / (delta r)) <= delta`,
///   only when `E V = 0`.
///
/// Frequencies are compared with `delta + 2 sigma` at the trial count.
pub fn summarize_lemma_trials(
    v_t: &DenseMatrix,
    e: &DenseMatrix,
    r: usize,
    seed: u64,
    cfg: &LemmaConfig,
    trials: &[LemmaTrial],
) -> Result<Vec<BoundReport>> {
    check_lemma_inputs(v_t, e, r, cfg)?;
    if trials.is_empty() {
        return Err(Error::EmptyDimension { what: "lemma trials" });
    }
    let k = v_t.rows();
    let count = trials.len() as f64;
    let context = Context { m: e.rows(), n: v_t.cols(), k, r, epsilon: Some(cfg.epsilon), seed: Some(seed) };
    let freq = |fail: &dyn Fn(&LemmaTrial) -> bool| trials.iter().filter(|t| fail(t)).count() as f64 / count;
    let delta_bound = cfg.delta + binomial_slack(cfg.delta, trials.len());
    let energy = e.frobenius_norm_sq();
    let mut reports = Vec::with_capacity(5);

    let required_r = concentration_budget(k, cfg.epsilon, cfg.delta);
    let concentration_failures = freq(&|t| !within(t.concentration, cfg.epsilon));
    reports.push(
        BoundReport::new("concentration", concentration_failures, delta_bound, r >= required_r, context.clone())
            .with_term("required_r", required_r as f64)
            .with_term("max_deviation", trials.iter().map(|t| t.concentration).fold(0.0, f64::max)),
    );

    let event_gaps: Vec<f64> =
        trials.iter().filter(|t| within(t.concentration, cfg.epsilon)).filter_map(|t| t.pinv_transpose_gap).collect();
    let pinv_bound = cfg.epsilon / math::sqrt(1.0 - cfg.epsilon);
    reports.push(if event_gaps.is_empty() {
        BoundReport::not_applicable("pinv_transpose", "no trial met the concentration event", context.clone())
    } else {
        BoundReport::new(
            "pinv_transpose",
            event_gaps.iter().copied().fold(0.0, f64::max),
            pinv_bound,
            true,
            context.clone(),
        )
        .with_term("event_trials", event_gaps.len() as f64)
    });

    let mean = trials.iter().map(|t| t.sketch_energy).sum::<f64>() / count;
    let variance = if trials.len() > 1 {
        trials.iter().map(|t| (t.sketch_energy - mean) * (t.sketch_energy - mean)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let standard_error = math::sqrt(variance / count);
    let mean_slack = (MEAN_RELATIVE_SLACK * energy).max(2.0 * standard_error);
    reports.push(
        BoundReport::new("expected_sketch_energy", (mean - energy).abs(), mean_slack, true, context.clone())
            .with_term("mean", mean)
            .with_term("target", energy)
            .with_term("standard_error", standard_error),
    );

    let markov_failures = freq(&|t| !within(t.sketch_energy, energy / cfg.delta));
    reports.push(BoundReport::new("markov_sketch_energy", markov_failures, delta_bound, true, context.clone()));

    let ev = e.matmul(&v_t.transpose())?;
    let ev_norm = frobenius_norm(&ev);
    if ev_norm <= 1e-8 * math::sqrt(energy).max(1.0) {
        let threshold = k as f64 * energy / (cfg.delta * r as f64);
        let cross_failures = freq(&|t| !within(t.cross_energy, threshold));
        let cross_mean = trials.iter().map(|t| t.cross_energy).sum::<f64>() / count;
        reports.push(
            BoundReport::new("cross_term", cross_failures, delta_bound, true, context)
                .with_term("mean", cross_mean)
                .with_term("expectation_bound", k as f64 * energy / r as f64),
        );
    } else {
        reports
            .push(BoundReport::not_applicable("cross_term", "E V is not zero", context).with_term("ev_fnorm", ev_norm));
    }
    Ok(reports)
}

/// Sequential Monte Carlo driver for the sampler lemmas; trial `t` uses
/// [`trial_stream`]`(seed, t)`.
pub fn lemma_suite(
    v_t: &DenseMatrix,
    e: &DenseMatrix,
    r: usize,
    trials: usize,
    seed: u64,
    cfg: &LemmaConfig,
) -> Result<Vec<BoundReport>> {
    check_lemma_inputs(v_t, e, r, cfg)?;
    let measured = (0..trials as u64).map(|t| measure_lemma_trial(v_t, e, r, seed, t)).collect::<Result<Vec<_>>>()?;
    summarize_lemma_trials(v_t, e, r, seed, cfg, &measured)
}
