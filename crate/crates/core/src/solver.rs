//! End-to-end sparse least-squares pipelines.
//!
//! Both solvers follow the same recipe: split `A` at rank `k`, choose a
//! sampling plan from `V_k^T` (and `E = A - A_k` in the deterministic case),
//! form `C = A Omega S`, solve `x_r = C^+ b`, and scatter `x_r` back to a
//! length-`n` vector with the rescaling folded in so that `A x_hat = C x_r`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{pseudo_inverse_apply, svd_default, RankSplit};
use crate::math;
use crate::matrix::{DenseMatrix, Vector};
use crate::rng::seeded_stream;
use crate::sampling::{deterministic_sampling, random_sampling, SamplingPlan};

/// Failure probability used by the randomized analysis. Fixed so that the
/// success probability of the randomized guarantee stays at `1 - 3 delta = 0.7`.
pub const DELTA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mode {
    Deterministic,
    Randomized,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveConfig {
    pub k: usize,
    /// Accuracy parameter, `0 < epsilon < 1/2`.
    pub epsilon: f64,
    pub mode: Mode,
    pub seed: Option<u64>,
    /// Explicit column budget replacing the one implied by `k` and `epsilon`.
    pub r_override: Option<usize>,
}

impl SolveConfig {
    pub fn deterministic(k: usize, epsilon: f64) -> Self {
        Self { k, epsilon, mode: Mode::Deterministic, seed: None, r_override: None }
    }

    pub fn randomized(k: usize, epsilon: f64, seed: u64) -> Self {
        Self { k, epsilon, mode: Mode::Randomized, seed: Some(seed), r_override: None }
    }

    pub fn with_r(mut self, r: usize) -> Self {
        self.r_override = Some(r);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter { name: "k", reason: "must be at least 1" });
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParameter { name: "epsilon", reason: "must lie strictly between 0 and 1/2" });
        }
        if self.mode == Mode::Randomized && self.seed.is_none() {
            return Err(Error::MissingSeed);
        }
        Ok(())
    }

    /// Budget implied by the mode's guarantee (ignores `r_override`).
    pub fn theorem_budget(&self) -> usize {
        match self.mode {
            Mode::Deterministic => deterministic_budget(self.k, self.epsilon),
            Mode::Randomized => randomized_budget(self.k, self.epsilon),
        }
    }

    /// The budget actually used.
    pub fn budget(&self) -> usize {
        self.r_override.unwrap_or_else(|| self.theorem_budget())
    }

    /// True when the run uses the budget its guarantee was stated for.
    pub fn uses_theorem_budget(&self) -> bool {
        self.budget() == self.theorem_budget()
    }
}

/// `ceil(9 k / epsilon^2)`.
pub fn deterministic_budget(k: usize, epsilon: f64) -> usize {
    math::ceil(9.0 * k as f64 / (epsilon * epsilon)) as usize
}

/// `ceil(36 k ln(20 k) / epsilon^2)`.
pub fn randomized_budget(k: usize, epsilon: f64) -> usize {
    let k = k as f64;
    math::ceil(36.0 * k * math::ln(20.0 * k) / (epsilon * epsilon)) as usize
}

/// `ceil(4 k ln(2 k / delta) / epsilon^2)`, the sample count for the
/// concentration of `V^T Omega S S^T Omega^T V` around `I_k`.
pub fn concentration_budget(k: usize, epsilon: f64, delta: f64) -> usize {
    let k = k as f64;
    math::ceil(4.0 * k * math::ln(2.0 * k / delta) / (epsilon * epsilon)) as usize
}

/// A length-`dim` vector stored as `(index, value)` pairs with strictly
/// increasing indices.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseSolution {
    dim: usize,
    nonzeros: Vec<(usize, f64)>,
    budget_r: usize,
}

impl SparseSolution {
    pub fn new(dim: usize, mut nonzeros: Vec<(usize, f64)>, budget_r: usize) -> Result<Self> {
        nonzeros.sort_by_key(|&(i, _)| i);
        if nonzeros.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter { name: "nonzeros", reason: "duplicate index" });
        }
        if nonzeros.iter().any(|&(i, v)| i >= dim || !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "nonzeros", reason: "index out of range or non-finite value" });
        }
        if nonzeros.len() > budget_r {
            return Err(Error::Budget { r: budget_r, n: dim, reason: "more nonzeros than the budget" });
        }
        Ok(Self { dim, nonzeros, budget_r })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nonzeros(&self) -> &[(usize, f64)] {
        &self.nonzeros
    }

    pub fn nnz(&self) -> usize {
        self.nonzeros.len()
    }

    pub fn budget_r(&self) -> usize {
        self.budget_r
    }

    pub fn support(&self) -> Vec<usize> {
        self.nonzeros.iter().map(|&(i, _)| i).collect()
    }

    pub fn densify(&self) -> Vector {
        let mut x = Vector::zeros(self.dim).into_vec();
        for &(i, v) in &self.nonzeros {
            x[i] = v;
        }
        Vector::from_computed(x)
    }

    fn with_budget(mut self, budget_r: usize) -> Self {
        self.budget_r = self.budget_r.max(budget_r);
        self
    }
}

/// Embeds `x_r` (one entry per distinct plan column, in merged-plan order) in
/// `R^n`, multiplying each entry by its column's scale so that
/// `A * densify(x_hat) = (A Omega S) x_r`. Exact zeros are not stored.
pub fn scatter(x_r: &[f64], plan: &SamplingPlan, n: usize) -> Result<SparseSolution> {
    if plan.source_dim() != n {
        return Err(Error::DimensionMismatch { op: "scatter", expected: (n, 1), found: (plan.source_dim(), 1) });
    }
    let merged = plan.merged();
    if x_r.len() != merged.len() {
        return Err(Error::DimensionMismatch { op: "scatter", expected: (merged.len(), 1), found: (x_r.len(), 1) });
    }
    let nonzeros = merged
        .selected()
        .iter()
        .zip(merged.scales())
        .zip(x_r)
        .map(|((&i, &s), &x)| (i, s * x))
        .filter(|&(_, v)| v != 0.0)
        .collect();
    SparseSolution::new(n, nonzeros, plan.len())
}

/// Least-squares solve restricted to the plan's columns:
/// `x_r = (A Omega S)^+ b`, scattered back to `R^n`.
///
/// Repeated indices are merged before the solve.
pub fn solve_on_plan(a: &DenseMatrix, b: &[f64], plan: &SamplingPlan) -> Result<SparseSolution> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { op: "solve_on_plan", expected: (a.rows(), 1), found: (b.len(), 1) });
    }
    let merged = plan.merged();
    let c = merged.apply(a)?;
    let x_r = pseudo_inverse_apply(&svd_default(&c)?, b)?;
    Ok(scatter(&x_r, &merged, a.cols())?.with_budget(plan.len()))
}

fn checked_budget(cfg: &SolveConfig, n: usize) -> Result<usize> {
    let r = cfg.budget();
    if cfg.r_override.is_none() && r > n {
        return Err(Error::Budget {
            r,
            n,
            reason: "the guaranteed budget exceeds the column count; pass an explicit override",
        });
    }
    Ok(r)
}

fn prepare(a: &DenseMatrix, b: &[f64], cfg: &SolveConfig, expected: Mode) -> Result<RankSplit> {
    if cfg.mode != expected {
        return Err(Error::ParameterMismatch { reason: "solver called with the other mode" });
    }
    cfg.validate()?;
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { op: "solve", expected: (a.rows(), 1), found: (b.len(), 1) });
    }
    let split = RankSplit::new(a, cfg.k)?;
    split.require_proper()?;
    Ok(split)
}

/// Deterministic pipeline with `r = ceil(9k / epsilon^2)` (or the override).
pub fn solve_deterministic(a: &DenseMatrix, b: &[f64], cfg: &SolveConfig) -> Result<(SparseSolution, SamplingPlan)> {
    let split = prepare(a, b, cfg, Mode::Deterministic)?;
    solve_deterministic_split(&split, b, cfg)
}

/// As [`solve_deterministic`] on a precomputed split.
pub fn solve_deterministic_split(
    split: &RankSplit,
    b: &[f64],
    cfg: &SolveConfig,
) -> Result<(SparseSolution, SamplingPlan)> {
    let r = checked_budget(cfg, split.matrix().cols())?;
    let plan = deterministic_sampling(split.v_k_t(), split.residual(), r)?;
    let solution = solve_on_plan(split.matrix(), b, &plan)?.with_budget(r);
    Ok((solution, plan))
}

/// Randomized pipeline with `r = ceil(36 k ln(20k) / epsilon^2)` (or the
/// override). The returned plan keeps repeated draws; they are merged only to
/// form `C`. With an explicit override the budget may exceed `n`.
pub fn solve_randomized(a: &DenseMatrix, b: &[f64], cfg: &SolveConfig) -> Result<(SparseSolution, SamplingPlan)> {
    let split = prepare(a, b, cfg, Mode::Randomized)?;
    solve_randomized_split(&split, b, cfg)
}

/// As [`solve_randomized`] on a precomputed split.
pub fn solve_randomized_split(
    split: &RankSplit,
    b: &[f64],
    cfg: &SolveConfig,
) -> Result<(SparseSolution, SamplingPlan)> {
    let seed = cfg.seed.ok_or(Error::MissingSeed)?;
    let r = checked_budget(cfg, split.matrix().cols())?;
    let plan = random_sampling(split.v_k_t(), r, &mut seeded_stream(seed))?;
    let solution = solve_on_plan(split.matrix(), b, &plan)?;
    Ok((solution, plan))
}

/// Dispatches on `cfg.mode`.
pub fn solve(a: &DenseMatrix, b: &[f64], cfg: &SolveConfig) -> Result<(SparseSolution, SamplingPlan)> {
    match cfg.mode {
        Mode::Deterministic => solve_deterministic(a, b, cfg),
        Mode::Randomized => solve_randomized(a, b, cfg),
    }
}

/// Minimum-norm solution `x* = A^+ b` and truncated solution `x_k* = A_k^+ b`.
pub fn solve_baselines(a: &DenseMatrix, b: &[f64], k: usize) -> Result<(Vector, Vector)> {
    let split = RankSplit::new(a, k)?;
    split.require_proper()?;
    Ok((pseudo_inverse_apply(split.factor(), b)?, split.truncated_solution(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::residual_norm;
    use crate::rng::seeded_stream;
    use crate::testutil::{gaussian, with_spectrum};
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn budget_formulas() {
        assert_eq!(deterministic_budget(1, 0.3), 100);
        assert_eq!(deterministic_budget(2, 0.49), 75);
        assert_eq!(deterministic_budget(1, 0.45), 45);
        assert_eq!(randomized_budget(1, 0.4), 675);
        assert_eq!(concentration_budget(2, 0.5, 0.1), 119);
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::deterministic(1, 0.5).validate().is_err());
        assert!(SolveConfig::deterministic(1, 0.0).validate().is_err());
        assert!(SolveConfig::deterministic(0, 0.3).validate().is_err());
        assert!(SolveConfig::deterministic(1, 0.3).validate().is_ok());
        let mut cfg = SolveConfig::randomized(1, 0.3, 1);
        cfg.seed = None;
        assert_eq!(cfg.validate(), Err(Error::MissingSeed));
    }

    #[test]
    fn identity_budget_and_override() {
        let a = DenseMatrix::identity(4);
        let b = [1.0; 4];
        let cfg = SolveConfig::deterministic(2, 0.49);
        assert_eq!(cfg.budget(), 75);
        assert!(matches!(solve_deterministic(&a, &b, &cfg), Err(Error::Budget { r: 75, n: 4, .. })));
        let (x, plan) = solve_deterministic(&a, &b, &cfg.with_r(4)).unwrap();
        // Columns outside span(V_k) have L(v) = 0 and are never admissible, so
        // only the two leading columns can be chosen: the sparse residual
        // equals the truncated one.
        assert!(plan.selected().iter().all(|&i| i < 2));
        assert_eq!(x.budget_r(), 4);
        assert_abs_diff_eq!(residual_norm(&a, &x.densify(), &b).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(x.densify().as_slice(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn rank_errors() {
        let a = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let cfg = SolveConfig::randomized(1, 0.3, 1);
        assert!(matches!(solve_randomized(&a, &[1.0, 1.0], &cfg), Err(Error::RankOutOfRange { .. })));
        let a = DenseMatrix::from_diag(&[2.0, 1.0, 0.0]);
        let cfg = SolveConfig::deterministic(2, 0.3).with_r(3);
        assert!(matches!(solve_deterministic(&a, &[1.0; 3], &cfg), Err(Error::RankOutOfRange { k: 2, rank: 2 })));
    }

    #[test]
    fn scatter_examples() {
        let plan = SamplingPlan::new(4, vec![2, 0], vec![1.0, 1.0]).unwrap();
        let s = scatter(&[5.0, 7.0], &plan, 4).unwrap();
        assert_eq!(s.nonzeros(), &[(0, 7.0), (2, 5.0)]);
        let plan = SamplingPlan::new(4, vec![1], vec![2.0]).unwrap();
        assert_eq!(scatter(&[3.0], &plan, 4).unwrap().nonzeros(), &[(1, 6.0)]);
        assert!(scatter(&[3.0, 1.0], &plan, 4).is_err());
        assert!(scatter(&[3.0], &plan, 5).is_err());
    }

    #[test]
    fn scatter_matches_sketch_residual() {
        let mut rng = seeded_stream(4);
        let a = gaussian(9, 7, &mut rng);
        let b: Vec<f64> = gaussian(9, 1, &mut rng).into_vec();
        let plan = SamplingPlan::new(7, vec![5, 1, 5, 3], vec![0.7, 1.3, 0.2, 2.0]).unwrap();
        let merged = plan.merged();
        let c = merged.apply(&a).unwrap();
        let x_r = pseudo_inverse_apply(&svd_default(&c).unwrap(), &b).unwrap();
        let x_hat = scatter(&x_r, &plan, 7).unwrap();
        assert!(x_hat.nnz() <= 3);
        let lhs = residual_norm(&a, &x_hat.densify(), &b).unwrap();
        let rhs = residual_norm(&c, &x_r, &b).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn baselines_examples() {
        let (x, xk) = solve_baselines(&DenseMatrix::identity(2), &[1.0, 2.0], 1).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
        // equal singular values: the lower original index is kept
        assert_eq!(xk.as_slice(), &[1.0, 0.0]);
        let (x, xk) = solve_baselines(&DenseMatrix::from_diag(&[5.0, 1.0]), &[5.0, 1.0], 1).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);
        assert_eq!(xk.as_slice(), &[1.0, 0.0]);
        assert!(solve_baselines(&DenseMatrix::identity(2), &[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn deterministic_is_reproducible() {
        let mut rng = seeded_stream(8);
        let spectrum: Vec<f64> = (0..20).map(|i| 0.7f64.powi(i)).collect();
        let a = with_spectrum(30, 20, &spectrum, &mut rng);
        let b = gaussian(30, 1, &mut rng).into_vec();
        let cfg = SolveConfig::deterministic(2, 0.4).with_r(18);
        let first = solve_deterministic(&a, &b, &cfg).unwrap();
        let second = solve_deterministic(&a, &b, &cfg).unwrap();
        assert_eq!(first, second);
        assert!(first.0.nnz() <= 18);
    }

    #[test]
    fn randomized_is_seed_reproducible() {
        let mut rng = seeded_stream(9);
        let a = gaussian(20, 12, &mut rng);
        let b = gaussian(20, 1, &mut rng).into_vec();
        let cfg = SolveConfig::randomized(2, 0.4, 77).with_r(10);
        let (s1, p1) = solve_randomized(&a, &b, &cfg).unwrap();
        let (s2, p2) = solve_randomized(&a, &b, &cfg).unwrap();
        assert_eq!((s1, p1.clone()), (s2, p2));
        let (_, p3) = solve_randomized(&a, &b, &SolveConfig { seed: Some(78), ..cfg }).unwrap();
        assert_ne!(p1, p3);
    }

    #[test]
    fn randomized_override_may_exceed_n() {
        let mut rng = seeded_stream(10);
        let a = gaussian(12, 6, &mut rng);
        let b = gaussian(12, 1, &mut rng).into_vec();
        let cfg = SolveConfig::randomized(1, 0.4, 3);
        assert!(matches!(solve_randomized(&a, &b, &cfg), Err(Error::Budget { .. })));
        let (x, plan) = solve_randomized(&a, &b, &cfg.with_r(675)).unwrap();
        assert_eq!(plan.len(), 675);
        assert!(x.nnz() <= 6);
    }
}
