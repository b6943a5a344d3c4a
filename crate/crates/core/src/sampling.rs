//! Column sampling plans: the sampling matrix `Omega` and the diagonal
//! rescaling matrix `S`, built either by the deterministic dual-set barrier
//! method or by i.i.d. leverage-score sampling.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::math;
use crate::matrix::DenseMatrix;
use crate::rng::uniform;

/// Orthonormality tolerance for `V^T` inputs (entrywise on `V^T V - I`).
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// An ordered list of selected columns with their rescaling weights.
///
/// Applied to an `m x n` matrix `X`, the plan yields the `m x r` matrix
/// `X Omega S` whose column `t` is `scales[t]` times column `selected[t]` of `X`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingPlan {
    source_dim: usize,
    selected: Vec<usize>,
    scales: Vec<f64>,
}

impl SamplingPlan {
    pub fn new(source_dim: usize, selected: Vec<usize>, scales: Vec<f64>) -> Result<Self> {
        if selected.is_empty() {
            return Err(Error::EmptyDimension { what: "sampling plan" });
        }
        if selected.len() != scales.len() {
            return Err(Error::DimensionMismatch {
                op: "SamplingPlan::new",
                expected: (selected.len(), 1),
                found: (scales.len(), 1),
            });
        }
        if selected.iter().any(|&i| i >= source_dim) {
            return Err(Error::InvalidParameter { name: "selected", reason: "column index out of range" });
        }
        if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "scales",
                reason: "scale factors must be finite and strictly positive",
            });
        }
        Ok(Self { source_dim, selected, scales })
    }

    /// Every column once, with unit scale (`Omega S = I_n`).
    pub fn full(source_dim: usize) -> Result<Self> {
        Self::new(source_dim, (0..source_dim).collect(), vec![1.0; source_dim])
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Number of selections `r`, counting repeats.
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn has_repeats(&self) -> bool {
        let mut seen = vec![false; self.source_dim];
        self.selected.iter().any(|&i| core::mem::replace(&mut seen[i], true))
    }

    /// Collapses repeated indices into one column with scale `sqrt(sum s^2)`.
    ///
    /// Columns keep the order of their first selection. The merge leaves
    /// `X Omega S S^T Omega^T X^T` unchanged for every `X`.
    pub fn merged(&self) -> Self {
        let mut slot: Vec<Option<usize>> = vec![None; self.source_dim];
        let mut selected = Vec::new();
        let mut weight = Vec::new();
        for (&i, &s) in self.selected.iter().zip(&self.scales) {
            match slot[i] {
                Some(p) => weight[p] += s * s,
                None => {
                    slot[i] = Some(selected.len());
                    selected.push(i);
                    weight.push(s * s);
                }
            }
        }
        let scales = weight.into_iter().map(math::sqrt).collect();
        Self { source_dim: self.source_dim, selected, scales }
    }

    /// `X Omega S`.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.source_dim {
            return Err(Error::DimensionMismatch {
                op: "SamplingPlan::apply",
                expected: (x.rows(), self.source_dim),
                found: x.shape(),
            });
        }
        let mut out = x.select_columns(&self.selected);
        for i in 0..out.rows() {
            for (t, s) in self.scales.iter().enumerate() {
                out[(i, t)] *= s;
            }
        }
        Ok(out)
    }

    /// The `n x r` sampling matrix `Omega`.
    pub fn omega(&self) -> DenseMatrix {
        let mut o = DenseMatrix::zeros(self.source_dim, self.len());
        for (t, &i) in self.selected.iter().enumerate() {
            o[(i, t)] = 1.0;
        }
        o
    }

    /// The `r x r` diagonal rescaling matrix `S`.
    pub fn rescaling(&self) -> DenseMatrix {
        DenseMatrix::from_diag(&self.scales)
    }
}

/// Running state of the barrier method: the accumulated `k x k` matrix `B`,
/// the step index and the lower barrier `shift = step - sqrt(r k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierState {
    b_matrix: DenseMatrix,
    step: usize,
    shift: f64,
}

impl BarrierState {
    pub fn new(b_matrix: DenseMatrix, step: usize, r: usize, k: usize) -> Result<Self> {
        if b_matrix.rows() != k || b_matrix.cols() != k {
            return Err(Error::DimensionMismatch {
                op: "BarrierState::new",
                expected: (k, k),
                found: b_matrix.shape(),
            });
        }
        let asym = b_matrix.max_abs_diff(&b_matrix.transpose())?;
        if asym > 1e-12 {
            return Err(Error::InvalidParameter { name: "b_matrix", reason: "not symmetric" });
        }
        Ok(Self { b_matrix, step, shift: barrier_shift(step, r, k) })
    }

    /// `B = 0` at step 0.
    pub fn initial(k: usize, r: usize) -> Self {
        Self { b_matrix: DenseMatrix::zeros(k, k), step: 0, shift: barrier_shift(0, r, k) }
    }

    pub fn b_matrix(&self) -> &DenseMatrix {
        &self.b_matrix
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(symmetric_eigen(&self.b_matrix)?.0.first().copied().unwrap_or(f64::INFINITY))
    }
}

/// `step - sqrt(r k)`.
pub fn barrier_shift(step: usize, r: usize, k: usize) -> f64 {
    step as f64 - math::sqrt((r * k) as f64)
}

/// Eigen-decomposition of `B` shared by all potential evaluations of one step.
struct Spectrum {
    lambda: Vec<f64>,
    q: DenseMatrix,
}

impl Spectrum {
    fn of(b: &DenseMatrix) -> Result<Self> {
        let (lambda, q) = symmetric_eigen(b)?;
        Ok(Self { lambda, q })
    }

    fn lambda_min(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(f64::INFINITY)
    }

    fn check_below(&self, shift: f64) -> Result<()> {
        let lambda_min = self.lambda_min();
        if shift >= lambda_min {
            return Err(Error::BarrierViolation { shift, lambda_min });
        }
        Ok(())
    }

    fn phi(&self, shift: f64) -> Result<f64> {
        self.check_below(shift)?;
        Ok(self.lambda.iter().map(|l| 1.0 / (l - shift)).sum())
    }

    /// Lower potential `L(v)` with the barrier at `shift`; `diff` is
    /// `phi(shift + 1) - phi(shift)`.
    fn lower(&self, v: &[f64], shift: f64, diff: f64) -> Result<f64> {
        let next = shift + 1.0;
        let proj = self.q.tr_matvec(v)?;
        let mut quad2 = 0.0;
        let mut quad1 = 0.0;
        for (c, l) in proj.iter().zip(&self.lambda) {
            let gap = l - next;
            quad1 += c * c / gap;
            quad2 += c * c / (gap * gap);
        }
        Ok(quad2 / diff - quad1)
    }

    fn potential_gap(&self, shift: f64) -> Result<f64> {
        let next = shift + 1.0;
        self.check_below(next)?;
        let diff = self.phi(next)? - self.phi(shift)?;
        if !(diff > 0.0) {
            return Err(Error::DivisionDegeneracy { difference: diff });
        }
        Ok(diff)
    }
}

/// Barrier potential `phi(shift, B) = sum_i 1 / (lambda_i(B) - shift)`.
pub fn phi(shift: f64, b_matrix: &DenseMatrix) -> Result<f64> {
    Spectrum::of(b_matrix)?.phi(shift)
}

/// Lower function
/// `L(v, B, l) = v^T (B - l'I)^-2 v / (phi(l', B) - phi(l, B)) - v^T (B - l'I)^-1 v`
/// with `l = state.shift()` and `l' = l + 1`.
pub fn lower_barrier(v: &[f64], state: &BarrierState) -> Result<f64> {
    let k = state.b_matrix.rows();
    if v.len() != k {
        return Err(Error::DimensionMismatch { op: "lower_barrier", expected: (k, 1), found: (v.len(), 1) });
    }
    if v.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let spectrum = Spectrum::of(&state.b_matrix)?;
    let diff = spectrum.potential_gap(state.shift)?;
    spectrum.lower(v, state.shift, diff)
}

/// Upper function `U(e) = (e^T e / ||E||_F^2) (1 - sqrt(k / r))`.
pub fn upper_function(e: &[f64], residual_fnorm_sq: f64, k: usize, r: usize) -> Result<f64> {
    if r <= k {
        return Err(Error::Budget { r, n: 0, reason: "the budget must exceed k" });
    }
    if !(residual_fnorm_sq > 0.0 && residual_fnorm_sq.is_finite()) {
        return Err(Error::InvalidParameter { name: "residual_fnorm_sq", reason: "must be finite and positive" });
    }
    Ok(math::dot(e, e) / residual_fnorm_sq * (1.0 - math::sqrt(k as f64 / r as f64)))
}

fn check_orthonormal_rows(v_t: &DenseMatrix) -> Result<()> {
    if v_t.rows() == 0 || v_t.rows() > v_t.cols() {
        return Err(Error::NotOrthonormal { deviation: f64::INFINITY });
    }
    let deviation = v_t.orthonormality_defect(true);
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

/// Greedy dual-set sampling. See [`deterministic_sampling_observed`].
pub fn deterministic_sampling(v_t: &DenseMatrix, e: &DenseMatrix, r: usize) -> Result<SamplingPlan> {
    deterministic_sampling_observed(v_t, e, r, |_| {})
}

/// Greedy dual-set sampling of `r` columns of `V^T` (`k x n`, orthonormal rows)
/// and `E` (`m x n`).
///
/// At step `tau` the barrier sits at `l = tau - sqrt(r k)`. Among the columns
/// with `0 < L(v_i) ` and `U(e_i) <= L(v_i)` the one maximizing `L - U` is taken
/// (lowest index on ties), with weight `t = 1 / L(v_i)`, and `B += t v_i v_i^T`.
/// Repeated picks accumulate weight on one column. The returned plan has
/// distinct columns and scales `sqrt(w_i (1 - sqrt(k/r)) / r)` where `w_i` is
/// the accumulated weight, which yields
///
/// * `sigma_k(V^T Omega S) >= 1 - sqrt(k / r)`, and
/// * `||E Omega S||_F <= ||E||_F`.
///
/// `observe` sees the state at the start of every step, after the barrier
/// invariant `lambda_min(B) > l` has been checked.
pub fn deterministic_sampling_observed(
    v_t: &DenseMatrix,
    e: &DenseMatrix,
    r: usize,
    mut observe: impl FnMut(&BarrierState),
) -> Result<SamplingPlan> {
    let (k, n) = v_t.shape();
    if e.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "deterministic_sampling",
            expected: (e.rows(), n),
            found: e.shape(),
        });
    }
    if r <= k {
        return Err(Error::Budget { r, n, reason: "the budget must exceed k" });
    }
    if r > n {
        return Err(Error::Budget { r, n, reason: "the budget must not exceed the column count" });
    }
    check_orthonormal_rows(v_t)?;

    let columns: Vec<Vec<f64>> = (0..n).map(|i| v_t.column(i)).collect();
    let e_norms = e.column_norms_sq();
    let e_total: f64 = e_norms.iter().sum();
    let upper_factor = 1.0 - math::sqrt(k as f64 / r as f64);
    let upper: Vec<f64> =
        e_norms.iter().map(|&en| if e_total > 0.0 { en / e_total * upper_factor } else { 0.0 }).collect();

    let mut state = BarrierState::initial(k, r);
    let mut weight = vec![0.0; n];
    let mut first_pick: Vec<usize> = Vec::new();

    for step in 0..r {
        state.step = step;
        state.shift = barrier_shift(step, r, k);
        let spectrum = Spectrum::of(&state.b_matrix)?;
        spectrum.check_below(state.shift)?;
        observe(&state);
        let diff = spectrum.potential_gap(state.shift)?;

        let mut best: Option<(usize, f64, f64)> = None;
        let mut max_gap = f64::NEG_INFINITY;
        for (i, v) in columns.iter().enumerate() {
            let lower = spectrum.lower(v, state.shift, diff)?;
            let gap = lower - upper[i];
            max_gap = max_gap.max(gap);
            // rounding slack on the feasibility test only
            let slack = 1e-12 * lower.abs().max(upper[i]);
            if lower > 0.0 && gap >= -slack && best.is_none_or(|(_, g, _)| gap > g) {
                best = Some((i, gap, lower));
            }
        }
        let Some((pick, _, lower)) = best else {
            return Err(Error::InfeasibleStep { step, max_gap });
        };
        let t = 1.0 / lower;
        let v = &columns[pick];
        for a in 0..k {
            for b in 0..k {
                state.b_matrix[(a, b)] += t * v[a] * v[b];
            }
        }
        if weight[pick] == 0.0 {
            first_pick.push(pick);
        }
        weight[pick] += t;
    }

    let final_shift = barrier_shift(r, r, k);
    Spectrum::of(&state.b_matrix)?.check_below(final_shift)?;

    let norm = upper_factor / r as f64;
    let scales = first_pick.iter().map(|&i| math::sqrt(weight[i] * norm)).collect();
    SamplingPlan::new(n, first_pick, scales)
}

/// Leverage probabilities `p_i = ||v_i||^2 / k` of the columns of `V^T`.
pub fn leverage_probabilities(v_t: &DenseMatrix) -> Result<Vec<f64>> {
    check_orthonormal_rows(v_t)?;
    let k = v_t.rows() as f64;
    Ok(v_t.column_norms_sq().into_iter().map(|s| s / k).collect())
}

/// `r` i.i.d. draws from the leverage distribution, each with scale
/// `1 / sqrt(p_i r)`. Repeats are kept.
///
/// Draws use inverse-CDF lookup on the cumulative probability table, so a
/// column with `p_i = 0` is never selected.
pub fn random_sampling<R: RngCore + ?Sized>(v_t: &DenseMatrix, r: usize, rng: &mut R) -> Result<SamplingPlan> {
    if r == 0 {
        return Err(Error::Budget { r, n: v_t.cols(), reason: "at least one sample is required" });
    }
    let probs = leverage_probabilities(v_t)?;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let last_positive = probs.iter().rposition(|&p| p > 0.0).expect("rows are orthonormal");
    let mut selected = Vec::with_capacity(r);
    let mut scales = Vec::with_capacity(r);
    for _ in 0..r {
        let target = uniform(rng) * acc;
        let idx = cumulative.partition_point(|&c| c <= target).min(last_positive);
        selected.push(idx);
        scales.push(1.0 / math::sqrt(probs[idx] * r as f64));
    }
    SamplingPlan::new(probs.len(), selected, scales)
}
