//! JSON run reports.

use serde::{Deserialize, Serialize};
use sparse_lsq_core::bounds::{BoundReport, SeedOutcome};
use sparse_lsq_core::solver::Mode;

use crate::generate::Metadata;

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: &str = "1";

/// Which verification suites a run evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Structural,
    Theorem1,
    Theorem2,
    Lemmas,
    All,
}

impl Suite {
    pub fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputEcho {
    Files { matrix: String, vector: String },
    Generated { metadata: Metadata },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub k: usize,
    pub epsilon: f64,
    pub mode: Mode,
    pub seed: Option<u64>,
    /// Budget used by the main solve.
    pub r: usize,
    /// Budget the mode's guarantee is stated for.
    pub r_theorem: usize,
    pub r_override: Option<usize>,
    pub suite: Option<Suite>,
    /// Seeds used by the randomized theorem suite.
    pub seeds: usize,
    /// Trials used by the lemma suite.
    pub trials: usize,
    pub input: InputEcho,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub m: usize,
    pub n: usize,
    pub numerical_rank: usize,
    pub sigma_k: f64,
    /// `||A - A_k||_F`.
    pub residual_fnorm: f64,
    pub b_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// `||A x* - b||` with `x* = A^+ b`.
    pub min_norm_residual: f64,
    /// `||A x_k* - b||` with `x_k* = A_k^+ b`.
    pub truncated_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    /// `||A x_hat - b||`.
    pub residual: f64,
    pub nnz: usize,
    pub budget_r: usize,
    pub nonzeros: Vec<(usize, f64)>,
    pub selected: Vec<usize>,
    pub scales: Vec<f64>,
}

/// Wall-clock milliseconds; informative only, never compared.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub factorization_ms: f64,
    pub solve_ms: f64,
    pub suites_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub config: ConfigEcho,
    pub problem: ProblemSummary,
    pub baselines: Baselines,
    pub solution: SolutionSummary,
    pub reports: Vec<BoundReport>,
    /// Per-seed outcomes of the randomized theorem suite.
    pub seed_outcomes: Vec<SeedOutcome>,
    /// False when any asserted inequality failed.
    pub all_asserted_hold: bool,
    pub timings: Timings,
}

impl RunReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn report(&self, name: &str) -> Option<&BoundReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}
