use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the core crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Operand shapes do not agree.
    DimensionMismatch { op: &'static str, expected: (usize, usize), found: (usize, usize) },
    /// A NaN or infinite value was supplied.
    NonFinite { what: &'static str },
    /// A matrix or vector with a zero dimension where a positive one is required.
    EmptyDimension { what: &'static str },
    /// A scalar argument is outside its admissible range.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// `k` must satisfy `1 <= k < rank`.
    RankOutOfRange { k: usize, rank: usize },
    /// The column budget `r` is not usable for this problem.
    Budget { r: usize, n: usize, reason: &'static str },
    /// Randomized mode was requested without an explicit seed.
    MissingSeed,
    /// Input rows were expected to be orthonormal.
    NotOrthonormal { deviation: f64 },
    /// Jacobi sweeps did not converge within the sweep budget.
    IterationFailure { sweeps: usize },
    /// The barrier shift reached or crossed the smallest eigenvalue.
    BarrierViolation { shift: f64, lambda_min: f64 },
    /// `phi(l + 1, B) - phi(l, B)` was not positive.
    DivisionDegeneracy { difference: f64 },
    /// No column satisfied `U(e_i) <= L(v_i)` at some barrier step.
    InfeasibleStep { step: usize, max_gap: f64 },
    /// The sampled sketch `V_k^T Omega S` lost rank, so the lemma does not apply.
    RankDeficientSketch { sigma_k: f64, threshold: f64 },
    /// A statistical report needs more independent runs.
    TooFewSeeds { got: usize, required: usize },
    /// Inputs to a report do not belong to the same run.
    ParameterMismatch { reason: &'static str },
}

impl Error {
    /// True for errors caused by the caller's input rather than by a numerical
    /// or internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::IterationFailure { .. }
                | Error::BarrierViolation { .. }
                | Error::DivisionDegeneracy { .. }
                | Error::InfeasibleStep { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { op, expected, found } => write!(
                f,
                "{op}: dimension mismatch, expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::NonFinite { what } => write!(f, "{what} contains a non-finite value"),
            Error::EmptyDimension { what } => write!(f, "{what} has a zero dimension"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::RankOutOfRange { k, rank } => {
                write!(f, "rank parameter k = {k} must satisfy 1 <= k < rank = {rank}")
            }
            Error::Budget { r, n, reason } => write!(f, "column budget r = {r} (n = {n}): {reason}"),
            Error::MissingSeed => write!(f, "randomized mode requires an explicit seed"),
            Error::NotOrthonormal { deviation } => {
                write!(f, "rows are not orthonormal (max deviation {deviation:e})")
            }
            Error::IterationFailure { sweeps } => {
                write!(f, "Jacobi iteration did not converge in {sweeps} sweeps")
            }
            Error::BarrierViolation { shift, lambda_min } => {
                write!(f, "barrier shift {shift} is not below the smallest eigenvalue {lambda_min}")
            }
            Error::DivisionDegeneracy { difference } => {
                write!(f, "barrier potential difference {difference:e} is not positive")
            }
            Error::InfeasibleStep { step, max_gap } => {
                write!(f, "no feasible column at barrier step {step} (max L - U gap {max_gap:e})")
            }
            Error::RankDeficientSketch { sigma_k, threshold } => {
                write!(f, "sampled sketch is rank deficient: sigma_k = {sigma_k:e} <= {threshold:e}")
            }
            Error::TooFewSeeds { got, required } => {
                write!(f, "{got} seeds supplied, at least {required} required")
            }
            Error::ParameterMismatch { reason } => write!(f, "parameter mismatch: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
