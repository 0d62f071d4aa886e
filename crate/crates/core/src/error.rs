use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("capacity exceeded: {what} = {requested} (max {max})")]
    Capacity {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The analytically continued Verma trace has a pole at ω = ±1.
    #[error("pole of the continued trace at ω = {omega}")]
    Pole { omega: Complex64 },

    #[error("root finding failed: max backward error {max_residual:e}")]
    RootFinding {
        max_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("degenerate spectrum: eigenvalue separation {separation:e} below resolution")]
    DegenerateSpectrum { separation: f64 },

    #[error("no Wronskian solution matches eigenvector {index} (best deviation {best:e})")]
    UnmatchedEigenvector { index: usize, best: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("branch tracking failed at ω = {last_good}: {reason}")]
    BranchTracking { last_good: Complex64, reason: String },

    #[error("incomplete solution set: found {found} of {expected}")]
    IncompleteSet { expected: usize, found: usize },

    #[error("unstable ω → 1 limit: extrapolants disagree by {disagreement:e}")]
    UnstableLimit { disagreement: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
}
