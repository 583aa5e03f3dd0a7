//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Rejected input: malformed words, bad probabilities, out-of-range
    /// parameters, inconsistent dimensions.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A probability vector failed validation (negative mass, bad sum).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// An exact computation would exceed the caller-supplied memory budget.
    /// Callers may fall back to Monte Carlo estimation.
    #[error("memory budget exceeded in {context}: needs ~{needed_mb} MiB, budget {budget_mb} MiB")]
    BudgetExceeded {
        context: &'static str,
        needed_mb: u64,
        budget_mb: u64,
    },

    /// Folding did not stabilize: two successive conjugator bounds kept
    /// changing the requested ball up to the configured maximum bound.
    #[error("unstable ball: folding at radius {radius} still changing at conjugator bound {max_bound}")]
    UnstableBall { radius: usize, max_bound: usize },

    /// An internal consistency assertion failed; indicates a bug.
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
