//! Shared error type for the library crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value; carries the offending key.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    /// χ² fell below the node-singularity cutoff; the positions sit on (or
    /// numerically indistinguishable from) the nodal set.
    #[error("node singularity: chi^2 = {chi2:.3e} below cutoff {cutoff:.3e}")]
    NodeSingularity { chi2: f64, cutoff: f64 },

    /// Requested operator would exceed the sparse-assembly budget.
    #[error(
        "operator budget exceeded: {nnz_estimate} nonzeros > {budget} \
         (use the moments route for large N)"
    )]
    DimensionBudget { nnz_estimate: usize, budget: usize },

    /// Grid box leaves non-negligible ground-state mass outside.
    #[error(
        "grid box too small: ground-state mass outside |u| < {halfwidth} is \
         {mass_outside:.3e} (> 1e-8); increase grid_halfwidth"
    )]
    GridBoxTooSmall { halfwidth: f64, mass_outside: f64 },

    /// Dense eigensolver failed to converge.
    #[error("eigensolver did not converge on a {dim}×{dim} matrix")]
    EigenConvergence { dim: usize },

    /// Monte Carlo pathologies (all samples clipped, too few samples, ...).
    #[error("monte carlo: {0}")]
    MonteCarlo(String),

    /// A derived quantity is statistically indistinguishable from zero and
    /// would be divided by.
    #[error("estimate `{name}` = {value:.3e} ± {std_error:.3e} is consistent with zero")]
    DegenerateEstimate { name: String, value: f64, std_error: f64 },

    /// Mismatched operator/state dimensions or similar caller mistakes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }
}
