//! Error types shared by all solvers.

use thiserror::Error;

/// Errors raised by parameter validation, steady-state solvers, spectra and
/// fitting routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A field of a parameter container violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Vector lengths of modes, states or grids do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The requested operation is only valid in a restricted parameter
    /// regime (e.g. vacuum inputs, zero bath occupations) and the inputs
    /// fall outside of it.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Division by zero in a closed-form expression (lossless dot,
    /// vanishing cooperativity, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// No pump rate can invert the lasing transition; the configuration
    /// cannot amplify.
    #[error("unamplifiable configuration: {0}")]
    NoThreshold(String),

    /// A bracketing root search found no sign change.
    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    /// An iterative solver exhausted its budget.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// The Newton linear solve hit a singular Jacobian.
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    /// The stationary inversion reaches a gain threshold, the stationary
    /// photon number diverges and the fixed-point branch ceases to exist.
    #[error("clamping violation: {0}")]
    ClampingViolation(String),

    /// Per-mode gain exceeds the external loss; the stationary spectrum is
    /// undefined (lasing-like divergence).
    #[error("stationary spectrum undefined: {0}")]
    Instability(String),

    /// A frequency grid is empty or not strictly increasing.
    #[error("grid error: {0}")]
    Grid(String),

    /// The data carry no usable structure for a fit (constant samples,
    /// all zeros, too few points).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The forward model cannot reproduce the data anywhere near the
    /// requested parameters.
    #[error("fit infeasible: {0}")]
    FitInfeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
