use thiserror::Error;

/// Failure modes shared across the crate.
///
/// `InvalidInput` covers precondition violations (bad parameters, mismatched
/// lengths, inadequate grids); the remaining variants are genuine numerical
/// failures that callers may want to distinguish.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("energy increased along the flow and {halvings} step halvings did not cure it")]
    EnergyIncrease { halvings: usize },

    #[error("solvability violated: |<xi_1, rhs>| = {inner:.3e} exceeds {tol:.3e} (upstream formula error)")]
    SolvabilityViolation { inner: f64, tol: f64 },

    #[error("solution deviates from the expected polynomial form by {residual:.3e} (tol {tol:.1e})")]
    NonPolynomial { residual: f64, tol: f64 },

    #[error("grid too small: {mass:.3e} of the ground-state mass sits within 3 nodes of the boundary")]
    GridTooSmall { mass: f64 },

    #[error("nonnegativity violated: minimum value {min:.3e} below -1e-10")]
    NegativeDensity { min: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
