use thiserror::Error;

use crate::pruefer::PrueferState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the admissible parameter set.
    #[error("domain error: {0}")]
    Domain(String),

    /// The drift is evaluated at a singular endpoint of its family domain;
    /// the caller should use the regularized start instead.
    #[error("drift of family {family} is singular at t = {t}")]
    Singularity { family: usize, t: f64 },

    #[error("integration failed at t = {}: {reason}", last.t)]
    Integration { reason: String, last: PrueferState },

    #[error("no sign change of the phase residual after {doublings} bracket expansions")]
    BracketNotFound { doublings: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    /// The odd shot for the positive-curvature model stalled, i.e. the
    /// eigenvalue does not exceed the weighted Rayleigh infimum.
    #[error("phase stalled before the singular endpoint at t = {t}: lambda is not above lambda_0")]
    BelowLambda0 { t: f64 },

    #[error("oscillation detector inconclusive: {0}")]
    Inconclusive(String),

    #[error("invalid state: {0}")]
    State(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Singularity { .. })
    }
}
