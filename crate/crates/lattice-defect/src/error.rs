use thiserror::Error;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{func}: argument outside domain ({detail})")]
    Domain { func: &'static str, detail: String },

    #[error("{0}: result overflows the scalar type")]
    Overflow(&'static str),

    #[error("{func}: series not converged after {terms} terms")]
    NonConvergence { func: &'static str, terms: usize },

    #[error("{func}: tolerance {tol:e} not met (error estimate {estimate:e})")]
    Tolerance {
        func: &'static str,
        tol: f64,
        estimate: f64,
    },

    #[error("row recurrence unstable at m = {index}: deviates from direct evaluation by {deviation:e}")]
    Instability { index: usize, deviation: f64 },

    #[error("branch {branch}: cannot bracket a root ({detail})")]
    Bracket { branch: usize, detail: String },

    #[error("band-edge extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
