use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested function.
    #[error("{func}: argument out of domain: {detail}")]
    Domain { func: &'static str, detail: String },

    /// An iterative or adaptive routine exhausted its budget.
    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    /// A formula produced a value that is not representable or violates a
    /// structural guarantee (negative variance, vanishing denominator).
    #[error("numerical failure in {what}: {detail}")]
    Numerical { what: &'static str, detail: String },

    /// A simulation needed more work than its configured cap allows.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// A requested time is missing from a sampled grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Not enough usable observations for an estimate or a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Sample variance is zero where a correlation needs it.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { func, detail: detail.into() }
    }

    pub(crate) fn numerical(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical { what, detail: detail.into() }
    }

    /// True for errors caused by invalid caller input rather than by the
    /// numerics or the simulation budget.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::GridMismatch(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
