use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Operation needs a density (or another analytic handle) the model kind lacks.
    #[error("unsupported model kind for {op}: {kind}")]
    UnsupportedKind { op: &'static str, kind: String },

    /// Model construction violated an invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Quadrature did not reach the requested tolerance.
    #[error("quadrature failed to converge: achieved error {achieved:e}, requested {requested:e}")]
    NonIntegrable { achieved: f64, requested: f64 },

    /// Argument outside the domain of the function or grid.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// No grid point with a finite generating-function value.
    #[error("empty domain: {0}")]
    EmptyDomain(String),

    /// Exponent outside the hypothesis of the inequality (q >= 2 required).
    #[error("domain error: {0}")]
    DomainError(String),

    /// No feasible value below the search cap (the variable is not in B(phi)).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Plug-in moment of order p is noise-dominated for the sample size.
    #[error("empirical moment p={p} refused: exceeds log2(count)={max_p:.2}")]
    UnreliableMoment { p: f64, max_p: f64 },

    /// Fitted tail exponent is inconsistent with the declared family.
    #[error("family mismatch: fitted exponent {fitted:.3} vs declared {declared:.3} (tolerance {tolerance})")]
    FamilyMismatch {
        fitted: f64,
        declared: f64,
        tolerance: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
