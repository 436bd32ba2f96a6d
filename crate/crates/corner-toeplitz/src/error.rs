//! Error type shared by every layer of the crate, with a fixed mapping to
//! process exit codes for the CLI.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A region, slope, or model description is malformed.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Membership of a site relative to an irrational boundary line cannot be
    /// decided within the floating-point guard band.
    #[error("ambiguous membership for site ({x}, {y}): within {band:e} of an irrational boundary line")]
    AmbiguousMembership { x: i64, y: i64, band: f64 },

    /// A window or matrix would exceed the configured size cap.
    #[error("size limit exceeded: requested {requested} rows, cap {cap} (set CORNER_TOEPLITZ_MAX_DIM to raise)")]
    SizeLimit { requested: usize, cap: usize },

    /// The operation is not available for the given input class.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The bounded search for a normalizing lattice automorphism ran out.
    #[error("slope normalization failed: no unimodular matrix with entries bounded by {bound}")]
    NormalizationSearchExhausted { bound: i64 },

    /// A symbol required to be invertible on the torus (or on an edge) is not.
    #[error("gapless symbol: {0}")]
    Gapless(String),

    /// Two independent computations of the same integer disagree.
    #[error("method disagreement: {0}")]
    MethodDisagreement(String),

    /// A quantity failed to stabilize across window sizes or grid refinement.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// The near-zero eigenspace failed a structural filter check.
    #[error("eigenmode filter failure: {0}")]
    FilterFailure(String),

    /// An eigensolver or factorization failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code contract: 0 success, 2 validation/precondition failures,
    /// 3 non-convergence or numerical instability.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_)
            | Error::Precondition(_)
            | Error::AmbiguousMembership { .. }
            | Error::SizeLimit { .. }
            | Error::Unsupported(_)
            | Error::NormalizationSearchExhausted { .. }
            | Error::Gapless(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::MethodDisagreement(_)
            | Error::NonConvergence(_)
            | Error::FilterFailure(_)
            | Error::Numerical(_) => 3,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
