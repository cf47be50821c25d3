//! Error type shared across the crate, with process exit codes for the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("integrator produced non-finite entries at t = {t}")]
    NonFinite { t: f64 },

    #[error(
        "Fock truncation failed to converge below n_max = {limit}: \
         top-level population reached {max_population:.3e} (threshold {threshold:.1e})"
    )]
    TruncationNotConverged {
        limit: usize,
        max_population: f64,
        threshold: f64,
    },

    #[error("survival probability vanished after measurement {n}")]
    ZeroSurvival { n: usize },

    #[error(
        "total average rate identity violated: direct {direct:.17e} vs summed {summed:.17e} \
         (tolerance {tol:.1e})"
    )]
    RateIdentityViolated { direct: f64, summed: f64, tol: f64 },

    #[error("quadrature did not reach tolerance {tol:.1e} (estimated error {err:.3e})")]
    Quadrature { err: f64, tol: f64 },

    #[error("convergence check failed: {0}")]
    ConvergenceCheck(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 0 success, 2 config error,
    /// 3 convergence failure, 4 engine failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => 2,
            Error::TruncationNotConverged { .. } | Error::ConvergenceCheck(_) => 3,
            Error::DimensionMismatch(_)
            | Error::NonFinite { .. }
            | Error::ZeroSurvival { .. }
            | Error::RateIdentityViolated { .. }
            | Error::Quadrature { .. }
            | Error::Io(_) => 4,
        }
    }

    /// Short machine-readable kind tag used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Config(_) => "config",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::TruncationNotConverged { .. } => "truncation_not_converged",
            Error::ZeroSurvival { .. } => "zero_survival",
            Error::RateIdentityViolated { .. } => "rate_identity_violated",
            Error::Quadrature { .. } => "quadrature",
            Error::ConvergenceCheck(_) => "convergence_check",
            Error::Io(_) => "io",
        }
    }
}
