use thiserror::Error;

/// Errors raised by the lattice-energy and transition machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the admissible domain of an operation.
    #[error("parameter domain error: {0}")]
    Domain(String),

    /// Two operands disagree on a structural property (e.g. series order).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("quadrature failed to converge: estimated error {error:e} exceeds tolerance {tolerance:e}")]
    Quadrature { error: f64, tolerance: f64 },

    /// The function has no sign change on the supplied interval.
    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// The direct lattice sum is only defined for absolutely summable potentials.
    #[error("unsupported oracle: {0}")]
    UnsupportedOracle(String),

    #[error("minimum search failed: {0}")]
    Search(String),

    /// A transition could not be classified (e.g. no energy barrier found).
    #[error("classification error: {0}")]
    Classification(String),

    /// A least-squares fit fell below the acceptance threshold.
    #[error("poor fit: r^2 = {r_squared} (residuals {residuals:?})")]
    PoorFit { r_squared: f64, residuals: Vec<f64> },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Contract(_) | Error::UnsupportedOracle(_) => 2,
            Error::Quadrature { .. } | Error::Bracket { .. } | Error::Search(_) => 3,
            Error::Classification(_) | Error::PoorFit { .. } => 3,
            Error::NonConvergence(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
