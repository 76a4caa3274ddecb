use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Prior hyperparameters are invalid for the requested computation.
    #[error("hyperparameter out of range: {0}")]
    HyperparameterOutOfRange(String),

    /// The data admit no Bayes factor (all observations identical, W_T = 0).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (log value {log_value:.6e}, log error bound {log_error:.6e})"
    )]
    QuadratureFailure {
        subdivisions: u32,
        log_value: f64,
        log_error: f64,
    },

    /// The integrand produced a NaN.
    #[error("integrand returned NaN at u = {0}")]
    IntegrandNan(f64),

    /// CSV groups do not all have the same number of observations.
    #[error("unbalanced data: {0}")]
    UnbalancedData(String),

    /// Fewer than two groups in the input.
    #[error("too few groups: {0}")]
    TooFewGroups(String),

    /// Fewer than two observations per group.
    #[error("too few replicates: {0}")]
    TooFewReplicates(String),

    /// A CSV row that does not follow the `group,value` contract.
    #[error("malformed row at line {line}: {message}")]
    MalformedRow { line: usize, message: String },

    /// A request that has no defined answer (e.g. a deterministic limit that
    /// does not exist).
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
}

impl Error {
    /// Stable machine-readable tag for each error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "Domain",
            Error::HyperparameterOutOfRange(_) => "HyperparameterOutOfRange",
            Error::DegenerateData(_) => "DegenerateData",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::IntegrandNan(_) => "IntegrandNan",
            Error::UnbalancedData(_) => "UnbalancedData",
            Error::TooFewGroups(_) => "TooFewGroups",
            Error::TooFewReplicates(_) => "TooFewReplicates",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::InvalidCombination(_) => "InvalidCombination",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
