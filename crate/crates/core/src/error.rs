use thiserror::Error;

/// Errors raised by the library.
///
/// Out-of-domain conditions carry a short machine-readable `kind` (see
/// [`Error::kind`]) so front ends can report them without string matching.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("parameters out of domain: {0}")]
    OutOfDomain(String),

    #[error("operator is not compact: |s|^2 - |t|^2 - 1 = {discriminant}")]
    NotCompact { discriminant: f64 },

    #[error("kernel exponent overflow: Re(exponent) = {exponent_re} exceeds {limit}")]
    Overflow { exponent_re: f64, limit: f64 },

    #[error("dimension mismatch: expected at most {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Stable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite(_) => "non_finite",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Divergent(_) => "divergent",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::NotCompact { .. } => "not_compact",
            Error::Overflow { .. } => "overflow",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Inconsistent(_) => "inconsistent",
        }
    }

    /// True for errors caused by the caller's parameters lying outside the
    /// region where a quantity is defined.
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Divergent(_)
                | Error::OutOfDomain(_)
                | Error::NotCompact { .. }
                | Error::NonFinite(_)
                | Error::Overflow { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
