use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("resource cap: {what} needs {requested} amplitudes (~{mib} MiB) but the cap is {cap}")]
    ResourceCap {
        what: String,
        requested: u128,
        cap: u128,
        mib: u128,
    },

    #[error("operator is not encodable: it does not lie in the correctable algebra (residual {0:e})")]
    NotEncodable(f64),

    #[error("no logical operator on this support (least-squares residual {0:e})")]
    NoLogicalOperator(f64),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl LabError {
    pub(crate) fn cap(what: impl Into<String>, requested: u128, cap: u128) -> Self {
        LabError::ResourceCap {
            what: what.into(),
            requested,
            cap,
            // 16 bytes per complex amplitude
            mib: requested * 16 / (1 << 20),
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
