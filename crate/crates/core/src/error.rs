use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("not a property: {0}")]
    InvalidProperty(String),

    #[error("not a state: {0}")]
    InvalidState(String),

    #[error("Hilbert-Schmidt norm {norm} is not 1")]
    NotNormalized { norm: f64 },

    #[error("zero matrix cannot be normalized")]
    ZeroMatrix,

    #[error("invalid system dimensions: {0}")]
    InvalidDims(String),

    #[error("product property violates the {0} nontriviality convention")]
    Nontriviality(&'static str),

    #[error("seed family spans the zero space")]
    EmptySpan,

    #[error("requested {requested} lattice members but the space has dimension {available}")]
    TooManyMembers { requested: usize, available: usize },

    #[error("transformation is not trace non-increasing (largest eigenvalue of ΣK†K is {largest})")]
    NotTraceNonIncreasing { largest: f64 },

    #[error("transformation must have at least one Kraus operator")]
    NoKraus,

    #[error("repeatability needs a square map, got {d_in} -> {d_out}")]
    NonSquareMap { d_in: usize, d_out: usize },

    #[error("not a property-type transformation: {0}")]
    NotPropertyTransformation(String),

    #[error("invalid search configuration: {0}")]
    InvalidSearchConfig(String),
}

impl Error {
    pub(crate) fn mismatch(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }
}
