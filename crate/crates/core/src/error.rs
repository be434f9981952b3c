use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ambient space must have dimension at least 1")]
    EmptyAmbient,

    #[error("subspaces live in different ambient spaces (dim {left} vs dim {right})")]
    AmbientMismatch { left: usize, right: usize },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("basis columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("law not applicable: {0}")]
    LawNotApplicable(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("parts {i} and {j} are not orthogonal (overlap {overlap:.3e})")]
    NotOrthogonal { i: usize, j: usize, overlap: f64 },

    #[error("quadrature exactness degree {available} is below the required {required}")]
    InsufficientQuadrature { required: usize, available: usize },

    #[error("homogeneous coordinates must not both vanish")]
    ZeroPoint,

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("group action {action} does not match the space: {reason}")]
    ActionMismatch { action: String, reason: String },

    #[error("overlapping or non-covering regions: {0}")]
    InvalidPartition(String),

    #[error("partition has {regions} regions but {samples} sample points")]
    MissingSamples { regions: usize, samples: usize },

    #[error("the semiclassical parameter k must be positive")]
    ZeroK,

    #[error("power-law fit needs at least 3 positive samples, found {found}")]
    TooFewSamples { found: usize },

    #[error("input is not smooth: {0}")]
    NonSmooth(String),

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
