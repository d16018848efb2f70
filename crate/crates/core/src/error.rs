use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is singular")]
    Singular,

    #[error("operator is not block-diagonal with respect to g = k + p")]
    NotBlockDiagonal,

    #[error("operator violates ad(k)-compatibility (residual {0:e})")]
    Incompatible(f64),

    #[error("rescaling factor must be nonzero")]
    ZeroScale,

    #[error("invalid homogeneous point: {0}")]
    InvalidPoint(String),

    #[error("malformed bracket input: {0}")]
    Malformed(String),

    #[error("scalar curvature vanishes, scalar-curvature normalization is undefined")]
    ZeroScalarCurvature,

    #[error("p-part of the bracket vanishes, bracket-norm normalization is undefined")]
    ZeroBracketNorm,

    #[error("Ricci-norm normalization is realised by reparametrizing an unnormalized run")]
    RequiresReparametrization,

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("validity drift at t = {t}: relative Jacobi residual {residual:e}")]
    ValidityDrift { t: f64, residual: f64 },

    #[error("time {t} lies outside the trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("initial point is flat")]
    FlatInitialPoint,

    #[error("integration exceeded {0} steps")]
    StepLimit(usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("family has no concrete structure-constant realization")]
    NoRealization,

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("trajectory does not hold {0} states")]
    WrongLayout(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
