use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("unknown local operator kind `{0}`")]
    UnknownOperator(String),

    #[error("operator `{kind}` is not defined for local dimension {local_dim}")]
    IncompatibleLocalDim { kind: String, local_dim: usize },

    #[error("site {site} out of range for L = {len}")]
    SiteOutOfRange { site: usize, len: usize },

    #[error("site {site} wraps around the chain but the boundary is open")]
    WrapUnderOpenBoundary { site: usize },

    #[error("site {0} appears more than once")]
    DuplicateSite(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator has inter-sector elements of size {0:e}")]
    SectorViolation(f64),

    #[error("unknown magnetization sector {0}")]
    UnknownSector(i32),

    #[error("iterative solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("random commutant element had degenerate eigenvalues after {0} attempts")]
    DegenerateCommutantElement(usize),

    #[error("invalid irrep block ({block}, {copy})")]
    InvalidBlock { block: usize, copy: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("model `{model}` requires parameter `{param}`")]
    MissingParameter { model: String, param: String },

    #[error("model `{model}` needs L >= {min}, got {len}")]
    ChainTooShort { model: String, min: usize, len: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not a singlet: generator `{0}` fails")]
    NotASinglet(String),

    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),

    #[error("jump probability {0} exceeds 1; reduce dt")]
    ProbabilityOverflow(f64),

    #[error("projector is not in the commutant (residual {0:e})")]
    NotInCommutant(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
