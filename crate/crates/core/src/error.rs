use thiserror::Error;

/// Errors raised by the geometry and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points do not span the ambient space (affine rank {rank} < {dim})")]
    DegenerateInput { rank: usize, dim: usize },
    #[error("hull is lower dimensional")]
    DegenerateHull,
    #[error("cap depth must be positive, got {0}")]
    InvalidDepth(f64),
    #[error("point lies on the boundary of the polytope")]
    BoundaryPoint,
    #[error("level {s} is not bracketed: v at the centroid is {v_center}")]
    LevelNotBracketed { s: f64, v_center: f64 },
    #[error("level {s} exceeds the maximum of v ({v_max})")]
    LevelTooHigh { s: f64, v_max: f64 },
    #[error("level {s} exceeds s0 = (2d)^(-2d) = {s0}")]
    AboveS0 { s: f64, s0: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("cell invariant {invariant} violated at {point:?}")]
    CellInvariantViolated { invariant: u8, point: Vec<f64> },
    #[error("Poisson intensity must be positive, got {0}")]
    InvalidIntensity(f64),
    #[error("sample variance is zero")]
    ZeroVariance,
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("need at least {needed} replications, got {got}")]
    InsufficientReplications { needed: usize, got: usize },
    #[error("need at least {needed} conditioned replications, got {got}")]
    InsufficientConditioned { needed: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Coarse error classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Geometry,
    Precondition,
    Runtime,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Parse(_) => ErrorKind::Parse,
            DegenerateInput { .. }
            | DegenerateHull
            | BoundaryPoint
            | LevelNotBracketed { .. }
            | CellInvariantViolated { .. } => ErrorKind::Geometry,
            InvalidDepth(_)
            | LevelTooHigh { .. }
            | AboveS0 { .. }
            | PreconditionViolated(_)
            | InvalidIntensity(_)
            | InvalidSigma(_)
            | InsufficientReplications { .. }
            | InsufficientConditioned { .. } => ErrorKind::Precondition,
            ZeroVariance | Io(_) => ErrorKind::Runtime,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
