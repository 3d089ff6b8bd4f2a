use thiserror::Error;

/// Errors shared by all subsystems.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwistError {
    #[error("element is not elliptic")]
    NotElliptic,

    #[error("angles condition violated: sum(alpha) = {sum} must exceed 2*pi*(n-1) = {bound}")]
    AnglesConditionViolated { sum: f64, bound: f64 },

    #[error("action coordinates lie outside the moment polytope")]
    PolytopeViolation,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("pants angle sum {sum} falls in the forbidden gap (2pi, 4pi)")]
    DichotomyViolated { sum: f64 },

    #[error("holonomy of chain curve {curve} is not elliptic")]
    NotTotallyElliptic { curve: String },

    #[error("representative is not normalized: fixed point of the curve holonomy is not i")]
    NotNormalized,

    #[error("degenerate orbit: {case} (bracket vanishes identically along the orbit)")]
    DegenerateOrbit { case: String },

    #[error("curve has no defining word: {0}")]
    UnsupportedCurve(String),

    #[error("empty sample")]
    EmptySample,

    #[error("integrity failure at step {step}: {what}")]
    IntegrityFailure { step: usize, what: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, TwistError>;
