use thiserror::Error;

/// Everything that can go wrong while moving a particle around the square.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BilliardError {
    #[error("point ({x}, {y}) is not on the boundary of the unit square")]
    NotOnBoundary { x: f64, y: f64 },

    #[error("state s = {s} lies on a corner of the square")]
    CornerState { s: f64 },

    #[error("invalid state (s = {s}, theta = {theta}): need 0 <= s < 4 and 0 < theta < pi")]
    InvalidState { s: f64, theta: f64 },

    #[error("direction ({dx}, {dy}) does not point into the square")]
    NotInward { dx: f64, dy: f64 },

    #[error("ray leaves the square without a forward boundary crossing")]
    NoExit,

    #[error("trajectory hits the corner near ({x}, {y})")]
    CornerHit { x: f64, y: f64 },

    #[error("exterior arc grazes the boundary tangentially (discriminant {discriminant:e})")]
    TangentGraze { discriminant: f64 },

    #[error("closed-form bounce leaves the side: {quantity} = {value}")]
    OutOfRange { quantity: &'static str, value: f64 },

    #[error("slope {p}/{q} is not in lowest terms with positive p and q")]
    InvalidSlope { p: u64, q: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = BilliardError> = std::result::Result<T, E>;
