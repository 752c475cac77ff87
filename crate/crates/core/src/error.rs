use thiserror::Error;

/// Failures surfaced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("point outside window: {0:?}")]
    OutsideWindow(Vec<f64>),

    #[error("point on or outside the unit circle: {0:?}")]
    OutsideUnitDisc(Vec<f64>),

    #[error("pattern is not simple: coincident points at {0:?}")]
    NotSimple(Vec<f64>),

    #[error("incompatible patterns: {0}")]
    Incompatible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("selector matched no point: {0}")]
    EmptySelection(String),

    #[error("failed to draw a non-colliding point after {0} attempts")]
    Collision(usize),

    #[error("equidistant tie: distances {0} and {1} agree within relative tolerance")]
    Tie(f64, f64),

    #[error("too many points requested: {0}")]
    TooManyPoints(f64),

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("contour passes too close to a zero at radius {0}")]
    ContourTooClose(f64),

    #[error("truncation criterion unsatisfiable: {0}")]
    Truncation(String),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("sum does not converge: {0}")]
    Divergent(String),

    #[error("sampler exhausted: {0}")]
    Exhausted(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
