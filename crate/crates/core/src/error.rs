use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid spacing {spacing} exceeds a quarter of the mollifier radius {radius}")]
    Resolution { spacing: f64, radius: f64 },

    #[error("particle {index} at ({x}, {y}) has mollifier support crossing the box boundary")]
    ClippedParticle { index: usize, x: f64, y: f64 },

    #[error("trajectories differ in {0}")]
    MismatchedTrajectories(&'static str),

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("{species} density integrates to zero but its circulation is positive")]
    UnnormalizableDensity { species: &'static str },

    #[error("CFL number {cfl:.4} exceeds 0.5 at t = {time}")]
    CflViolation { cfl: f64, time: f64 },

    #[error("gamma * q' = {product} must exceed 1")]
    ConditionViolation { product: f64 },

    #[error("boundary-band mass fraction {fraction:.3e} exceeds {tolerance:.1e} at t = {time}")]
    BoundaryMass {
        fraction: f64,
        tolerance: f64,
        time: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("inadmissible parameters: {inequality} fails ({lhs} vs {rhs})")]
    Admissibility {
        inequality: String,
        lhs: f64,
        rhs: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
