use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mass matrix is ill-conditioned (condition {condition:.3e} exceeds cap {cap:.3e})")]
    IllConditioned { condition: f64, cap: f64 },

    #[error("mass matrix is singular to working precision")]
    SingularMass,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("frequency {0} has no entry in the averaging tables")]
    MissingFrequency(f64),

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t} (segment {segment})")]
    NonFiniteState { t: f64, segment: usize },

    #[error("reference signal has (near) zero norm")]
    DegenerateReference,

    #[error("trajectories are sampled on different time grids")]
    GridMismatch,

    #[error("this check requires the 2:1 resonance (freq_ratio = 2), got {freq_ratio}")]
    RequiresResonance { freq_ratio: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::SingularMass
                | Error::StepSizeUnderflow { .. }
                | Error::NonFiniteState { .. }
                | Error::DegenerateReference
        )
    }
}
