//! Gaussian phase averaging onto polynomials in the phase shift.

pub mod moments;
mod rhs;
pub mod tables;

pub use moments::{damping_factor, gaussian_moment, shifted_moment};
pub use rhs::{assemble_averaged_rhs, AveragedRhs, StackedState};
pub use tables::{build_tables, AveragingConfig, AveragingTables, DEFAULT_CONDITION_CAP, MAX_DEGREE};
