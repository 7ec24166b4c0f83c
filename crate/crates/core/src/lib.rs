//! Higher-order phase averaging for quadratically nonlinear, highly
//! oscillatory ODE systems.
//!
//! A system `dU/dt = L U + N(U, U)` with purely imaginary diagonal `L` is
//! rewritten in the modulated variable `V = exp(-tL) U`, whose right-hand side
//! decomposes into resonant terms `F_m(V, V) exp(i c_m t)`. The phase-shifted
//! solution family `V(t, s)` is projected onto degree-`p` polynomials in `s`
//! under a Gaussian weight of width `T`, which yields a coupled system for the
//! coefficients `V_0 ... V_p`. All phase integrals are evaluated in closed form.
//!
//! Layout:
//!
//! * [`averaging`]: Gaussian moments, the mass matrix, shifted moments and the
//!   assembled averaged right-hand side.
//! * [`model`]: the resonant-quadratic model abstraction and the swinging
//!   spring.
//! * [`integrator`]: adaptive Dormand–Prince 5(4) stepping with exact sample
//!   times and periodic resetting of the higher coefficients.
//! * [`diagnostics`]: L2 error metrics, parallel `(p, T)` sweeps and the
//!   small/large window limit checks.
//! * [`config`], [`io`], [`cli`]: run configuration, CSV/manifest output and the
//!   command-line driver.

pub mod averaging;
pub mod cli;
pub mod config;
pub mod diagnostics;
mod error;
pub mod integrator;
pub mod io;
pub mod model;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use averaging::{
    assemble_averaged_rhs, build_tables, gaussian_moment, shifted_moment, AveragingConfig, AveragingTables,
    StackedState,
};
pub use diagnostics::{l2_relative_error, run_error_sweep, ErrorMap};
pub use integrator::{integrate, integrate_with_reset, SolverSettings, Trajectory};
pub use model::{ResonantQuadraticModel, ResonantTerm, SpringParams};
