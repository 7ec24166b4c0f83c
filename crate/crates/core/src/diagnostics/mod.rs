//! Error metrics, `(p, T)` sweeps and window-limit checks.

mod limits;
mod sweep;

use crate::integrator::Trajectory;
use crate::{Error, Result};

pub use limits::{check_limit_t0, check_limit_tinf, v0_row_sensitivity, T0Report, TinfReport};
pub use sweep::{
    evaluate_cell, exact_baseline, run_error_sweep, run_error_sweep_with_baseline, CellStatus, ErrorMap, SweepCell,
    SweepMeta, SweepSpec,
};

/// Below this the reference norm is treated as zero.
pub const DEGENERATE_REFERENCE: f64 = 1e-30;

/// Relative L2 error of component `component` of `traj` against `reference`,
/// with trapezoidal quadrature on the shared sample grid and the complex
/// modulus of the pointwise difference.
pub fn l2_relative_error(traj: &Trajectory, reference: &Trajectory, component: usize) -> Result<f64> {
    if traj.times.len() != reference.times.len()
        || traj
            .times
            .iter()
            .zip(&reference.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::GridMismatch);
    }
    if component >= traj.width().min(reference.width()) {
        return Err(Error::DimensionMismatch {
            expected: reference.width(),
            actual: component,
        });
    }
    let diff: Vec<f64> = traj
        .component(component)
        .zip(reference.component(component))
        .map(|(a, b)| (a - b).norm_sqr())
        .collect();
    let norm: Vec<f64> = reference.component(component).map(|b| b.norm_sqr()).collect();
    let denom = trapezoid(&reference.times, &norm).sqrt();
    if denom < DEGENERATE_REFERENCE {
        return Err(Error::DegenerateReference);
    }
    Ok(trapezoid(&reference.times, &diff).sqrt() / denom)
}

/// Per-component relative L2 errors.
pub fn l2_relative_errors(traj: &Trajectory, reference: &Trajectory) -> Result<Vec<f64>> {
    (0..reference.width())
        .map(|j| l2_relative_error(traj, reference, j))
        .collect()
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Largest pointwise max-norm difference between two sampled trajectories.
pub fn max_discrepancy(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.times != b.times {
        return Err(Error::GridMismatch);
    }
    let width = a.width().min(b.width());
    Ok(a.states()
        .zip(b.states())
        .flat_map(|(x, y)| x[..width].iter().zip(&y[..width]).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max))
}

/// Largest modulus over all samples and components.
pub fn max_norm(traj: &Trajectory) -> f64 {
    traj.states()
        .flat_map(|s| s.iter().map(|z| z.norm()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, SolverSettings};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rotation(scale: f64) -> Trajectory {
        integrate(
            |_, y, dy| dy[0] = c(0.0, 1.0) * y[0],
            &[c(scale, 0.0)],
            3.0,
            &SolverSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let r = rotation(1.0);
        assert_eq!(l2_relative_error(&r, &r, 0).unwrap(), 0.0);
    }

    #[test]
    fn doubled_reference_has_unit_error() {
        let r = rotation(1.0);
        let doubled = r.map_states(|_, s| s.iter().map(|z| z * 2.0).collect());
        assert!((l2_relative_error(&doubled, &r, 0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_and_mismatched_inputs() {
        let zero = rotation(0.0);
        assert!(matches!(
            l2_relative_error(&zero, &zero, 0),
            Err(Error::DegenerateReference)
        ));
        let r = rotation(1.0);
        let shorter = integrate(
            |_, _, dy| dy[0] = c(0.0, 0.0),
            &[c(1.0, 0.0)],
            2.0,
            &SolverSettings::default(),
        )
        .unwrap();
        assert!(matches!(l2_relative_error(&shorter, &r, 0), Err(Error::GridMismatch)));
        assert!(l2_relative_error(&r, &r, 1).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let t = [0.0, 0.5, 2.0];
        let v = [1.0, 2.0, 5.0];
        assert!((trapezoid(&t, &v) - 6.0).abs() < 1e-15);
    }
}
