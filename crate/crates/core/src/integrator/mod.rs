//! Adaptive time integration of complex ODE systems.
//!
//! Output is sampled at exact multiples of `sample_dt`: steps are clipped so
//! that every sample time is a step endpoint, no interpolation is involved.

mod dopri;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::averaging::{AveragedRhs, AveragingTables, StackedState};
use crate::model::ResonantQuadraticModel;
use crate::{Error, Result};

use dopri::Stepper;

/// Default relative and absolute tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1.49012e-8;
pub const DEFAULT_SAMPLE_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub sample_dt: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_TOLERANCE,
            atol: DEFAULT_TOLERANCE,
            max_step: None,
            initial_step: None,
            sample_dt: DEFAULT_SAMPLE_DT,
        }
    }
}

impl SolverSettings {
    pub fn with_tolerance(self, tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let mut problems = Vec::new();
        if !positive(self.rtol) {
            problems.push(format!("rtol must be positive (got {})", self.rtol));
        }
        if !positive(self.atol) {
            problems.push(format!("atol must be positive (got {})", self.atol));
        }
        if !positive(self.sample_dt) {
            problems.push(format!("sample_dt must be positive (got {})", self.sample_dt));
        }
        if let Some(h) = self.max_step.filter(|h| !positive(*h)) {
            problems.push(format!("max_step must be positive (got {h})"));
        }
        if let Some(h) = self.initial_step.filter(|h| !positive(*h)) {
            problems.push(format!("initial_step must be positive (got {h})"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// Sampled solution.
///
/// `states` holds `width` leading components per sample. For averaged runs
/// that is `V_0`; `higher_norms` then records, per sample, the max-norm of
/// the coefficient blocks that were integrated but not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    width: usize,
    states: Vec<Complex64>,
    pub higher_norms: Vec<f64>,
    pub stats: SolverStats,
    pub reset_times: Vec<f64>,
}

impl Trajectory {
    fn new(width: usize) -> Self {
        Self {
            times: Vec::new(),
            width,
            states: Vec::new(),
            higher_norms: Vec::new(),
            stats: SolverStats::default(),
            reset_times: Vec::new(),
        }
    }

    fn record(&mut self, t: f64, y: &[Complex64]) {
        self.times.push(t);
        self.states.extend_from_slice(&y[..self.width]);
        let higher = y[self.width..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.higher_norms.push(higher);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of stored components per sample.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn state(&self, i: usize) -> &[Complex64] {
        &self.states[i * self.width..(i + 1) * self.width]
    }

    pub fn states(&self) -> impl Iterator<Item = &[Complex64]> {
        self.states.chunks_exact(self.width)
    }

    pub fn component(&self, j: usize) -> impl Iterator<Item = Complex64> + '_ {
        self.states.iter().skip(j).step_by(self.width).copied()
    }

    pub fn last_state(&self) -> Option<&[Complex64]> {
        (!self.is_empty()).then(|| self.state(self.len() - 1))
    }

    /// Peak of [`higher_norms`](Self::higher_norms).
    pub fn higher_block_peak(&self) -> f64 {
        self.higher_norms.iter().copied().fold(0.0, f64::max)
    }

    /// First sample time at which the unstored blocks exceed `threshold`.
    pub fn first_exceedance(&self, threshold: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.higher_norms)
            .find(|(_, n)| **n > threshold)
            .map(|(t, _)| *t)
    }

    /// Applies `f(t, state)` to every sample, e.g. to back-transform.
    pub fn map_states<F>(&self, mut f: F) -> Self
    where
        F: FnMut(f64, &[Complex64]) -> Vec<Complex64>,
    {
        let mut out = self.clone();
        out.states.clear();
        for (t, s) in self.times.iter().zip(self.states()) {
            let mapped = f(*t, s);
            debug_assert_eq!(mapped.len(), self.width);
            out.states.extend(mapped);
        }
        out
    }
}

/// Sample grid `0, dt, 2dt, ...` up to `t_final`, with `t_final` appended when
/// it is not itself a grid point.
pub fn sample_times(t_final: f64, dt: f64) -> Vec<f64> {
    let n = (t_final / dt + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let last = *times.last().expect("grid starts at zero");
    if t_final - last > 1e-9 * dt {
        times.push(t_final);
    }
    times
}

fn check_horizon(t_final: f64, settings: &SolverSettings) -> Result<()> {
    settings.validate()?;
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "final time must be finite and positive (got {t_final})"
        )));
    }
    Ok(())
}

/// Integrates `y' = rhs(t, y)` from `t = 0` and samples every component.
pub fn integrate<F>(rhs: F, y0: &[Complex64], t_final: f64, settings: &SolverSettings) -> Result<Trajectory>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    check_horizon(t_final, settings)?;
    drive(rhs, y0, y0.len(), t_final, None, settings)
}

/// Integrates the stacked averaged system from `V_0 = y0`, higher blocks zero,
/// zeroing `V_1 ..= V_p` every `reset_dt` seconds. Returns the `V_0` samples.
///
/// `reset_dt` may be infinite (no resets). For `p = 0` there is nothing to
/// reset and the run is identical to a plain [`integrate`] of the `p = 0`
/// system.
pub fn integrate_with_reset(
    model: &ResonantQuadraticModel,
    tables: &AveragingTables,
    y0: &[Complex64],
    t_final: f64,
    reset_dt: f64,
    settings: &SolverSettings,
) -> Result<Trajectory> {
    check_horizon(t_final, settings)?;
    if reset_dt.is_nan() || reset_dt <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "reset interval must be positive (got {reset_dt})"
        )));
    }
    if y0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: y0.len(),
        });
    }
    let mut rhs = AveragedRhs::new(model, tables)?;
    let initial = StackedState::initial(y0, tables.degree() + 1);
    let reset = (tables.degree() > 0 && reset_dt.is_finite()).then_some(reset_dt);
    drive(
        |t, y, dy| rhs.eval(t, y, dy),
        initial.as_slice(),
        model.dim(),
        t_final,
        reset,
        settings,
    )
}

fn drive<F>(
    rhs: F,
    y0: &[Complex64],
    width: usize,
    t_final: f64,
    reset_dt: Option<f64>,
    settings: &SolverSettings,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let samples = sample_times(t_final, settings.sample_dt);
    let mut traj = Trajectory::new(width);
    let mut stepper = Stepper::new(rhs, y0, t_final, settings);
    traj.record(0.0, &stepper.y);

    let mut resets = 1usize;
    let next_reset = |n: usize| reset_dt.map(|dt| n as f64 * dt).filter(|&r| r < t_final);

    let mut i = 1;
    while i < samples.len() {
        let sample = samples[i];
        let (target, is_sample, is_reset) = match next_reset(resets) {
            Some(r) if (r - sample).abs() <= 1e-9 * sample.max(1.0) => (sample, true, true),
            Some(r) if r < sample => (r, false, true),
            _ => (sample, true, false),
        };
        let result = stepper.advance_to(target);
        traj.stats = stepper.stats;
        result?;
        if is_sample {
            traj.record(target, &stepper.y);
            i += 1;
        }
        if is_reset {
            stepper.y[width..]
                .iter_mut()
                .for_each(|z| *z = Complex64::new(0.0, 0.0));
            stepper.restart();
            stepper.segment += 1;
            traj.reset_times.push(target);
            resets += 1;
        }
    }
    traj.stats = stepper.stats;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::{build_tables, AveragingConfig};
    use crate::model::{initial_state, swing_spring_model, SpringParams};
    use crate::model::{DEFAULT_POSITIONS, DEFAULT_VELOCITIES};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sample_grid() {
        let g = sample_times(1.0, 0.25);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = sample_times(1.1, 0.25);
        assert_eq!(*g.last().unwrap(), 1.1);
        assert_eq!(g.len(), 6);
        let g = sample_times(167.0, 0.01);
        assert_eq!(g.len(), 16701);
        assert_eq!(g[16700], 167.0);
    }

    #[test]
    fn rotation_returns_to_start() {
        let settings = SolverSettings::default();
        let tf = 2.0 * std::f64::consts::PI;
        let traj = integrate(|_, y, dy| dy[0] = c(0.0, -1.0) * y[0], &[c(1.0, 0.0)], tf, &settings).unwrap();
        let end = traj.last_state().unwrap()[0];
        assert_eq!(*traj.times.last().unwrap(), tf);
        assert!((end - c(1.0, 0.0)).norm() < 10.0 * settings.rtol, "{end}");
    }

    #[test]
    fn sample_times_are_hit_exactly() {
        let settings = SolverSettings {
            sample_dt: 0.03,
            ..Default::default()
        };
        let traj = integrate(|_, y, dy| dy[0] = -y[0], &[c(1.0, 0.5)], 1.0, &settings).unwrap();
        let grid = sample_times(1.0, 0.03);
        assert_eq!(traj.times, grid);
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        for (t, s) in traj.times.iter().zip(traj.states()) {
            let exact = c(1.0, 0.5) * (-t).exp();
            assert!((s[0] - exact).norm() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_horizon_and_settings() {
        let s = SolverSettings::default();
        assert!(integrate(|_, _, _| {}, &[c(1.0, 0.0)], 0.0, &s).is_err());
        assert!(integrate(|_, _, _| {}, &[c(1.0, 0.0)], f64::NAN, &s).is_err());
        let bad = SolverSettings { rtol: 0.0, ..s };
        assert!(matches!(
            integrate(|_, _, _| {}, &[c(1.0, 0.0)], 1.0, &bad),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y² blows up at t = 1.
        let s = SolverSettings::default();
        let err = integrate(|_, y, dy| dy[0] = y[0] * y[0], &[c(1.0, 0.0)], 2.0, &s).unwrap_err();
        assert!(
            matches!(err, Error::StepSizeUnderflow { t, .. } | Error::NonFiniteState { t, .. } if t < 1.0 + 1e-3),
            "{err:?}"
        );
    }

    #[test]
    fn deterministic_runs() {
        let s = SolverSettings::default();
        let f = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = c(0.0, 1.0) * y[0] * t.cos() + y[1].conj() * 0.1;
            dy[1] = -y[0] * y[1];
        };
        let a = integrate(f, &[c(0.2, 0.1), c(0.3, -0.2)], 5.0, &s).unwrap();
        let b = integrate(f, &[c(0.2, 0.1), c(0.3, -0.2)], 5.0, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degree_zero_reset_is_noop() {
        let params = SpringParams::default();
        let model = swing_spring_model(&params).unwrap();
        let u0 = initial_state(DEFAULT_POSITIONS, DEFAULT_VELOCITIES, &params);
        let tables = build_tables(AveragingConfig::new(0, 0.2).unwrap(), &model.frequencies()).unwrap();
        let s = SolverSettings::default();
        let with_reset = integrate_with_reset(&model, &tables, &u0, 20.0, 1.0, &s).unwrap();
        let mut rhs = AveragedRhs::new(&model, &tables).unwrap();
        let plain = integrate(|t, y, dy| rhs.eval(t, y, dy), &u0, 20.0, &s).unwrap();
        assert_eq!(with_reset.times, plain.times);
        assert!(with_reset.states().zip(plain.states()).all(|(a, b)| a == b));
        assert!(with_reset.reset_times.is_empty());
    }

    #[test]
    fn reset_zeroes_higher_blocks_and_keeps_v0_continuous() {
        let params = SpringParams::default();
        let model = swing_spring_model(&params).unwrap();
        let u0 = initial_state(DEFAULT_POSITIONS, DEFAULT_VELOCITIES, &params);
        let tables = build_tables(AveragingConfig::new(3, 0.2).unwrap(), &model.frequencies()).unwrap();
        let s = SolverSettings::default();
        let traj = integrate_with_reset(&model, &tables, &u0, 3.0, 0.5, &s).unwrap();
        assert_eq!(traj.reset_times.len(), 5);
        for (k, r) in traj.reset_times.iter().enumerate() {
            assert!((r - 0.5 * (k + 1) as f64).abs() < 1e-12);
        }
        // Samples land before the reset, so the higher blocks are still live there.
        let idx = traj.times.iter().position(|t| (t - 0.5).abs() < 1e-12).unwrap();
        assert!(traj.higher_norms[idx] > 0.0);
        let jump = (traj.state(idx + 1)[0] - traj.state(idx)[0]).norm();
        let step = (traj.state(idx)[0] - traj.state(idx - 1)[0]).norm();
        assert!(jump < 10.0 * step + 1e-12);
    }

    #[test]
    fn resets_between_samples() {
        let params = SpringParams::default();
        let model = swing_spring_model(&params).unwrap();
        let u0 = initial_state(DEFAULT_POSITIONS, DEFAULT_VELOCITIES, &params);
        let tables = build_tables(AveragingConfig::new(2, 0.2).unwrap(), &model.frequencies()).unwrap();
        let s = SolverSettings {
            sample_dt: 0.1,
            ..Default::default()
        };
        let traj = integrate_with_reset(&model, &tables, &u0, 1.0, 0.25, &s).unwrap();
        assert_eq!(traj.times, sample_times(1.0, 0.1));
        assert_eq!(traj.reset_times, vec![0.25, 0.5, 0.75]);
        let no_reset = integrate_with_reset(&model, &tables, &u0, 1.0, f64::INFINITY, &s).unwrap();
        assert!(no_reset.reset_times.is_empty());
        assert!(integrate_with_reset(&model, &tables, &u0, 1.0, 0.0, &s).is_err());
    }
}
