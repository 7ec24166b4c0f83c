//! Dormand–Prince 5(4) stepper with PI step-size control.
//!
//! Complex components are treated as pairs of independent real coordinates
//! for the error norm.

use num_complex::Complex64;

use super::{SolverSettings, SolverStats};
use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const MIN_ERR_PREV: f64 = 1e-4;

/// Smallest admissible step relative to the integration horizon.
pub(crate) const UNDERFLOW_RATIO: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) struct Stepper<'s, F> {
    rhs: F,
    settings: &'s SolverSettings,
    min_step: f64,
    pub t: f64,
    pub y: Vec<Complex64>,
    h: f64,
    err_prev: f64,
    k: [Vec<Complex64>; 7],
    y_stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    pub stats: SolverStats,
    pub segment: usize,
}

impl<'s, F> Stepper<'s, F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(rhs: F, y0: &[Complex64], horizon: f64, settings: &'s SolverSettings) -> Self {
        let n = y0.len();
        let mut stepper = Self {
            rhs,
            settings,
            min_step: UNDERFLOW_RATIO * horizon,
            t: 0.0,
            y: y0.to_vec(),
            h: 0.0,
            err_prev: MIN_ERR_PREV,
            k: std::array::from_fn(|_| vec![ZERO; n]),
            y_stage: vec![ZERO; n],
            y_new: vec![ZERO; n],
            stats: SolverStats::default(),
            segment: 0,
        };
        stepper.restart();
        stepper
    }

    /// Re-evaluate the first stage and pick a fresh step size, discarding
    /// controller history. Used at start-up and after any external change
    /// to `y`.
    pub fn restart(&mut self) {
        (self.rhs)(self.t, &self.y, &mut self.k[0]);
        self.stats.rhs_evals += 1;
        self.err_prev = MIN_ERR_PREV;
        self.h = match self.settings.initial_step {
            Some(h) => h,
            None => self.initial_step(),
        };
        if let Some(hmax) = self.settings.max_step {
            self.h = self.h.min(hmax);
        }
    }

    fn scale(&self, y: f64) -> f64 {
        self.settings.atol + self.settings.rtol * y.abs()
    }

    fn initial_step(&mut self) -> f64 {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for (y, f) in self.y.iter().zip(&self.k[0]) {
            d0 = d0
                .max((y.re / self.scale(y.re)).abs())
                .max((y.im / self.scale(y.im)).abs());
            d1 = d1
                .max((f.re / self.scale(y.re)).abs())
                .max((f.im / self.scale(y.im)).abs());
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        for i in 0..self.y.len() {
            self.y_stage[i] = self.y[i] + self.k[0][i] * h0;
        }
        (self.rhs)(self.t + h0, &self.y_stage, &mut self.k[1]);
        self.stats.rhs_evals += 1;
        let mut d2: f64 = 0.0;
        for i in 0..self.y.len() {
            let diff = self.k[1][i] - self.k[0][i];
            let y = self.y[i];
            d2 = d2
                .max((diff.re / self.scale(y.re)).abs())
                .max((diff.im / self.scale(y.im)).abs());
        }
        d2 /= h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1)
    }

    fn stage(&mut self, h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..self.y.len() {
            let mut acc = ZERO;
            for &(s, a) in coeffs {
                acc += self.k[s][i] * a;
            }
            self.y_stage[i] = self.y[i] + acc * h;
        }
    }

    /// Attempts one step of size `h`; returns the scaled error norm.
    fn trial(&mut self, h: f64) -> f64 {
        let t = self.t;
        self.stage(h, &[(0, A21)]);
        (self.rhs)(t + C2 * h, &self.y_stage, &mut self.k[1]);
        self.stage(h, &[(0, A31), (1, A32)]);
        (self.rhs)(t + C3 * h, &self.y_stage, &mut self.k[2]);
        self.stage(h, &[(0, A41), (1, A42), (2, A43)]);
        (self.rhs)(t + C4 * h, &self.y_stage, &mut self.k[3]);
        self.stage(h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        (self.rhs)(t + C5 * h, &self.y_stage, &mut self.k[4]);
        self.stage(h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        (self.rhs)(t + h, &self.y_stage, &mut self.k[5]);
        for i in 0..self.y.len() {
            let acc =
                self.k[0][i] * A71 + self.k[2][i] * A73 + self.k[3][i] * A74 + self.k[4][i] * A75 + self.k[5][i] * A76;
            self.y_new[i] = self.y[i] + acc * h;
        }
        (self.rhs)(t + h, &self.y_new, &mut self.k[6]);
        self.stats.rhs_evals += 6;

        let mut err: f64 = 0.0;
        for i in 0..self.y.len() {
            let e = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let (y, yn) = (self.y[i], self.y_new[i]);
            let sre = self.settings.atol + self.settings.rtol * y.re.abs().max(yn.re.abs());
            let sim = self.settings.atol + self.settings.rtol * y.im.abs().max(yn.im.abs());
            err = err.max(e.re.abs() / sre).max(e.im.abs() / sim);
            if !(yn.re.is_finite() && yn.im.is_finite()) {
                err = f64::NAN;
            }
        }
        if err.is_nan() {
            f64::NAN
        } else {
            err
        }
    }

    /// Steps until `t == target` exactly; the last step is clipped.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let mut last_nonfinite = false;
        while self.t < target {
            let remaining = target - self.t;
            let mut h = self.h;
            if let Some(hmax) = self.settings.max_step {
                h = h.min(hmax);
            }
            // Avoid leaving a sliver shorter than a rounding error.
            let clipped = h >= remaining * (1.0 - 1e-12);
            if clipped {
                h = remaining;
            }
            if h < self.min_step && !clipped {
                return Err(if last_nonfinite {
                    Error::NonFiniteState {
                        t: self.t,
                        segment: self.segment,
                    }
                } else {
                    Error::StepSizeUnderflow { t: self.t, h }
                });
            }

            let err = self.trial(h);
            if err.is_nan() || err.is_infinite() {
                last_nonfinite = true;
                self.stats.rejected += 1;
                self.h = h * MIN_FACTOR;
                continue;
            }
            last_nonfinite = false;
            if err <= 1.0 {
                self.stats.accepted += 1;
                self.t = if clipped { target } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    SAFETY * err.powf(-ALPHA) * self.err_prev.powf(BETA)
                };
                let grown = h * factor.clamp(MIN_FACTOR, MAX_FACTOR);
                // A clipped step says nothing about how large steps may be.
                self.h = if clipped { grown.max(self.h) } else { grown };
                self.err_prev = err.max(MIN_ERR_PREV);
            } else {
                self.stats.rejected += 1;
                let factor = (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
                self.h = h * factor.min(1.0);
                if clipped && self.h >= remaining {
                    self.h = remaining * 0.5;
                }
            }
        }
        Ok(())
    }
}
