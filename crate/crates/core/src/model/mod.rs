//! Resonant-quadratic models.
//!
//! A model is the diagonal of `L` plus a list of terms `(c_m, F_m)` such that
//! the modulated right-hand side is `Σ_m F_m(V, V) exp(i c_m t)`.

mod spring;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::averaging::tables::FREQUENCY_TOLERANCE;
use crate::{Error, Result};

pub use spring::{
    back_transform, energy, exact_modulated_rhs, initial_state, swing_spring_model, whitham_limit_rhs, SpringParams,
    DEFAULT_POSITIONS, DEFAULT_VELOCITIES,
};

/// Bilinear map `(a, b) -> out += F(a, b)`. Each slot is either linear or
/// antilinear (componentwise conjugate) and stays so for a given term.
pub type BilinearFn = dyn Fn(&[Complex64], &[Complex64], &mut [Complex64]) + Send + Sync;

#[derive(Clone)]
pub struct ResonantTerm {
    frequency: f64,
    map: Arc<BilinearFn>,
}

impl ResonantTerm {
    pub fn new<F>(frequency: f64, map: F) -> Self
    where
        F: Fn(&[Complex64], &[Complex64], &mut [Complex64]) + Send + Sync + 'static,
    {
        Self {
            frequency,
            map: Arc::new(map),
        }
    }

    /// Angular frequency `c_m` (rad/s).
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Adds `F_m(a, b)` into `out`.
    #[inline]
    pub fn accumulate(&self, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
        (self.map)(a, b, out)
    }

    pub fn apply(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
        self.accumulate(a, b, &mut out);
        out
    }
}

impl fmt::Debug for ResonantTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResonantTerm")
            .field("frequency", &self.frequency)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct ResonantQuadraticModel {
    label: String,
    linear_diag: Vec<Complex64>,
    terms: Vec<ResonantTerm>,
}

impl ResonantQuadraticModel {
    pub fn new(label: impl Into<String>, linear_diag: Vec<Complex64>, terms: Vec<ResonantTerm>) -> Result<Self> {
        if linear_diag.is_empty() {
            return Err(Error::InvalidConfig("model dimension must be positive".into()));
        }
        if let Some(ev) = linear_diag.iter().find(|ev| ev.re != 0.0 || !ev.im.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "linear operator eigenvalue {ev} is not purely imaginary"
            )));
        }
        if let Some(term) = terms.iter().find(|t| !t.frequency.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "term frequency {} is not finite",
                term.frequency
            )));
        }
        Ok(Self {
            label: label.into(),
            linear_diag,
            terms,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.linear_diag.len()
    }

    pub fn linear_diag(&self) -> &[Complex64] {
        &self.linear_diag
    }

    pub fn terms(&self) -> &[ResonantTerm] {
        &self.terms
    }

    /// Frequencies of all terms, in term order (may repeat).
    pub fn frequencies(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.frequency).collect()
    }

    /// Splits the term list into two models with the same linear part.
    pub fn split_terms(&self, at: usize) -> (Self, Self) {
        let (a, b) = self.terms.split_at(at.min(self.terms.len()));
        let with = |terms: &[ResonantTerm], suffix: &str| Self {
            label: format!("{}{suffix}", self.label),
            linear_diag: self.linear_diag.clone(),
            terms: terms.to_vec(),
        };
        (with(a, "/a"), with(b, "/b"))
    }

    /// Modulated right-hand side `Σ_m F_m(V, V) exp(i c_m t)`.
    pub fn modulated_rhs(&self, t: f64, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        let mut scratch = vec![Complex64::new(0.0, 0.0); v.len()];
        for term in &self.terms {
            scratch.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            term.accumulate(v, v, &mut scratch);
            let phase = Complex64::from_polar(1.0, term.frequency * t);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += phase * s;
            }
        }
    }

    /// Sum of the exactly resonant (`c_m ≈ 0`) terms at `v`; the infinite
    /// window limit of the lowest-order averaged system.
    pub fn resonant_rhs(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for term in self.terms.iter().filter(|t| t.frequency.abs() <= FREQUENCY_TOLERANCE) {
            term.accumulate(v, v, out);
        }
    }

    /// `U = exp(tL) V`.
    pub fn back_transform(&self, t: f64, v: &[Complex64]) -> Vec<Complex64> {
        v.iter()
            .zip(&self.linear_diag)
            .map(|(x, ev)| x * Complex64::from_polar(1.0, ev.im * t))
            .collect()
    }

    /// `V = exp(-tL) U`.
    pub fn modulate(&self, t: f64, u: &[Complex64]) -> Vec<Complex64> {
        u.iter()
            .zip(&self.linear_diag)
            .map(|(x, ev)| x * Complex64::from_polar(1.0, -ev.im * t))
            .collect()
    }
}
