use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::moments::{damping_factor, gaussian_moments, shifted_moments};
use crate::{Error, Result};

/// Highest polynomial degree accepted by [`AveragingConfig`].
pub const MAX_DEGREE: usize = 12;

/// Default cap on the mass-matrix condition number before
/// [`build_tables`] reports [`Error::IllConditioned`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e14;

/// Frequencies closer than this are treated as one table entry.
pub const FREQUENCY_TOLERANCE: f64 = 1e-12;

/// Polynomial degree `p` and Gaussian window `T` (seconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingConfig {
    degree: usize,
    window: f64,
}

impl AveragingConfig {
    pub fn new(degree: usize, window: f64) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::InvalidConfig(format!(
                "polynomial degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "averaging window must be finite and positive, got {window}"
            )));
        }
        Ok(Self { degree, window })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// Number of coefficient blocks, `p + 1`.
    pub fn blocks(&self) -> usize {
        self.degree + 1
    }
}

/// Precomputed mass matrix, its inverse, and per-frequency shifted moments.
///
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct AveragingTables {
    config: AveragingConfig,
    frequencies: Vec<f64>,
    mass: DMatrix<f64>,
    mass_inv: DMatrix<f64>,
    mass_condition: f64,
    r_moments: Vec<Vec<Complex64>>,
    damping: Vec<f64>,
    projected: Vec<Vec<Complex64>>,
}

/// Build tables, failing with [`Error::IllConditioned`] when the mass
/// condition number exceeds [`DEFAULT_CONDITION_CAP`].
pub fn build_tables(config: AveragingConfig, frequencies: &[f64]) -> Result<AveragingTables> {
    AveragingTables::build_with_cap(config, frequencies, DEFAULT_CONDITION_CAP)
}

impl AveragingTables {
    pub fn build_with_cap(config: AveragingConfig, frequencies: &[f64], condition_cap: f64) -> Result<Self> {
        let tables = Self::build_unchecked(config, frequencies)?;
        if tables.mass_condition.is_nan() || tables.mass_condition > condition_cap {
            return Err(Error::IllConditioned {
                condition: tables.mass_condition,
                cap: condition_cap,
            });
        }
        Ok(tables)
    }

    /// Build without enforcing a conditioning cap. Callers that want to
    /// proceed on badly conditioned windows inspect
    /// [`mass_condition`](Self::mass_condition) themselves.
    pub fn build_unchecked(config: AveragingConfig, frequencies: &[f64]) -> Result<Self> {
        if let Some(bad) = frequencies.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite frequency {bad}")));
        }
        let p = config.degree;
        let window = config.window;
        let n = p + 1;

        let moments = gaussian_moments(2 * p, window);
        let mass = DMatrix::from_fn(n, n, |j, k| moments[j + k]);
        let mass_inv = mass.clone().lu().try_inverse().ok_or(Error::SingularMass)?;
        let mass_condition = norm_one(&mass) * norm_one(&mass_inv);

        let frequencies = dedup_frequencies(frequencies);
        let r_moments: Vec<Vec<Complex64>> = frequencies.iter().map(|&c| shifted_moments(3 * p, c, window)).collect();
        let damping: Vec<f64> = frequencies.iter().map(|&c| damping_factor(c, window)).collect();
        let projected = r_moments
            .iter()
            .zip(&damping)
            .map(|(r, &d)| project(&mass_inv, r, d))
            .collect();

        Ok(Self {
            config,
            frequencies,
            mass,
            mass_inv,
            mass_condition,
            r_moments,
            damping,
            projected,
        })
    }

    pub fn config(&self) -> AveragingConfig {
        self.config
    }

    pub fn degree(&self) -> usize {
        self.config.degree
    }

    pub fn window(&self) -> f64 {
        self.config.window
    }

    /// Deduplicated frequency list; table rows are indexed by position here.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frequency_index(&self, frequency: f64) -> Option<usize> {
        self.frequencies
            .iter()
            .position(|&c| (c - frequency).abs() <= FREQUENCY_TOLERANCE)
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn mass_inv(&self) -> &DMatrix<f64> {
        &self.mass_inv
    }

    /// One-norm condition number `‖M‖₁ ‖M⁻¹‖₁`.
    pub fn mass_condition(&self) -> f64 {
        self.mass_condition
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.mass_condition.is_nan() || self.mass_condition > DEFAULT_CONDITION_CAP
    }

    /// `R_α` for `α = 0 ..= 3p` at frequency row `index`.
    pub fn r_moments(&self, index: usize) -> &[Complex64] {
        &self.r_moments[index]
    }

    pub fn damping(&self, index: usize) -> f64 {
        self.damping[index]
    }

    /// `D_m (M⁻¹ R^m)` as a row-major `(p+1) × (2p+1)` matrix: entry `(k, α)`
    /// maps the degree-`α` pair sum of frequency `index` to `dV_k/dt`.
    pub fn projected_moments(&self, index: usize) -> &[Complex64] {
        &self.projected[index]
    }
}

// Folding M⁻¹ into the moments once keeps the badly scaled products out of
// the per-step sums, so rounding is not amplified by the mass inverse.
fn project(mass_inv: &DMatrix<f64>, moments: &[Complex64], damping: f64) -> Vec<Complex64> {
    let n = mass_inv.nrows();
    let width = 2 * n - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); n * width];
    if damping == 0.0 {
        return out;
    }
    for k in 0..n {
        for a in 0..width {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                // Damping first: R grows like (cT²)^α where the product stays bounded.
                acc += (moments[j + a] * damping) * mass_inv[(k, j)];
            }
            out[k * width + a] = acc;
        }
    }
    out
}

fn norm_one(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Keeps first occurrences; later entries within [`FREQUENCY_TOLERANCE`] of a
/// kept one are dropped.
pub fn dedup_frequencies(frequencies: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(frequencies.len());
    for &c in frequencies {
        if !out.iter().any(|&k| (k - c).abs() <= FREQUENCY_TOLERANCE) {
            out.push(c);
        }
    }
    out
}
