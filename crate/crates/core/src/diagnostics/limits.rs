use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::max_discrepancy;
use crate::averaging::{assemble_averaged_rhs, AveragingConfig, AveragingTables, StackedState};
use crate::integrator::{integrate, integrate_with_reset, SolverSettings};
use crate::model::ResonantQuadraticModel;
use crate::Result;

/// Seed for the higher-block perturbation of the decoupling check.
pub const PERTURBATION_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T0Report {
    pub degree: usize,
    pub window: f64,
    pub horizon: f64,
    /// Max over samples of `|V_0 - V_exact|`.
    pub discrepancy: f64,
    /// Sensitivity of the `V_0` row to the higher blocks at `T` and `T/2`.
    pub sensitivity: f64,
    pub sensitivity_half: f64,
    /// `sensitivity_half / sensitivity`; 0 when there are no higher blocks.
    pub ratio: f64,
}

impl T0Report {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.discrepancy <= tolerance && self.ratio <= 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinfReport {
    pub degree: usize,
    pub window: f64,
    pub horizon: f64,
    pub discrepancy: f64,
    /// Max over samples of `|V_0|` in the reference run.
    pub reference_scale: f64,
    /// Largest higher-block modulus seen at any sample.
    pub higher_block_peak: f64,
    /// `10 rtol` times the reference scale.
    pub threshold: f64,
}

impl TinfReport {
    pub const HIGHER_BLOCK_LIMIT: f64 = 1e-12;

    pub fn passes(&self) -> bool {
        self.discrepancy <= self.threshold && self.higher_block_peak <= Self::HIGHER_BLOCK_LIMIT
    }
}

/// Small-window check: the averaged `V_0` against the exact modulated run,
/// plus the shrinking of the `V_0` row's dependence on the higher blocks.
pub fn check_limit_t0(
    model: &ResonantQuadraticModel,
    y0: &[Complex64],
    degree: usize,
    window: f64,
    horizon: f64,
    settings: &SolverSettings,
) -> Result<T0Report> {
    let cfg = AveragingConfig::new(degree, window)?;
    let freqs = model.frequencies();
    let tables = AveragingTables::build_unchecked(cfg, &freqs)?;
    let averaged = integrate_with_reset(model, &tables, y0, horizon, f64::INFINITY, settings)?;
    let exact = integrate(|t, y, dy| model.modulated_rhs(t, y, dy), y0, horizon, settings)?;
    let discrepancy = max_discrepancy(&averaged, &exact)?;

    let sensitivity = v0_row_sensitivity(model, y0, degree, window)?;
    let half_cfg = AveragingConfig::new(degree, 0.5 * window)?;
    let sensitivity_half = v0_row_sensitivity(model, y0, half_cfg.degree(), half_cfg.window())?;
    let ratio = if sensitivity == 0.0 {
        0.0
    } else {
        sensitivity_half / sensitivity
    };
    Ok(T0Report {
        degree,
        window,
        horizon,
        discrepancy,
        sensitivity,
        sensitivity_half,
        ratio,
    })
}

/// `max |dV_0(V_0, δ) - dV_0(V_0, 0)| / max |δ|` for a fixed random `δ` in
/// the higher blocks, scaled like `V_0`.
pub fn v0_row_sensitivity(model: &ResonantQuadraticModel, v0: &[Complex64], degree: usize, window: f64) -> Result<f64> {
    if degree == 0 {
        return Ok(0.0);
    }
    let cfg = AveragingConfig::new(degree, window)?;
    let tables = AveragingTables::build_unchecked(cfg, &model.frequencies())?;
    let base = StackedState::initial(v0, cfg.blocks());
    let scale = v0.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
    let mut perturbed = base.clone();
    let mut delta_max: f64 = 0.0;
    for k in 1..cfg.blocks() {
        for z in perturbed.block_mut(k) {
            *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            delta_max = delta_max.max(z.norm());
        }
    }

    let t = 0.0;
    let d_base = assemble_averaged_rhs(t, &base, model, &tables)?;
    let d_pert = assemble_averaged_rhs(t, &perturbed, model, &tables)?;
    let change = d_base
        .block(0)
        .iter()
        .zip(d_pert.block(0))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(change / delta_max)
}

/// Large-window check against a resonance-only reference model, integrated
/// from the same initial state.
pub fn check_limit_tinf<R>(
    model: &ResonantQuadraticModel,
    y0: &[Complex64],
    degree: usize,
    window: f64,
    horizon: f64,
    settings: &SolverSettings,
    reference: R,
) -> Result<TinfReport>
where
    R: Fn(&[Complex64], &mut [Complex64]),
{
    let cfg = AveragingConfig::new(degree, window)?;
    let tables = AveragingTables::build_unchecked(cfg, &model.frequencies())?;
    let averaged = integrate_with_reset(model, &tables, y0, horizon, f64::INFINITY, settings)?;
    let limit = integrate(|_, y, dy| reference(y, dy), y0, horizon, settings)?;
    let discrepancy = max_discrepancy(&averaged, &limit)?;
    let reference_scale = super::max_norm(&limit);
    Ok(TinfReport {
        degree,
        window,
        horizon,
        discrepancy,
        reference_scale,
        higher_block_peak: averaged.higher_block_peak(),
        threshold: 10.0 * settings.rtol * reference_scale,
    })
}
