use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::l2_relative_errors;
use crate::averaging::{AveragingConfig, AveragingTables};
use crate::integrator::{integrate, integrate_with_reset, SolverSettings, Trajectory};
use crate::model::ResonantQuadraticModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub p_values: Vec<usize>,
    pub windows: Vec<f64>,
    pub t_final: f64,
    pub reset_dt: f64,
    pub settings: SolverSettings,
    /// Worker count; `0` uses every available core.
    pub jobs: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p_values.is_empty() || self.windows.is_empty() {
            return Err(Error::InvalidConfig("sweep grid must not be empty".into()));
        }
        for &p in &self.p_values {
            AveragingConfig::new(p, 1.0)?;
        }
        for &t in &self.windows {
            AveragingConfig::new(0, t)?;
        }
        if self.reset_dt.is_nan() || self.reset_dt <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "reset interval must be positive (got {})",
                self.reset_dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "final time must be finite and positive (got {})",
                self.t_final
            )));
        }
        self.settings.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellStatus {
    Ok,
    /// Computed, but the mass matrix exceeded the conditioning cap.
    IllConditioned,
    /// The integration failed; errors are not available.
    Failed {
        kind: String,
        time: Option<f64>,
    },
}

impl CellStatus {
    pub fn token(&self) -> &str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::IllConditioned => "ill_conditioned",
            CellStatus::Failed { kind, .. } => kind,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, CellStatus::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p: usize,
    pub window: f64,
    /// One entry per component; empty for failed cells.
    pub errors: Vec<f64>,
    pub status: CellStatus,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub mass_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub t_final: f64,
    pub rtol: f64,
    pub atol: f64,
    pub sample_dt: f64,
    pub reset_dt: f64,
    pub model: String,
}

/// Relative L2 errors on a `(p, T)` grid; cells are stored `p`-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMap {
    pub p_values: Vec<usize>,
    pub windows: Vec<f64>,
    pub cells: Vec<SweepCell>,
    pub meta: SweepMeta,
}

impl ErrorMap {
    pub fn cell(&self, p_index: usize, t_index: usize) -> &SweepCell {
        &self.cells[p_index * self.windows.len() + t_index]
    }

    /// Cell for the given `p` and window, matching the window to 1e-12.
    pub fn find(&self, p: usize, window: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.p == p && (c.window - window).abs() <= 1e-12 * window.max(1.0))
    }

    /// `errors[component][p][T]`; `None` for failed cells.
    pub fn error(&self, component: usize, p_index: usize, t_index: usize) -> Option<f64> {
        self.cell(p_index, t_index).errors.get(component).copied()
    }
}

/// Integrates the exact modulated system once and every `(p, T)` cell
/// against it, on a worker pool of `spec.jobs` threads.
pub fn run_error_sweep(model: &ResonantQuadraticModel, y0: &[Complex64], spec: &SweepSpec) -> Result<ErrorMap> {
    spec.validate()?;
    let baseline = exact_baseline(model, y0, spec.t_final, &spec.settings)?;
    run_error_sweep_with_baseline(model, y0, spec, &baseline)
}

/// The exact modulated run every cell is compared against.
pub fn exact_baseline(
    model: &ResonantQuadraticModel,
    y0: &[Complex64],
    t_final: f64,
    settings: &SolverSettings,
) -> Result<Trajectory> {
    integrate(|t, y, dy| model.modulated_rhs(t, y, dy), y0, t_final, settings)
}

pub fn run_error_sweep_with_baseline(
    model: &ResonantQuadraticModel,
    y0: &[Complex64],
    spec: &SweepSpec,
    baseline: &Trajectory,
) -> Result<ErrorMap> {
    spec.validate()?;
    let grid: Vec<(usize, f64)> = spec
        .p_values
        .iter()
        .flat_map(|&p| spec.windows.iter().map(move |&t| (p, t)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        grid.par_iter()
            .map(|&(p, t)| evaluate_cell(model, y0, p, t, spec, baseline))
            .collect()
    });

    Ok(ErrorMap {
        p_values: spec.p_values.clone(),
        windows: spec.windows.clone(),
        cells,
        meta: SweepMeta {
            t_final: spec.t_final,
            rtol: spec.settings.rtol,
            atol: spec.settings.atol,
            sample_dt: spec.settings.sample_dt,
            reset_dt: spec.reset_dt,
            model: model.label().to_string(),
        },
    })
}

/// One sweep cell. Never fails: problems are recorded in the status.
pub fn evaluate_cell(
    model: &ResonantQuadraticModel,
    y0: &[Complex64],
    p: usize,
    window: f64,
    spec: &SweepSpec,
    baseline: &Trajectory,
) -> SweepCell {
    let failed = |kind: &str, time: Option<f64>, condition: f64| SweepCell {
        p,
        window,
        errors: Vec::new(),
        status: CellStatus::Failed {
            kind: kind.to_string(),
            time,
        },
        accepted_steps: 0,
        rejected_steps: 0,
        mass_condition: condition,
    };
    let tables = match AveragingConfig::new(p, window)
        .and_then(|cfg| AveragingTables::build_unchecked(cfg, &model.frequencies()))
    {
        Ok(t) => t,
        Err(_) => return failed("tables", None, f64::NAN),
    };
    let condition = tables.mass_condition();
    match integrate_with_reset(model, &tables, y0, spec.t_final, spec.reset_dt, &spec.settings) {
        Ok(traj) => match l2_relative_errors(&traj, baseline) {
            Ok(errors) if errors.iter().all(|e| e.is_finite()) => SweepCell {
                p,
                window,
                errors,
                status: if tables.is_ill_conditioned() {
                    CellStatus::IllConditioned
                } else {
                    CellStatus::Ok
                },
                accepted_steps: traj.stats.accepted,
                rejected_steps: traj.stats.rejected,
                mass_condition: condition,
            },
            _ => failed("error_metric", None, condition),
        },
        Err(Error::NonFiniteState { t, .. }) => failed("nonfinite", Some(t), condition),
        Err(Error::StepSizeUnderflow { t, .. }) => failed("step_underflow", Some(t), condition),
        Err(_) => failed("error", None, condition),
    }
}
