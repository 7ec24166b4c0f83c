//! Run configuration: TOML file, command-line overrides, validation and the
//! named sweep presets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::averaging::{AveragingConfig, MAX_DEGREE};
use crate::diagnostics::SweepSpec;
use crate::integrator::SolverSettings;
use crate::model::{initial_state, SpringParams, DEFAULT_POSITIONS, DEFAULT_VELOCITIES};
use crate::{Error, Result};

pub const DEFAULT_TF: f64 = 167.0;
pub const LONG_TF: f64 = 1000.0;
pub const DEFAULT_RESET_DT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Sweep,
    Limits,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "small-T")]
    SmallT,
    #[serde(rename = "mid-T")]
    MidT,
    #[serde(rename = "reset-study")]
    ResetStudy,
}

impl Preset {
    pub const NAMES: [&'static str; 3] = ["small-T", "mid-T", "reset-study"];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SmallT => "small-T",
            Preset::MidT => "mid-T",
            Preset::ResetStudy => "reset-study",
        }
    }

    pub fn p_values(self) -> Vec<usize> {
        match self {
            Preset::SmallT => (0..=5).collect(),
            Preset::MidT | Preset::ResetStudy => (0..=10).collect(),
        }
    }

    pub fn windows(self) -> Vec<f64> {
        match self {
            Preset::SmallT => {
                let mut w: Vec<f64> = (0..20).map(|k| 0.001 + 0.0025 * k as f64).collect();
                w.push(0.05);
                w
            }
            Preset::MidT | Preset::ResetStudy => (1..=10).map(|k| 0.05 * k as f64).collect(),
        }
    }

    /// Reset intervals to run; `None` keeps the configured one.
    pub fn reset_intervals(self) -> Option<Vec<f64>> {
        match self {
            Preset::ResetStudy => Some(vec![0.1, 100.0]),
            _ => None,
        }
    }

    /// Components written for this preset.
    pub fn components(self) -> &'static [usize] {
        match self {
            Preset::ResetStudy => &[0],
            _ => &[0, 1, 2],
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small-T" => Ok(Preset::SmallT),
            "mid-T" => Ok(Preset::MidT),
            "reset-study" => Ok(Preset::ResetStudy),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (valid presets: {})",
                Preset::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Physical parameters. `freq_ratio`, when given, sets the spring constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
    pub spring_k: f64,
    pub freq_ratio: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = SpringParams::default();
        Self {
            mass: p.mass,
            length: p.length,
            gravity: p.gravity,
            spring_k: p.spring_k,
            freq_ratio: None,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> SpringParams {
        let p = SpringParams {
            mass: self.mass,
            length: self.length,
            gravity: self.gravity,
            spring_k: self.spring_k,
        };
        match self.freq_ratio {
            Some(r) => p.with_freq_ratio(r),
            None => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    /// Metres.
    pub positions: [f64; 3],
    /// Metres per second.
    pub velocities: [f64; 3],
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            positions: DEFAULT_POSITIONS,
            velocities: DEFAULT_VELOCITIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AveragingSection {
    pub p: usize,
    #[serde(rename = "T")]
    pub window: f64,
}

impl Default for AveragingSection {
    fn default() -> Self {
        Self { p: 2, window: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub preset: Option<Preset>,
    pub p_values: Option<Vec<usize>>,
    #[serde(rename = "T_values")]
    pub windows: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    pub t0_degrees: Vec<usize>,
    pub t0_window: f64,
    pub t0_horizon: f64,
    /// Max-norm bound on the small-window `V_0` discrepancy.
    pub t0_tolerance: f64,
    pub tinf_degree: usize,
    pub tinf_window: f64,
    pub tinf_horizon: f64,
}

impl Default for LimitsSection {
    fn default() -> Self {
        Self {
            t0_degrees: vec![0, 2],
            t0_window: 0.005,
            t0_horizon: 10.0,
            t0_tolerance: 1e-6,
            tinf_degree: 2,
            tinf_window: 10.0,
            tinf_horizon: DEFAULT_TF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: ModelSection,
    pub initial: InitialSection,
    pub averaging: AveragingSection,
    #[serde(with = "float_or_inf")]
    pub reset_dt: f64,
    pub tf: f64,
    pub solver: SolverSettings,
    pub sweep: SweepSection,
    pub limits: LimitsSection,
    pub out: PathBuf,
    /// Sweep workers; `0` uses every core.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Simulate,
            model: ModelSection::default(),
            initial: InitialSection::default(),
            averaging: AveragingSection::default(),
            reset_dt: DEFAULT_RESET_DT,
            tf: DEFAULT_TF,
            solver: SolverSettings::default(),
            sweep: SweepSection::default(),
            limits: LimitsSection::default(),
            out: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

/// One sweep to run, with its output name.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub name: String,
    pub spec: SweepSpec,
    pub components: Vec<usize>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config parse error: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn params(&self) -> SpringParams {
        self.model.params()
    }

    /// `U(0) = V(0)` from the configured positions and velocities.
    pub fn initial_state(&self) -> Vec<Complex64> {
        initial_state(self.initial.positions, self.initial.velocities, &self.params()).to_vec()
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut check = |r: Result<()>| {
            if let Err(e) = r {
                problems.push(match e {
                    Error::InvalidConfig(m) => m,
                    other => other.to_string(),
                });
            }
        };
        if let Some(r) = self.model.freq_ratio {
            if !(r.is_finite() && r > 0.0) {
                check(Err(Error::InvalidConfig(format!(
                    "model.freq_ratio must be finite and positive (got {r})"
                ))));
            }
        }
        check(self.params().validate());
        if self
            .initial
            .positions
            .iter()
            .chain(&self.initial.velocities)
            .any(|v| !v.is_finite())
        {
            check(Err(Error::InvalidConfig("initial state must be finite".into())));
        }
        check(AveragingConfig::new(self.averaging.p, self.averaging.window).map(drop));
        if self.reset_dt.is_nan() || self.reset_dt <= 0.0 {
            check(Err(Error::InvalidConfig(format!(
                "reset_dt must be positive or inf (got {})",
                self.reset_dt
            ))));
        }
        if !(self.tf.is_finite() && self.tf > 0.0) {
            check(Err(Error::InvalidConfig(format!(
                "tf must be finite and positive (got {})",
                self.tf
            ))));
        }
        check(self.solver.validate());
        if let Some(ps) = &self.sweep.p_values {
            if ps.is_empty() || ps.iter().any(|&p| p > MAX_DEGREE) {
                check(Err(Error::InvalidConfig(format!(
                    "sweep.p_values must be non-empty with entries <= {MAX_DEGREE}"
                ))));
            }
        }
        if let Some(ts) = &self.sweep.windows {
            if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                check(Err(Error::InvalidConfig(
                    "sweep.T_values must be non-empty, finite and positive".into(),
                )));
            }
        }
        let l = &self.limits;
        for &p in &l.t0_degrees {
            check(AveragingConfig::new(p, l.t0_window).map(drop));
        }
        check(AveragingConfig::new(l.tinf_degree, l.tinf_window).map(drop));
        for (name, v) in [
            ("limits.t0_horizon", l.t0_horizon),
            ("limits.tinf_horizon", l.tinf_horizon),
            ("limits.t0_tolerance", l.t0_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                check(Err(Error::InvalidConfig(format!(
                    "{name} must be finite and positive (got {v})"
                ))));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    /// Sweeps implied by the `sweep` section. Explicit grids override the
    /// preset's; without either the mid-window grid is used.
    pub fn sweep_plans(&self) -> Vec<SweepPlan> {
        let preset = self.sweep.preset.unwrap_or(Preset::MidT);
        let p_values = self.sweep.p_values.clone().unwrap_or_else(|| preset.p_values());
        let windows = self.sweep.windows.clone().unwrap_or_else(|| preset.windows());
        let spec = |reset_dt: f64| SweepSpec {
            p_values: p_values.clone(),
            windows: windows.clone(),
            t_final: self.tf,
            reset_dt,
            settings: self.solver,
            jobs: self.jobs,
        };
        match preset.reset_intervals() {
            Some(resets) => resets
                .into_iter()
                .map(|dt| SweepPlan {
                    name: format!("errors_{}_reset{}", preset.name(), format_interval(dt)),
                    spec: spec(dt),
                    components: preset.components().to_vec(),
                })
                .collect(),
            None => vec![SweepPlan {
                name: format!("errors_{}", preset.name()),
                spec: spec(self.reset_dt),
                components: preset.components().to_vec(),
            }],
        }
    }
}

fn format_interval(dt: f64) -> String {
    if dt.is_infinite() {
        "inf".into()
    } else {
        format!("{dt}")
    }
}

/// Parses a float, accepting `inf` for "never".
pub fn parse_interval(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("expected a number or 'inf', got '{s}'"))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("interval must be positive, got '{s}'"))
    }
}

/// TOML has an `inf` literal but JSON does not; infinite values round-trip
/// as the string `"inf"`.
mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{t}\""
            ))),
        }
    }
}
