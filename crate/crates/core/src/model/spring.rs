//! The swinging spring (elastic pendulum) near its 2:1 resonance.
//!
//! Equations of motion about equilibrium:
//!
//! ```text
//! x'' + ω_R² x = λ x z
//! y'' + ω_R² y = λ y z
//! z'' + ω_Z² z = λ (x² + y²) / 2
//! ```
//!
//! With `p = v / ω` for each axis the state is complexified as
//! `U = (x + i p_x, y + i p_y, z + i p_z)` and `L = diag(-iω_R, -iω_R, -iω_Z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ResonantQuadraticModel, ResonantTerm};
use crate::averaging::tables::FREQUENCY_TOLERANCE;
use crate::{Error, Result};

/// Default initial positions (m).
pub const DEFAULT_POSITIONS: [f64; 3] = [0.006, 0.0, 0.012];
/// Default initial velocities (m/s).
pub const DEFAULT_VELOCITIES: [f64; 3] = [0.0, 0.00489, 0.0];

const RESONANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringParams {
    /// Bob mass `m_u` (kg).
    pub mass: f64,
    /// Length at equilibrium `l` (m).
    pub length: f64,
    /// Gravitational acceleration `g` (m/s²).
    pub gravity: f64,
    /// Spring constant `k` (kg/s²).
    pub spring_k: f64,
}

impl Default for SpringParams {
    /// `m_u = 1`, `l = 1`, `g = π²`, `k = 4π²`: `ω_R = π`, `ω_Z = 2π`.
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            gravity: PI * PI,
            spring_k: 4.0 * PI * PI,
        }
    }
}

impl SpringParams {
    /// Same pendulum with the spring constant chosen so that `ω_Z / ω_R = ratio`.
    pub fn with_freq_ratio(self, ratio: f64) -> Self {
        let omega_z = ratio * self.omega_r();
        Self {
            spring_k: self.mass * omega_z * omega_z,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("length", self.length),
            ("gravity", self.gravity),
            ("spring_k", self.spring_k),
        ];
        let mut problems: Vec<String> = fields
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, v)| format!("{name} must be finite and positive (got {v})"))
            .collect();
        if problems.is_empty() {
            let l0 = self.unstretched_length();
            if !(l0 > 0.0 && l0 < self.length) {
                problems.push(format!(
                    "unstretched length {l0} must lie in (0, {}); spring too soft for this load",
                    self.length
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    pub fn omega_r(&self) -> f64 {
        (self.gravity / self.length).sqrt()
    }

    pub fn omega_z(&self) -> f64 {
        (self.spring_k / self.mass).sqrt()
    }

    pub fn freq_ratio(&self) -> f64 {
        self.omega_z() / self.omega_r()
    }

    /// `l_0 = l - g m_u / k`.
    pub fn unstretched_length(&self) -> f64 {
        self.length - self.gravity * self.mass / self.spring_k
    }

    /// Coupling `λ = l_0 ω_Z² / l²`.
    pub fn lambda(&self) -> f64 {
        let l = self.length;
        self.unstretched_length() * self.omega_z().powi(2) / (l * l)
    }

    /// `c_xy = iλ / (4ω_R)`.
    pub fn c_xy(&self) -> Complex64 {
        Complex64::new(0.0, self.lambda() / (4.0 * self.omega_r()))
    }

    /// `c_z = iλ / (8ω_Z)`.
    pub fn c_z(&self) -> Complex64 {
        Complex64::new(0.0, self.lambda() / (8.0 * self.omega_z()))
    }

    pub fn is_resonant(&self) -> bool {
        (self.freq_ratio() - 2.0).abs() <= RESONANCE_TOLERANCE
    }

    pub fn linear_diag(&self) -> [Complex64; 3] {
        let wr = self.omega_r();
        [
            Complex64::new(0.0, -wr),
            Complex64::new(0.0, -wr),
            Complex64::new(0.0, -wr * self.freq_ratio()),
        ]
    }
}

fn snap(c: f64) -> f64 {
    if c.abs() <= FREQUENCY_TOLERANCE {
        0.0
    } else {
        c
    }
}

/// Resonant-term decomposition of the modulated swinging spring.
///
/// Five terms, one per exponent appearing in the modulated equations (`ρ`
/// is the frequency ratio, `ω = ω_R`):
///
/// | `c_m`       | x / y slot                 | z slot                       |
/// |-------------|----------------------------|------------------------------|
/// | `-ρω`       | `c_xy X Z`                 | –                            |
/// | `ρω`        | `c_xy X conj(Z)`           | `2c_z (X conj(X) + Y conj(Y))` |
/// | `(2-ρ)ω`    | `c_xy Z conj(X)`           | –                            |
/// | `(2+ρ)ω`    | `c_xy conj(X) conj(Z)`     | `c_z (conj(X)² + conj(Y)²)`  |
/// | `(ρ-2)ω`    | –                          | `c_z (X² + Y²)`              |
///
/// At `ρ = 2` the third and fifth rows are both exactly resonant.
pub fn swing_spring_model(params: &SpringParams) -> Result<ResonantQuadraticModel> {
    params.validate()?;
    let w = params.omega_r();
    let rho = params.freq_ratio();
    let cxy = params.c_xy();
    let cz = params.c_z();
    let two_cz = 2.0 * cz;

    let terms = vec![
        ResonantTerm::new(snap(-rho * w), move |a, b, out| {
            out[0] += cxy * a[0] * b[2];
            out[1] += cxy * a[1] * b[2];
        }),
        ResonantTerm::new(snap(rho * w), move |a, b, out| {
            let bz = b[2].conj();
            out[0] += cxy * a[0] * bz;
            out[1] += cxy * a[1] * bz;
            out[2] += two_cz * (a[0] * b[0].conj() + a[1] * b[1].conj());
        }),
        ResonantTerm::new(snap((2.0 - rho) * w), move |a, b, out| {
            out[0] += cxy * a[2] * b[0].conj();
            out[1] += cxy * a[2] * b[1].conj();
        }),
        ResonantTerm::new(snap((2.0 + rho) * w), move |a, b, out| {
            let (ax, ay) = (a[0].conj(), a[1].conj());
            let (bx, by, bz) = (b[0].conj(), b[1].conj(), b[2].conj());
            out[0] += cxy * ax * bz;
            out[1] += cxy * ay * bz;
            out[2] += cz * (ax * bx + ay * by);
        }),
        ResonantTerm::new(snap((rho - 2.0) * w), move |a, b, out| {
            out[2] += cz * (a[0] * b[0] + a[1] * b[1]);
        }),
    ];
    let label = format!("swinging-spring(freq_ratio={rho})");
    ResonantQuadraticModel::new(label, params.linear_diag().to_vec(), terms)
}

/// Direct evaluation of the modulated component equations.
pub fn exact_modulated_rhs(t: f64, v: &[Complex64; 3], params: &SpringParams) -> [Complex64; 3] {
    let w = params.omega_r();
    let rho = params.freq_ratio();
    let cxy = params.c_xy();
    let cz = params.c_z();
    let e = |phase: f64| Complex64::from_polar(1.0, phase * t);
    let [x, y, z] = *v;
    let (xc, yc, zc) = (x.conj(), y.conj(), z.conj());

    let dx = cxy * x * z * e(-rho * w)
        + cxy * x * zc * e(rho * w)
        + cxy * z * xc * e((2.0 - rho) * w)
        + cxy * xc * zc * e((2.0 + rho) * w);
    let dy = cxy * y * z * e(-rho * w)
        + cxy * y * zc * e(rho * w)
        + cxy * z * yc * e((2.0 - rho) * w)
        + cxy * yc * zc * e((2.0 + rho) * w);
    let dz = cz * (x * x + y * y) * e((rho - 2.0) * w)
        + 2.0 * cz * (x * xc + y * yc) * e(rho * w)
        + cz * (xc * xc + yc * yc) * e((2.0 + rho) * w);
    [dx, dy, dz]
}

/// Complex initial state from positions (m) and velocities (m/s), using
/// `p = v / ω` per axis.
pub fn initial_state(positions: [f64; 3], velocities: [f64; 3], params: &SpringParams) -> [Complex64; 3] {
    let wr = params.omega_r();
    let wz = params.omega_z();
    [
        Complex64::new(positions[0], velocities[0] / wr),
        Complex64::new(positions[1], velocities[1] / wr),
        Complex64::new(positions[2], velocities[2] / wz),
    ]
}

/// `U = exp(tL) V`.
pub fn back_transform(t: f64, v: &[Complex64; 3], params: &SpringParams) -> [Complex64; 3] {
    let diag = params.linear_diag();
    std::array::from_fn(|j| v[j] * Complex64::from_polar(1.0, diag[j].im * t))
}

/// Infinite-window averaged system: only the exactly resonant terms survive.
pub fn whitham_limit_rhs(v: &[Complex64; 3], params: &SpringParams) -> Result<[Complex64; 3]> {
    if !params.is_resonant() {
        return Err(Error::RequiresResonance {
            freq_ratio: params.freq_ratio(),
        });
    }
    let cxy = params.c_xy();
    let cz = params.c_z();
    let [x, y, z] = *v;
    Ok([cxy * z * x.conj(), cxy * z * y.conj(), cz * (x * x + y * y)])
}

/// Hamiltonian of the swinging spring (J per unit mass).
pub fn energy(u: &[Complex64; 3], params: &SpringParams) -> f64 {
    let wr = params.omega_r();
    let wz = params.omega_z();
    let lambda = params.lambda();
    let (x, y, z) = (u[0].re, u[1].re, u[2].re);
    let (vx, vy, vz) = (wr * u[0].im, wr * u[1].im, wz * u[2].im);
    let r2 = x * x + y * y;
    0.5 * (vx * vx + vy * vy + vz * vz) + 0.5 * wr * wr * r2 + 0.5 * wz * wz * z * z - 0.5 * lambda * r2 * z
}
