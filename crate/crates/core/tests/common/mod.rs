//! Independent oracles shared by the integration tests.
#![allow(dead_code)]
// Quadrature nodes and weights are kept as tabulated.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use phase_averaging::model::{initial_state, swing_spring_model, DEFAULT_POSITIONS, DEFAULT_VELOCITIES};
use phase_averaging::{ResonantQuadraticModel, ResonantTerm, SpringParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub const I: C = C::new(0.0, 1.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(r: &mut impl Rng, scale: f64) -> C {
    c(r.random_range(-scale..scale), r.random_range(-scale..scale))
}

pub fn spring() -> (SpringParams, ResonantQuadraticModel, Vec<C>) {
    let params = SpringParams::default();
    let model = swing_spring_model(&params).unwrap();
    let y0 = initial_state(DEFAULT_POSITIONS, DEFAULT_VELOCITIES, &params).to_vec();
    (params, model, y0)
}

pub fn rel_err(a: C, b: C) -> f64 {
    let scale = b.norm();
    if scale == 0.0 {
        a.norm()
    } else {
        (a - b).norm() / scale
    }
}

pub fn max_rel_err(a: &[C], b: &[C]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> C>(f: &F, a: f64, b: f64) -> (C, f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = half * XGK[j];
        let (f1, f2) = (f(mid - x), f(mid + x));
        kron += (f1 + f2) * WGK[j];
        l1 += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm(), l1 * half.abs())
}

/// Globally adaptive Gauss–Kronrod quadrature of a complex integrand.
/// Returns the integral and the integral of `|f|`.
pub fn integrate_adaptive<F: Fn(f64) -> C>(f: F, a: f64, b: f64, rel_tol: f64) -> (C, f64) {
    let mut intervals = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..20_000 {
        let total: C = intervals.iter().map(|iv| iv.2 .0).sum();
        let err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        let l1: f64 = intervals.iter().map(|iv| iv.2 .2).sum();
        // Below a few ulps of the |f| scale no refinement can help.
        if err <= rel_tol * total.norm() || err <= 8.0 * f64::EPSILON * l1 {
            return (total, l1);
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = intervals.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        intervals.push((lo, m, gk15(&f, lo, m)));
        intervals.push((m, hi, gk15(&f, m, hi)));
    }
    let total: C = intervals.iter().map(|iv| iv.2 .0).sum();
    let l1: f64 = intervals.iter().map(|iv| iv.2 .2).sum();
    (total, l1)
}

/// Undamped shifted moment by quadrature of the contour-shifted Gaussian
/// integral `T^α (2π)^{-1/2} ∫ exp(-u²/2) (u + i c T)^α du`.
/// Returns the value and the matching `|integrand|` scale.
pub fn moment_by_quadrature(alpha: usize, freq: f64, window: f64) -> (C, f64) {
    let shift = freq * window;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    // Beyond |u| = 40 the Gaussian has decayed below e^{-800}.
    let (val, l1) = integrate_adaptive(
        |u| (c(u, shift)).powi(alpha as i32) * (-0.5 * u * u).exp() * norm,
        -40.0,
        40.0,
        1e-13,
    );
    let t_pow = window.powi(alpha as i32);
    (val * t_pow, l1 * t_pow)
}

/// Shifted moment straight from the original oscillatory integral
/// `exp(c²T²/2) ∫ ρ_T(s) s^α exp(i c s) ds`; only usable for small `cT`.
pub fn moment_direct(alpha: usize, freq: f64, window: f64) -> C {
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * window);
    let lim = 40.0 * window;
    let (val, _) = integrate_adaptive(
        |s| C::from_polar(1.0, freq * s) * s.powi(alpha as i32) * (-0.5 * (s / window).powi(2)).exp() * norm,
        -lim,
        lim,
        1e-13,
    );
    val * (0.5 * (freq * window).powi(2)).exp()
}

/// Random bilinear term in dimension `dim`: each output component is
/// `Σ_jk A_ijk op_a(a_j) op_b(b_k)` with optional conjugation per slot.
pub fn random_term(r: &mut impl Rng, dim: usize, freq: f64) -> ResonantTerm {
    let coeffs: Vec<C> = (0..dim * dim * dim).map(|_| rand_c(r, 1.0)).collect();
    let conj_a = r.random_bool(0.5);
    let conj_b = r.random_bool(0.5);
    ResonantTerm::new(freq, move |a, b, out| {
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..dim {
                let x = if conj_a { a[j].conj() } else { a[j] };
                for k in 0..dim {
                    let y = if conj_b { b[k].conj() } else { b[k] };
                    *o += coeffs[(i * dim + j) * dim + k] * x * y;
                }
            }
        }
    })
}

pub fn random_model(r: &mut impl Rng, dim: usize, terms: usize, max_freq: f64) -> ResonantQuadraticModel {
    let diag = (0..dim).map(|_| c(0.0, r.random_range(-5.0..5.0))).collect();
    let terms = (0..terms)
        .map(|_| {
            let f = r.random_range(-max_freq..max_freq);
            random_term(r, dim, f)
        })
        .collect();
    ResonantQuadraticModel::new("random", diag, terms).unwrap()
}

/// The fully explicit p = 2 tendencies, transcribed term by term from the
/// summarised closed forms. `F_kl` is symmetrised, so the factors of two on
/// mixed terms account for both summation orders.
pub fn explicit_p2_rhs(t: f64, v: [&[C]; 3], model: &ResonantQuadraticModel, window: f64) -> [Vec<C>; 3] {
    let dim = v[0].len();
    let mut out = [
        vec![C::default(); dim],
        vec![C::default(); dim],
        vec![C::default(); dim],
    ];
    let tt = window;
    for term in model.terms() {
        let cm = term.frequency();
        let f = |k: usize, l: usize| -> Vec<C> {
            let a = term.apply(v[k], v[l]);
            let b = term.apply(v[l], v[k]);
            a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
        };
        let (f00, f11, f22, f01, f02, f12) = (f(0, 0), f(1, 1), f(2, 2), f(0, 1), f(0, 2), f(1, 2));
        let pre = C::from_polar(1.0, cm * t) * (-0.5 * cm * cm * tt * tt).exp();
        let (c2, c3, c4, c5, c6) = (cm.powi(2), cm.powi(3), cm.powi(4), cm.powi(5), cm.powi(6));
        let (t2, t4, t6, t8, t10) = (tt.powi(2), tt.powi(4), tt.powi(6), tt.powi(8), tt.powi(10));

        let v0 = [
            c(1.0 + 0.5 * c2 * t2, 0.0),
            c(1.5 * c2 * t4 - 0.5 * c4 * t6, 0.0),
            c(-3.0 * t4 + 13.5 * c2 * t6 - 6.0 * c4 * t8 + 0.5 * c6 * t10, 0.0),
            I * (c3 * t4),
            c(3.0 * c2 * t4 - c4 * t6, 0.0),
            I * (-6.0 * cm * t4 + 7.0 * c3 * t6 - c5 * t8),
        ];
        let v1 = [
            I * cm,
            I * (3.0 * cm * t2 - c3 * t4),
            I * (15.0 * cm * t4 - 10.0 * c3 * t6 + c5 * t8),
            c(2.0 * (1.0 - c2 * t2), 0.0),
            I * (2.0 * (3.0 * cm * t2 - c3 * t4)),
            c(2.0 * (3.0 * t2 - 6.0 * c2 * t4 + c4 * t6), 0.0),
        ];
        let v2 = [
            c(-0.5 * c2, 0.0),
            c(1.0 - 2.5 * c2 * t2 + 0.5 * c4 * t4, 0.0),
            c(6.0 * t2 - 19.5 * c2 * t4 + 7.0 * c4 * t6 - 0.5 * c6 * t8, 0.0),
            I * (2.0 * cm - c3 * t2),
            c(2.0 - 5.0 * c2 * t2 + c4 * t4, 0.0),
            I * (12.0 * cm * t2 - 9.0 * c3 * t4 + c5 * t6),
        ];
        let fs = [&f00, &f11, &f22, &f01, &f02, &f12];
        for (row, coeffs) in [v0, v1, v2].iter().enumerate() {
            for (fv, k) in fs.iter().zip(coeffs) {
                for i in 0..dim {
                    out[row][i] += pre * k * fv[i];
                }
            }
        }
    }
    out
}

/// Physical swinging-spring right-hand side in real coordinates
/// `(x, y, z, ẋ, ẏ, ż)`, from the Lagrangian equations of motion.
pub fn spring_ode(params: &SpringParams, s: &[f64; 6]) -> [f64; 6] {
    let (wr, wz, lam) = (params.omega_r(), params.omega_z(), params.lambda());
    let (x, y, z) = (s[0], s[1], s[2]);
    [
        s[3],
        s[4],
        s[5],
        -wr * wr * x + lam * x * z,
        -wr * wr * y + lam * y * z,
        -wz * wz * z + 0.5 * lam * (x * x + y * y),
    ]
}

/// Classical fixed-step RK4 on the real system.
pub fn rk4_real(params: &SpringParams, s0: [f64; 6], dt: f64, steps: usize) -> Vec<[f64; 6]> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = s0;
    out.push(s);
    let add = |a: &[f64; 6], b: &[f64; 6], h: f64| std::array::from_fn::<f64, 6, _>(|i| a[i] + h * b[i]);
    for _ in 0..steps {
        let k1 = spring_ode(params, &s);
        let k2 = spring_ode(params, &add(&s, &k1, 0.5 * dt));
        let k3 = spring_ode(params, &add(&s, &k2, 0.5 * dt));
        let k4 = spring_ode(params, &add(&s, &k3, dt));
        s = std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        out.push(s);
    }
    out
}

/// Swinging-spring energy in real coordinates.
pub fn real_energy(params: &SpringParams, s: &[f64; 6]) -> f64 {
    let (wr, wz, lam) = (params.omega_r(), params.omega_z(), params.lambda());
    let (x, y, z) = (s[0], s[1], s[2]);
    0.5 * (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]) + 0.5 * wr * wr * (x * x + y * y) + 0.5 * wz * wz * z * z
        - 0.5 * lam * (x * x + y * y) * z
}
