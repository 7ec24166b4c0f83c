//! Closed-form Gaussian moments.
//!
//! With the normalized weight `exp(-s²/2T²) / sqrt(2πT²)`:
//!
//! * `I_α = ∫ w(s) s^α ds` satisfies `I_α = T² (α-1) I_{α-2}`, `I_0 = 1`, and
//!   vanishes for odd `α`.
//! * `∫ w(s) exp(ics) s^α ds = exp(-c²T²/2) R_α(c)` with
//!   `R_α = Σ_β C(α,β) I_{α-β} (i c T²)^β`. The damping factor is kept apart
//!   from `R_α`.

use num_complex::Complex64;

/// Largest moment order covered by the precomputed binomial table
/// (`3p` for the maximum supported degree 12).
pub const MAX_MOMENT_ORDER: usize = 36;

const BINOMIAL: [[u64; MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1] = binomial_table();

const fn binomial_table() -> [[u64; MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1] {
    let mut table = [[0u64; MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1];
    let mut n = 0;
    while n <= MAX_MOMENT_ORDER {
        table[n][0] = 1;
        let mut k = 1;
        while k <= n {
            table[n][k] = table[n - 1][k - 1] + if k < n { table[n - 1][k] } else { 0 };
            k += 1;
        }
        n += 1;
    }
    table
}

/// Binomial coefficient `C(n, k)` for `n <= MAX_MOMENT_ORDER`.
pub fn binomial(n: usize, k: usize) -> u64 {
    assert!(n <= MAX_MOMENT_ORDER, "binomial table covers n <= {MAX_MOMENT_ORDER}");
    if k > n {
        0
    } else {
        BINOMIAL[n][k]
    }
}

/// Real Gaussian moment `I_α` for window `window` (`T > 0`).
///
/// Odd orders return exactly zero.
pub fn gaussian_moment(alpha: usize, window: f64) -> f64 {
    if alpha % 2 == 1 {
        return 0.0;
    }
    let t2 = window * window;
    let mut moment = 1.0;
    let mut a = 2;
    while a <= alpha {
        moment *= t2 * (a - 1) as f64;
        a += 2;
    }
    moment
}

/// All moments `I_0 ..= I_max_order`.
pub fn gaussian_moments(max_order: usize, window: f64) -> Vec<f64> {
    let t2 = window * window;
    let mut out = vec![0.0; max_order + 1];
    out[0] = 1.0;
    for a in 2..=max_order {
        if a % 2 == 0 {
            out[a] = t2 * (a - 1) as f64 * out[a - 2];
        }
    }
    out
}

/// Shifted moment `R_α(c)` without the `exp(-c²T²/2)` damping.
///
/// # Panics
///
/// If `alpha > MAX_MOMENT_ORDER`.
pub fn shifted_moment(alpha: usize, frequency: f64, window: f64) -> Complex64 {
    shifted_moments(alpha, frequency, window)[alpha]
}

/// `R_0 ..= R_max_order` for one frequency.
///
/// The binomial sum cancels badly near the zeros of `R_α` once `cT` is a few
/// units, so the moments come from the equivalent recurrence
/// `R_{α+1} = i c T² R_α + α T² R_{α-1}`. It runs on `r_α = R_α / i^α`, which
/// is real, so even orders stay exactly real and odd orders exactly imaginary.
///
/// # Panics
///
/// If `max_order > MAX_MOMENT_ORDER`.
pub fn shifted_moments(max_order: usize, frequency: f64, window: f64) -> Vec<Complex64> {
    assert!(
        max_order <= MAX_MOMENT_ORDER,
        "moment order {max_order} exceeds {MAX_MOMENT_ORDER}"
    );
    let t2 = window * window;
    let shift = frequency * t2;
    let mut scaled = vec![0.0; max_order + 1];
    scaled[0] = 1.0;
    if max_order >= 1 {
        scaled[1] = shift;
    }
    for a in 1..max_order {
        scaled[a + 1] = shift * scaled[a] - a as f64 * t2 * scaled[a - 1];
    }
    scaled
        .iter()
        .enumerate()
        .map(|(a, &r)| match a % 4 {
            0 => Complex64::new(r, 0.0),
            1 => Complex64::new(0.0, r),
            2 => Complex64::new(-r, 0.0),
            _ => Complex64::new(0.0, -r),
        })
        .collect()
}

/// `exp(-c²T²/2)`, flushed to exact zero once it underflows.
pub fn damping_factor(frequency: f64, window: f64) -> f64 {
    let x = frequency * window;
    let d = (-0.5 * x * x).exp();
    if d < f64::MIN_POSITIVE {
        0.0
    } else {
        d
    }
}
