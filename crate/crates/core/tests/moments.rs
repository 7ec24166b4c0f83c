mod common;

use common::*;
use phase_averaging::averaging::{damping_factor, gaussian_moment, shifted_moment};
use proptest::prelude::*;

/// Relative agreement with the quadrature oracle. The error budget is the
/// tolerance times the value, but never below the rounding floor of the
/// oracle's integrand magnitude.
fn check(alpha: usize, freq: f64, window: f64, tol: f64) -> Result<(), String> {
    let got = shifted_moment(alpha, freq, window);
    let (want, l1) = moment_by_quadrature(alpha, freq, window);
    let err = (got - want).norm();
    let budget = (tol * want.norm()).max(64.0 * f64::EPSILON * l1).max(1e-300);
    if err <= budget {
        Ok(())
    } else {
        Err(format!(
            "alpha={alpha} c={freq} T={window}: got {got}, quadrature {want}, rel err {:.3e}",
            err / want.norm()
        ))
    }
}

#[test]
fn tabulated_grid_matches_quadrature() {
    let freqs = [
        0.0,
        1.3,
        -1.3,
        2.0 * std::f64::consts::PI,
        -2.0 * std::f64::consts::PI,
        4.0 * std::f64::consts::PI,
        -4.0 * std::f64::consts::PI,
    ];
    let mut worst: f64 = 0.0;
    for alpha in 0..=12 {
        for &f in &freqs {
            for &t in &[0.005, 0.1, 0.5, 2.0] {
                let got = shifted_moment(alpha, f, t);
                let (want, _) = moment_by_quadrature(alpha, f, t);
                if want.norm() > 0.0 {
                    worst = worst.max((got - want).norm() / want.norm());
                } else {
                    assert!(got.norm() < 1e-30, "alpha={alpha} c={f} T={t}: {got}");
                }
            }
        }
    }
    assert!(worst <= 1e-10, "worst relative error {worst:.3e}");
}

#[test]
fn oscillatory_form_agrees_for_small_shift() {
    for alpha in 0..=8 {
        for &(f, t) in &[(1.3, 0.1), (0.5, 0.5), (2.0, 0.2), (-3.0, 0.05)] {
            let got = shifted_moment(alpha, f, t);
            let want = moment_direct(alpha, f, t);
            let scale = t.powi(alpha as i32) * (1..=alpha).product::<usize>() as f64;
            assert!(
                (got - want).norm() <= 1e-11 * scale.max(want.norm()),
                "alpha={alpha} c={f} T={t}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn real_moments_are_double_factorials() {
    for &t in &[0.001f64, 0.3, 7.0] {
        let mut double_fact = 1.0;
        for alpha in (0..=36).step_by(2) {
            if alpha > 0 {
                double_fact *= (alpha - 1) as f64;
            }
            let want = double_fact * t.powi(alpha as i32);
            assert!((gaussian_moment(alpha, t) - want).abs() <= 1e-14 * want);
            assert_eq!(gaussian_moment(alpha + 1, t), 0.0);
        }
    }
}

#[test]
fn damping_factor_values() {
    assert_eq!(damping_factor(0.0, 3.0), 1.0);
    assert!((damping_factor(2.0, 0.5) - (-0.5f64).exp()).abs() < 1e-16);
    assert_eq!(damping_factor(4.0 * std::f64::consts::PI, 10.0), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_quadrature_everywhere(alpha in 0usize..=36, freq in -50.0f64..50.0, log_t in -3.0f64..1.0) {
        let window = 10f64.powf(log_t);
        prop_assert!(check(alpha, freq, window, 1e-10).is_ok(), "{}", check(alpha, freq, window, 1e-10).unwrap_err());
    }

    #[test]
    fn conjugate_symmetry(alpha in 0usize..=36, freq in -50.0f64..50.0, log_t in -3.0f64..1.0) {
        let window = 10f64.powf(log_t);
        prop_assert_eq!(shifted_moment(alpha, -freq, window), shifted_moment(alpha, freq, window).conj());
    }

    #[test]
    fn parity_of_real_part(alpha in 0usize..=36, freq in -50.0f64..50.0, window in 1e-3f64..10.0) {
        // R_α is real for even α and imaginary for odd α.
        let r = shifted_moment(alpha, freq, window);
        if alpha % 2 == 0 {
            prop_assert_eq!(r.im, 0.0);
        } else {
            prop_assert_eq!(r.re, 0.0);
        }
    }
}
