use std::f64::consts::{PI, TAU};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use sph_hands::harmonics::{assoc_legendre, sph_harm, DegreeSet, HarmonicIndex};
use sph_hands::verify::orthonormality_error;
use sph_hands::Complex;

/// Textbook closed forms for ℓ ≤ 2, Condon–Shortley phase included.
fn closed_form(l: u32, m: i32, theta: f64, phi: f64) -> Complex {
    let (s, c) = theta.sin_cos();
    let e = |k: i32| Complex::from_polar(1.0, k as f64 * phi);
    let k = |x: f64| x / PI.sqrt();
    match (l, m) {
        (0, 0) => Complex::new(0.5 / PI.sqrt(), 0.0),
        (1, 0) => Complex::new(k(0.5 * 3f64.sqrt()) * c, 0.0),
        (1, 1) => -e(1) * k(0.5 * 1.5f64.sqrt()) * s,
        (1, -1) => e(-1) * k(0.5 * 1.5f64.sqrt()) * s,
        (2, 0) => Complex::new(k(0.25 * 5f64.sqrt()) * (3.0 * c * c - 1.0), 0.0),
        (2, 1) => -e(1) * k(0.5 * 7.5f64.sqrt()) * s * c,
        (2, -1) => e(-1) * k(0.5 * 7.5f64.sqrt()) * s * c,
        (2, 2) => e(2) * k(0.25 * 7.5f64.sqrt()) * s * s,
        (2, -2) => e(-2) * k(0.25 * 7.5f64.sqrt()) * s * s,
        _ => unreachable!(),
    }
}

fn low_orders() -> impl Iterator<Item = (u32, i32)> {
    (0..=2u32).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m)))
}

#[test]
fn reference_points() {
    assert_abs_diff_eq!(assoc_legendre(1, 1, 0.5).unwrap(), -0.75f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(assoc_legendre(1, 1, 0.5).unwrap(), -0.8660254037844386, epsilon = 1e-12);
    let y10 = sph_harm(HarmonicIndex::new(1, 0).unwrap(), 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(y10.re, 0.4886025119029199, epsilon = 1e-12);
    assert_abs_diff_eq!(y10.im, 0.0, epsilon = 1e-12);
    let y11 = sph_harm(HarmonicIndex::new(1, 1).unwrap(), PI / 2.0, 0.0).unwrap();
    assert_abs_diff_eq!(y11.re, -0.3454941494713355, epsilon = 1e-12);
    assert_abs_diff_eq!(y11.im, 0.0, epsilon = 1e-12);
}

#[test]
fn quadrature_orthonormality() {
    let err = orthonormality_error(2, 32, 64).unwrap();
    assert!(err < 1e-9, "{err}");
    // ℓ up to 4 still integrates exactly at this resolution.
    assert!(orthonormality_error(4, 32, 64).unwrap() < 1e-9);
}

#[test]
fn degree_set_counts() {
    assert_eq!(DegreeSet::default().coefficient_count(), 8);
    assert_eq!(DegreeSet::new(vec![0, 1, 2, 3]).unwrap().coefficient_count(), 16);
    assert!(DegreeSet::new(vec![]).is_err());
}

proptest! {
    #[test]
    fn matches_closed_forms(theta in 0.0..=PI, phi in 0.0..TAU) {
        for (l, m) in low_orders() {
            let y = sph_harm(HarmonicIndex::new(l, m).unwrap(), theta, phi).unwrap();
            let want = closed_form(l, m, theta, phi);
            prop_assert!((y - want).norm() < 1e-13, "Y_{l}^{m}: {y} vs {want}");
        }
    }

    #[test]
    fn conjugation_symmetry(theta in 0.0..=PI, phi in 0.0..TAU, l in 0u32..=8) {
        for m in 1..=l as i32 {
            let pos = sph_harm(HarmonicIndex::new(l, m).unwrap(), theta, phi).unwrap();
            let neg = sph_harm(HarmonicIndex::new(l, -m).unwrap(), theta, phi).unwrap();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((neg - pos.conj() * sign).norm() < 1e-12);
        }
    }

    #[test]
    fn magnitude_ignores_azimuth(theta in 0.0..=PI, phi in 0.0..TAU, alpha in 0.0..TAU, l in 0u32..=8) {
        let shifted = (phi + alpha) % TAU;
        for m in -(l as i32)..=l as i32 {
            let i = HarmonicIndex::new(l, m).unwrap();
            let d = sph_harm(i, theta, shifted).unwrap().norm() - sph_harm(i, theta, phi).unwrap().norm();
            prop_assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn unsold_sum_rule(x in -1.0f64..=1.0, l in 0usize..=8) {
        // Unsöld: Σ_m |Y_ℓ^m|² = (2ℓ+1)/4π at every point.
        let theta = x.acos();
        let total: f64 = (-(l as i32)..=l as i32)
            .map(|m| sph_harm(HarmonicIndex::new(l as u32, m).unwrap(), theta, 0.3).unwrap().norm_sqr())
            .sum();
        prop_assert!((total - (2 * l + 1) as f64 / (4.0 * PI)).abs() < 1e-12);
    }
}
