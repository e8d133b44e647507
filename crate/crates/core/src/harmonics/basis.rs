use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use super::legendre::{legendre_table, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// Degree `ℓ ≥ 0` and order `|m| ≤ ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    ell: u32,
    m: i32,
}

impl HarmonicIndex {
    pub fn new(ell: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > ell {
            return Err(Error::domain(format!("|m|={} exceeds degree {ell}", m.unsigned_abs())));
        }
        if ell as usize > MAX_DEGREE {
            return Err(Error::domain(format!("degree {ell} above supported maximum {MAX_DEGREE}")));
        }
        Ok(Self { ell, m })
    }

    pub fn ell(self) -> u32 {
        self.ell
    }

    pub fn m(self) -> i32 {
        self.m
    }
}

/// Sorted set of degrees, `{1, 2}` by default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSet(Vec<u32>);

impl Default for DegreeSet {
    fn default() -> Self {
        Self(vec![1, 2])
    }
}

impl DegreeSet {
    pub fn new(mut degrees: Vec<u32>) -> Result<Self> {
        degrees.sort_unstable();
        degrees.dedup();
        if degrees.is_empty() {
            return Err(Error::config("degree set is empty"));
        }
        if let Some(&d) = degrees.iter().find(|&&d| d as usize > MAX_DEGREE) {
            return Err(Error::config(format!("degree {d} above supported maximum {MAX_DEGREE}")));
        }
        Ok(Self(degrees))
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn max_degree(&self) -> u32 {
        *self.0.last().expect("nonempty")
    }

    /// `Σ (2ℓ+1)`.
    pub fn coefficient_count(&self) -> usize {
        self.0.iter().map(|&l| 2 * l as usize + 1).sum()
    }

    /// Indices in `(ℓ ascending, m from −ℓ to ℓ)` order.
    pub fn indices(&self) -> impl Iterator<Item = HarmonicIndex> + '_ {
        self.0.iter().flat_map(|&l| (-(l as i32)..=l as i32).map(move |m| HarmonicIndex { ell: l, m }))
    }
}

impl fmt::Display for DegreeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for DegreeSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let degrees = s
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| Error::config(format!("bad degree {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(degrees)
    }
}

/// `sqrt((ℓ−m)! (2ℓ+1) / ((ℓ+m)! 4π))` for `m ≥ 0`.
fn normalization<T: Real>(ell: usize, m: usize) -> T {
    // (ℓ−m)!/(ℓ+m)! = 1 / Π_{k=ℓ−m+1}^{ℓ+m} k
    let mut ratio = T::one();
    for k in (ell - m + 1)..=(ell + m) {
        ratio = ratio / from_usize::<T>(k);
    }
    (ratio * from_usize::<T>(2 * ell + 1) / (T::lit(4.0) * T::PI())).sqrt()
}

/// Complex spherical harmonic `Y_ℓ^m(θ, φ)`.
///
/// Nonnegative orders follow the closed form with the Condon–Shortley
/// Legendre function; negative orders use `Y_ℓ^{−m} = (−1)^m conj(Y_ℓ^m)`.
pub fn sph_harm<T: Real>(idx: HarmonicIndex, theta: T, phi: T) -> Result<Complex<T>> {
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(Error::domain(format!("theta {theta} outside [0, pi]")));
    }
    if !(phi >= T::zero() && phi < T::TAU()) {
        return Err(Error::domain(format!("phi {phi} outside [0, 2pi)")));
    }
    Ok(sph_harm_unchecked(idx, theta, phi))
}

fn sph_harm_unchecked<T: Real>(idx: HarmonicIndex, theta: T, phi: T) -> Complex<T> {
    let ell = idx.ell as usize;
    let am = idx.m.unsigned_abs() as usize;
    let p = super::legendre::legendre_recurrence(ell, am, theta.cos());
    positive_order(ell, am, p, phi, idx.m < 0)
}

#[inline]
fn positive_order<T: Real>(ell: usize, am: usize, legendre: T, phi: T, negate_order: bool) -> Complex<T> {
    let amp = normalization::<T>(ell, am) * legendre;
    let (s, c) = (from_usize::<T>(am) * phi).sin_cos();
    let y = Complex::new(amp * c, amp * s);
    if negate_order {
        let y = y.conj();
        if am % 2 == 1 {
            -y
        } else {
            y
        }
    } else {
        y
    }
}

/// Evaluates every `Y_ℓ^m` of a degree set at once.
#[derive(Debug, Clone)]
pub struct BasisEvaluator<T> {
    degrees: DegreeSet,
    norms: Vec<T>,
    lmax: usize,
}

impl<T: Real> BasisEvaluator<T> {
    pub fn new(degrees: DegreeSet) -> Self {
        let lmax = degrees.max_degree() as usize;
        let norms =
            degrees.indices().map(|i| normalization::<T>(i.ell as usize, i.m.unsigned_abs() as usize)).collect();
        Self { degrees, norms, lmax }
    }

    pub fn degrees(&self) -> &DegreeSet {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    /// Writes `Y_ℓ^m(θ, φ)` into `out` in [`DegreeSet::indices`] order.
    pub fn eval_into(&self, theta: T, phi: T, out: &mut [Complex<T>]) {
        debug_assert_eq!(out.len(), self.norms.len());
        let table = legendre_table(self.lmax, theta.cos());
        for ((slot, idx), &norm) in out.iter_mut().zip(self.degrees.indices()).zip(&self.norms) {
            let l = idx.ell as usize;
            let am = idx.m.unsigned_abs() as usize;
            let amp = norm * table[l * (l + 1) / 2 + am];
            let (s, c) = (from_usize::<T>(am) * phi).sin_cos();
            let y = Complex::new(amp * c, amp * s);
            *slot = if idx.m < 0 {
                if am % 2 == 1 {
                    -y.conj()
                } else {
                    y.conj()
                }
            } else {
                y
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn y(l: u32, m: i32, theta: f64, phi: f64) -> Complex<f64> {
        sph_harm(HarmonicIndex::new(l, m).unwrap(), theta, phi).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let y00 = 1.0 / (2.0 * PI.sqrt());
        for &(t, p) in &[(0.0, 0.0), (1.0, 2.0), (PI, 6.0)] {
            let v = y(0, 0, t, p);
            assert!((v.re - y00).abs() < 1e-15 && v.im == 0.0);
        }
        let v = y(1, 0, 0.0, 0.0);
        assert!((v.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        let v = y(1, 1, FRAC_PI_2, 0.0);
        assert!((v.re + (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn magnitude_ignores_azimuth() {
        let base = y(1, 1, FRAC_PI_2, 0.0).norm();
        for phi in [1.0, 2.0, 3.0] {
            assert!((y(1, 1, FRAC_PI_2, phi).norm() - base).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_order_conjugation() {
        for l in 0..=4u32 {
            for m in 1..=l as i32 {
                let (t, p) = (0.7, 4.1);
                let pos = y(l, m, t, p);
                let neg = y(l, -m, t, p);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((neg - pos.conj() * sign).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn evaluator_matches_pointwise() {
        let degrees = DegreeSet::new(vec![0, 1, 2, 3]).unwrap();
        let eval = BasisEvaluator::<f64>::new(degrees.clone());
        let mut out = vec![Complex::default(); eval.len()];
        for &(t, p) in &[(0.0, 0.0), (0.4, 1.3), (2.9, 5.5), (PI, 0.1)] {
            eval.eval_into(t, p, &mut out);
            for (v, idx) in out.iter().zip(degrees.indices()) {
                assert!((v - sph_harm(idx, t, p).unwrap()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn argument_checks() {
        let idx = HarmonicIndex::new(1, 0).unwrap();
        assert!(sph_harm(idx, -0.1f64, 0.0).is_err());
        assert!(sph_harm(idx, 0.1f64, 2.0 * PI).is_err());
        assert!(HarmonicIndex::new(1, -2).is_err());
    }

    #[test]
    fn degree_set_parsing() {
        let d: DegreeSet = "2, 1,2".parse().unwrap();
        assert_eq!(d.degrees(), &[1, 2]);
        assert_eq!(d.coefficient_count(), 8);
        assert_eq!(d.to_string(), "1,2");
        assert!("".parse::<DegreeSet>().is_err());
        assert!("9".parse::<DegreeSet>().is_err());
    }
}
