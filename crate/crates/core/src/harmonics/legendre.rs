use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// Highest degree the harmonics code accepts.
pub const MAX_DEGREE: usize = 8;

/// Associated Legendre function `P_ℓ^m(x)` with the Condon–Shortley phase.
///
/// Evaluated by the upward recurrence in `ℓ`, seeded from
/// `P_m^m = (−1)^m (2m−1)!! (1−x²)^{m/2}` and `P_{m+1}^m = x (2m+1) P_m^m`.
pub fn assoc_legendre<T: Real>(ell: usize, m: usize, x: T) -> Result<T> {
    if m > ell {
        return Err(Error::domain(format!("order m={m} exceeds degree l={ell}")));
    }
    if ell > MAX_DEGREE {
        return Err(Error::domain(format!("degree {ell} above supported maximum {MAX_DEGREE}")));
    }
    if x.is_nan() || x.abs() > T::one() {
        return Err(Error::domain(format!("legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_recurrence(ell, m, x))
}

pub(crate) fn legendre_recurrence<T: Real>(ell: usize, m: usize, x: T) -> T {
    let one = T::one();
    let somx2 = ((one - x) * (one + x)).sqrt();
    let mut pmm = one;
    let mut odd = one;
    for _ in 0..m {
        pmm = -pmm * odd * somx2;
        odd = odd + T::lit(2.0);
    }
    if ell == m {
        return pmm;
    }
    let mut pmm1 = x * from_usize::<T>(2 * m + 1) * pmm;
    if ell == m + 1 {
        return pmm1;
    }
    let mut pll = T::zero();
    for l in (m + 2)..=ell {
        pll = (x * from_usize::<T>(2 * l - 1) * pmm1 - from_usize::<T>(l + m - 1) * pmm) / from_usize::<T>(l - m);
        pmm = pmm1;
        pmm1 = pll;
    }
    pll
}

/// All `P_ℓ^m(x)` for `0 ≤ m ≤ ℓ ≤ lmax`, stored at `ℓ(ℓ+1)/2 + m`.
pub(crate) fn legendre_table<T: Real>(lmax: usize, x: T) -> Vec<T> {
    let one = T::one();
    let somx2 = ((one - x) * (one + x)).sqrt();
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut table = vec![T::zero(); idx(lmax, lmax) + 1];
    let mut pmm = one;
    for m in 0..=lmax {
        if m > 0 {
            pmm = -pmm * from_usize::<T>(2 * m - 1) * somx2;
        }
        table[idx(m, m)] = pmm;
        if m < lmax {
            table[idx(m + 1, m)] = x * from_usize::<T>(2 * m + 1) * pmm;
        }
        for l in (m + 2)..=lmax {
            table[idx(l, m)] = (x * from_usize::<T>(2 * l - 1) * table[idx(l - 1, m)]
                - from_usize::<T>(l + m - 1) * table[idx(l - 2, m)])
                / from_usize::<T>(l - m);
        }
    }
    table
}
