use std::str::FromStr;

use crate::error::Error;
use crate::scalar::Real;

/// Which Cartesian axis plays the role of the polar (z) axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Axis {
    X,
    #[default]
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    /// Cyclic permutation that moves this axis into the z slot while
    /// keeping the frame right-handed.
    #[inline]
    pub fn to_polar_frame<T: Copy>(self, [x, y, z]: [T; 3]) -> [T; 3] {
        match self {
            Axis::Z => [x, y, z],
            Axis::Y => [z, x, y],
            Axis::X => [y, z, x],
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::config(format!("unknown axis {other:?}"))),
        }
    }
}

/// `(r, θ, φ)` with `r ≥ 0`, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
///
/// The zero vector is represented as `(0, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SphericalPoint<T> {
    pub r: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Real> SphericalPoint<T> {
    pub fn origin() -> Self {
        Self { r: T::zero(), theta: T::zero(), phi: T::zero() }
    }

    pub fn is_origin(&self) -> bool {
        self.r == T::zero()
    }
}

/// Cartesian to spherical after permuting `up` into the polar slot.
pub fn cart_to_spherical<T: Real>(x: T, y: T, z: T, up: Axis) -> SphericalPoint<T> {
    let [x, y, z] = up.to_polar_frame([x, y, z]);
    let rho = x.hypot(y);
    let r = rho.hypot(z);
    if r == T::zero() {
        return SphericalPoint::origin();
    }
    let theta = rho.atan2(z);
    let phi = if rho == T::zero() { T::zero() } else { wrap_angle(y.atan2(x)) };
    SphericalPoint { r, theta, phi }
}

/// Maps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let tau = T::TAU();
    let mut w = a % tau;
    if w < T::zero() {
        w = w + tau;
    }
    // `-tiny + 2π` can round up to exactly 2π.
    if w >= tau {
        w = T::zero();
    }
    w
}
