use rand::Rng;

use super::Axis;
use crate::scalar::Real;
use crate::skeleton_io::SkeletonSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationMode {
    /// Uniform angle in `[0, 2π)` about the up axis.
    AboutUpAxis,
    /// Haar-uniform over SO(3).
    So3Uniform,
}

impl std::str::FromStr for RotationMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "up" | "about_up_axis" | "about-up-axis" => Ok(RotationMode::AboutUpAxis),
            "so3" | "so3_uniform" | "so3-uniform" => Ok(RotationMode::So3Uniform),
            other => Err(crate::Error::config(format!("unknown rotation mode {other:?}"))),
        }
    }
}

impl RotationMode {
    pub fn name(self) -> &'static str {
        match self {
            RotationMode::AboutUpAxis => "about_up_axis",
            RotationMode::So3Uniform => "so3_uniform",
        }
    }
}

/// Proper rotation matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation<T> {
    m: [[T; 3]; 3],
}

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self { m: [[o, z, z], [z, o, z], [z, z, o]] }
    }

    /// Right-handed rotation by `angle` about a coordinate axis.
    pub fn about_axis(axis: Axis, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (o, z) = (T::one(), T::zero());
        let m = match axis {
            Axis::X => [[o, z, z], [z, c, -s], [z, s, c]],
            Axis::Y => [[c, z, s], [z, o, z], [-s, z, c]],
            Axis::Z => [[c, -s, z], [s, c, z], [z, z, o]],
        };
        Self { m }
    }

    /// From a quaternion `w + xi + yj + zk`; normalized first.
    pub fn from_quaternion(w: T, x: T, y: T, z: T) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        let two = T::lit(2.0);
        let o = T::one();
        Self {
            m: [
                [o - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
                [two * (x * y + w * z), o - two * (x * x + z * z), two * (y * z - w * x)],
                [two * (x * z - w * y), two * (y * z + w * x), o - two * (x * x + y * y)],
            ],
        }
    }

    /// Orthonormal check, used to validate externally supplied matrices.
    pub fn from_matrix(m: [[T; 3]; 3], tol: T) -> Option<Self> {
        let r = Self { m };
        (r.orthonormality_error() <= tol && (r.determinant() - T::one()).abs() <= tol).then_some(r)
    }

    pub fn matrix(&self) -> &[[T; 3]; 3] {
        &self.m
    }

    #[inline]
    pub fn apply(&self, p: [T; 3]) -> [T; 3] {
        let m = &self.m;
        [
            m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2],
            m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2],
            m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2],
        ]
    }

    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = self.m;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[j][i];
            }
        }
        Self { m }
    }

    pub fn determinant(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry of `|RᵀR − I|`.
    pub fn orthonormality_error(&self) -> T {
        let rtr = self.transpose().compose(self);
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((rtr.m[i][j] - target).abs());
            }
        }
        worst
    }
}

pub fn sample_rotation<T: Real, R: Rng + ?Sized>(rng: &mut R, mode: RotationMode, up: Axis) -> Rotation<T> {
    match mode {
        RotationMode::AboutUpAxis => {
            let angle = T::lit(rng.random::<f64>() * std::f64::consts::TAU);
            Rotation::about_axis(up, angle)
        }
        RotationMode::So3Uniform => {
            // Shoemake's subgroup algorithm: uniform unit quaternion.
            let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            let tau = std::f64::consts::TAU;
            let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
            let q = [a * (tau * u2).sin(), a * (tau * u2).cos(), b * (tau * u3).sin(), b * (tau * u3).cos()];
            Rotation::from_quaternion(T::lit(q[3]), T::lit(q[0]), T::lit(q[1]), T::lit(q[2]))
        }
    }
}

/// Rotates every joint of every frame by `rotation`.
pub fn rotate<T: Real>(seq: &SkeletonSequence<T>, rotation: &Rotation<T>) -> SkeletonSequence<T> {
    seq.map_points(|_, p| rotation.apply(p)).expect("rotation preserves shape and finiteness")
}

/// One rotation per frame.
pub fn rotate_frames<T: Real>(seq: &SkeletonSequence<T>, rotations: &[Rotation<T>]) -> SkeletonSequence<T> {
    assert_eq!(rotations.len(), seq.frames(), "one rotation per frame");
    seq.map_points(|t, p| rotations[t].apply(p)).expect("rotation preserves shape and finiteness")
}
