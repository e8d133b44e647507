use super::{cart_to_spherical, Axis, SphericalPoint};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::skeleton_io::SkeletonSequence;

/// Every joint of a subset seen from every other joint of the subset.
///
/// Entry `(t, m, i, j)` is the spherical form of `p[S[j]] − p[S[i]]`,
/// where `i` indexes the center joint and `j` the neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSphericalField<T> {
    frames: usize,
    bodies: usize,
    subset: Vec<usize>,
    up: Axis,
    points: Vec<SphericalPoint<T>>,
}

impl<T: Real> LocalSphericalField<T> {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn up_axis(&self) -> Axis {
        self.up
    }

    #[inline]
    pub fn get(&self, t: usize, m: usize, center: usize, neighbor: usize) -> SphericalPoint<T> {
        let s = self.subset.len();
        self.points[((t * self.bodies + m) * s + center) * s + neighbor]
    }

    /// Neighbors of one center joint, in subset order.
    pub fn neighborhood(&self, t: usize, m: usize, center: usize) -> &[SphericalPoint<T>] {
        let s = self.subset.len();
        let start = ((t * self.bodies + m) * s + center) * s;
        &self.points[start..start + s]
    }

    /// Same field with every radius multiplied by `c`.
    pub fn scale_radii(&self, c: T) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.r = p.r * c;
        }
        out
    }
}

pub fn validate_subset(subset: &[usize], joints: usize) -> Result<()> {
    if subset.len() < 2 {
        return Err(Error::config(format!("joint subset needs at least 2 joints, got {}", subset.len())));
    }
    if let Some(&bad) = subset.iter().find(|&&v| v >= joints) {
        return Err(Error::config(format!("joint id {bad} out of range for {joints} joints")));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("joint subset contains duplicates"));
    }
    Ok(())
}

pub fn to_local<T: Real>(seq: &SkeletonSequence<T>, subset: &[usize], up: Axis) -> Result<LocalSphericalField<T>> {
    validate_subset(subset, seq.joints())?;
    let s = subset.len();
    let mut points = Vec::with_capacity(seq.frames() * seq.bodies() * s * s);
    for t in 0..seq.frames() {
        for m in 0..seq.bodies() {
            let joints = seq.frame_body(t, m);
            for &v in subset {
                let c = joints[v];
                for &w in subset {
                    if w == v {
                        points.push(SphericalPoint::origin());
                        continue;
                    }
                    let p = joints[w];
                    points.push(cart_to_spherical(p[0] - c[0], p[1] - c[1], p[2] - c[2], up));
                }
            }
        }
    }
    Ok(LocalSphericalField { frames: seq.frames(), bodies: seq.bodies(), subset: subset.to_vec(), up, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn antipodal_pair() {
        let seq = SkeletonSequence::new(1, 1, 2, vec![[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let f = to_local(&seq, &[0, 1], Axis::Z).unwrap();
        assert_eq!(f.get(0, 0, 0, 1), SphericalPoint { r: 1.0, theta: 0.0, phi: 0.0 });
        assert_eq!(f.get(0, 0, 1, 0), SphericalPoint { r: 1.0, theta: PI, phi: 0.0 });
        assert_eq!(f.get(0, 0, 0, 0), SphericalPoint::origin());
        assert_eq!(f.get(0, 0, 1, 1), SphericalPoint::origin());
    }

    #[test]
    fn subset_validation() {
        let seq = SkeletonSequence::<f64>::zeros(1, 1, 4).unwrap();
        assert!(to_local(&seq, &[0, 4], Axis::Z).is_err());
        assert!(to_local(&seq, &[1], Axis::Z).is_err());
        assert!(to_local(&seq, &[1, 1], Axis::Z).is_err());
        assert!(to_local(&seq, &[3, 0], Axis::Z).is_ok());
    }
}
