use num_complex::Complex;

use super::basis::{BasisEvaluator, DegreeSet};
use crate::geometry::LocalSphericalField;
use crate::scalar::{from_usize, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Basis functions per (center, neighbor) pair.
    Lshr,
    /// Neighborhood transform per center joint.
    Lsht,
}

/// Complex values per frame, body, center joint, slot and `(ℓ, m)`.
///
/// For [`Provenance::Lshr`] the slot axis runs over the neighbors of the
/// subset; for [`Provenance::Lsht`] it has length one.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients<T> {
    pub(crate) degrees: DegreeSet,
    pub(crate) provenance: Provenance,
    pub(crate) frames: usize,
    pub(crate) bodies: usize,
    pub(crate) centers: usize,
    pub(crate) slots: usize,
    pub(crate) values: Vec<Complex<T>>,
}

impl<T: Real> HarmonicCoefficients<T> {
    pub fn degrees(&self) -> &DegreeSet {
        &self.degrees
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    pub fn centers(&self) -> usize {
        self.centers
    }

    /// Neighbors per center (LSHR) or 1 (LSHT).
    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Values for one `(t, m, center)`, slot-major then `(ℓ, m)`.
    pub fn block(&self, t: usize, m: usize, center: usize) -> &[Complex<T>] {
        let len = self.block_len();
        let start = ((t * self.bodies + m) * self.centers + center) * len;
        &self.values[start..start + len]
    }

    pub fn block_len(&self) -> usize {
        self.slots * self.degrees.coefficient_count()
    }

    pub fn get(&self, t: usize, m: usize, center: usize, slot: usize, k: usize) -> Complex<T> {
        self.block(t, m, center)[slot * self.degrees.coefficient_count() + k]
    }
}

/// Basis functions evaluated at every neighbor's local angles.
/// Self-pairs are exact zeros.
pub fn lshr_embed<T: Real>(field: &LocalSphericalField<T>, degrees: &DegreeSet) -> HarmonicCoefficients<T> {
    let eval = BasisEvaluator::<T>::new(degrees.clone());
    let k = eval.len();
    let s = field.subset().len();
    let mut values = vec![Complex::new(T::zero(), T::zero()); field.frames() * field.bodies() * s * s * k];
    let mut chunks = values.chunks_exact_mut(k);
    for t in 0..field.frames() {
        for m in 0..field.bodies() {
            for c in 0..s {
                for (w, p) in field.neighborhood(t, m, c).iter().enumerate() {
                    let out = chunks.next().expect("sized above");
                    if w != c {
                        eval.eval_into(p.theta, p.phi, out);
                    }
                }
            }
        }
    }
    HarmonicCoefficients {
        degrees: degrees.clone(),
        provenance: Provenance::Lshr,
        frames: field.frames(),
        bodies: field.bodies(),
        centers: s,
        slots: s,
        values,
    }
}

/// `a_ℓ^m = Σ_{w≠v} r_w · conj(Y_ℓ^m(θ_w, φ_w))` per center joint.
pub fn lsht_transform<T: Real>(field: &LocalSphericalField<T>, degrees: &DegreeSet) -> HarmonicCoefficients<T> {
    lsht(field, degrees, false)
}

/// As [`lsht_transform`], divided by the number of neighbors.
pub fn lsht_transform_mean<T: Real>(field: &LocalSphericalField<T>, degrees: &DegreeSet) -> HarmonicCoefficients<T> {
    lsht(field, degrees, true)
}

fn lsht<T: Real>(field: &LocalSphericalField<T>, degrees: &DegreeSet, mean: bool) -> HarmonicCoefficients<T> {
    let eval = BasisEvaluator::<T>::new(degrees.clone());
    let k = eval.len();
    let s = field.subset().len();
    let zero = Complex::new(T::zero(), T::zero());
    let scale = if mean { T::one() / from_usize::<T>(s - 1) } else { T::one() };
    let mut values = vec![zero; field.frames() * field.bodies() * s * k];
    let mut scratch = vec![zero; k];
    let mut chunks = values.chunks_exact_mut(k);
    for t in 0..field.frames() {
        for m in 0..field.bodies() {
            for c in 0..s {
                let out = chunks.next().expect("sized above");
                for (w, p) in field.neighborhood(t, m, c).iter().enumerate() {
                    if w == c {
                        continue;
                    }
                    eval.eval_into(p.theta, p.phi, &mut scratch);
                    for (acc, y) in out.iter_mut().zip(&scratch) {
                        *acc = *acc + y.conj() * p.r;
                    }
                }
                if mean {
                    for v in out.iter_mut() {
                        *v = *v * scale;
                    }
                }
            }
        }
    }
    HarmonicCoefficients {
        degrees: degrees.clone(),
        provenance: Provenance::Lsht,
        frames: field.frames(),
        bodies: field.bodies(),
        centers: s,
        slots: 1,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{to_local, Axis};
    use crate::harmonics::{sph_harm, HarmonicIndex};
    use crate::skeleton_io::SkeletonSequence;

    fn pair(z: f64) -> SkeletonSequence<f64> {
        SkeletonSequence::new(1, 1, 2, vec![[0.0; 3], [0.0, 0.0, z]]).unwrap()
    }

    #[test]
    fn lshr_single_neighbor_on_pole() {
        let field = to_local(&pair(1.0), &[0, 1], Axis::Z).unwrap();
        let c = lshr_embed(&field, &DegreeSet::default());
        // degree set {1,2}: index 1 is (ℓ=1, m=0)
        let v = c.get(0, 0, 0, 1, 1);
        assert!((v.re - 0.4886025119029199).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        assert!(c.block(0, 0, 0)[..8].iter().all(|z| z.re == 0.0 && z.im == 0.0));
        assert_eq!(c.block_len(), 16);
    }

    #[test]
    fn lsht_single_neighbor_is_conjugate_basis() {
        let seq = SkeletonSequence::new(1, 1, 2, vec![[0.0; 3], [0.3, -0.4, 0.5]]).unwrap();
        let field = to_local(&seq, &[0, 1], Axis::Z).unwrap();
        let unit = field.scale_radii(1.0 / field.get(0, 0, 0, 1).r);
        let c = lsht_transform(&unit, &DegreeSet::default());
        let p = unit.get(0, 0, 0, 1);
        for (k, idx) in DegreeSet::default().indices().enumerate() {
            let expect = sph_harm(idx, p.theta, p.phi).unwrap().conj();
            assert!((c.get(0, 0, 0, 0, k) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn lsht_antipodal_cancellation() {
        let seq = SkeletonSequence::new(1, 1, 3, vec![[0.0; 3], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]).unwrap();
        let field = to_local(&seq, &[0, 1, 2], Axis::Z).unwrap();
        let c = lsht_transform(&field, &DegreeSet::default());
        assert!(c.get(0, 0, 0, 0, 1).norm() < 1e-15);
        let _ = HarmonicIndex::new(1, 0).unwrap();
    }

    #[test]
    fn lsht_mean_divides_by_neighbors() {
        let seq = SkeletonSequence::new(1, 1, 3, vec![[0.0; 3], [0.1, 0.2, 0.3], [-0.5, 0.1, 0.0]]).unwrap();
        let field = to_local(&seq, &[0, 1, 2], Axis::Z).unwrap();
        let sum = lsht_transform(&field, &DegreeSet::default());
        let mean = lsht_transform_mean(&field, &DegreeSet::default());
        for (a, b) in sum.values().iter().zip(mean.values()) {
            assert!((a * 0.5 - b).norm() < 1e-15);
        }
    }
}
