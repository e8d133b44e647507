//! Central finite differences against the analytic gradient.

use rand::seq::index::sample;
use rand::Rng;

use super::model::{softmax_cross_entropy, GcnModel};
use super::train::batch_gradient;
use crate::error::{Error, Result};
use crate::features::FeatureTensor;

/// Gradients smaller than this are compared in absolute terms.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    pub worst_parameter: usize,
    pub max_absolute_error: f64,
    pub checked: usize,
    /// Probes whose two evaluations straddle a ReLU kink.
    pub skipped: usize,
}

/// Mean loss and the sign pattern of every ReLU input.
fn mean_loss(model: &GcnModel, set: &FeatureTensor<f64>, labels: &[usize]) -> (f64, Vec<bool>) {
    let mut pattern = Vec::new();
    let mut total = 0.0;
    for (n, &label) in labels.iter().enumerate().take(set.len()) {
        let (logits, cache) = model.forward_sample(set.sample(n), set.bodies());
        total += softmax_cross_entropy(&logits, label).0;
        cache.relu_pattern(&mut pattern);
    }
    (total / set.len() as f64, pattern)
}

/// Compares up to `count` randomly chosen parameters (all of them when the
/// model is smaller). The error of one parameter is
/// `|a - n| / max(|a|, |n|, DENOMINATOR_FLOOR)`. A probe where some ReLU input changes
/// sign between `p - eps` and `p + eps` has no valid central difference and
/// is counted in `skipped` instead.
pub fn gradient_check<R: Rng + ?Sized>(
    model: &GcnModel,
    batch: &FeatureTensor<f64>,
    eps: f64,
    count: usize,
    rng: &mut R,
) -> Result<GradCheck> {
    let labels = batch.labels().ok_or_else(|| Error::shape("gradient check needs labels"))?;
    if batch.is_empty() {
        return Err(Error::Empty("gradient check batch"));
    }
    model.check_input(batch)?;
    let all: Vec<usize> = (0..batch.len()).collect();
    let (_, _, analytic) = batch_gradient(model, batch, labels, &all);

    let total = model.parameter_count();
    let picks = sample(rng, total, count.min(total)).into_vec();
    let mut probe = model.clone();
    let mut report =
        GradCheck { max_relative_error: 0.0, worst_parameter: 0, max_absolute_error: 0.0, checked: 0, skipped: 0 };
    for i in picks {
        let p = probe.params()[i];
        probe.params_mut()[i] = p + eps;
        let (up, up_pattern) = mean_loss(&probe, batch, labels);
        probe.params_mut()[i] = p - eps;
        let (down, down_pattern) = mean_loss(&probe, batch, labels);
        probe.params_mut()[i] = p;
        if up_pattern != down_pattern {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic[i];
        let diff = (a - numeric).abs();
        report.max_absolute_error = report.max_absolute_error.max(diff);
        let err = diff / a.abs().max(numeric.abs()).max(DENOMINATOR_FLOOR);
        if err > report.max_relative_error {
            report.max_relative_error = err;
            report.worst_parameter = i;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ArchConfig;
    use crate::skeleton_io::DenseTensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn batch(n: usize, c: usize, t: usize, v: usize, classes: usize) -> FeatureTensor<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = (0..n * c * t * v).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels = (0..n).map(|i| i % classes).collect();
        let names = (0..c).map(|i| format!("c{i}")).collect();
        FeatureTensor::new(DenseTensor::new(vec![n, 1, c, t, v], data).unwrap(), names, Some(labels)).unwrap()
    }

    #[test]
    fn linear_head() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = GcnModel::init(ArchConfig::linear(4, 5, 8, 3), &mut rng).unwrap();
        let r = gradient_check(&model, &batch(3, 4, 5, 8, 3), 1e-5, 200, &mut rng).unwrap();
        assert_eq!(r.checked, 15);
        assert!(r.max_relative_error < 1e-7, "{r:?}");
    }

    #[test]
    fn two_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let arch = ArchConfig { widths: vec![6, 8], strides: vec![1, 2], ..ArchConfig::desk(3, 7, 8, 4) };
        let model = GcnModel::init(arch, &mut rng).unwrap();
        let b = batch(4, 3, 7, 8, 4);
        let r = gradient_check(&model, &b, 1e-5, 300, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(r.checked >= 200);
        assert!(r.max_relative_error < 1e-4, "{r:?}");
        let half = gradient_check(&model, &b, 5e-6, 300, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(half.max_relative_error <= 10.0 * r.max_relative_error.max(1e-10), "{half:?} vs {r:?}");
    }

    #[test]
    fn kink_crossings_are_skipped() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let arch = ArchConfig { widths: vec![4], strides: vec![1], ..ArchConfig::desk(3, 5, 8, 3) };
        let model = GcnModel::init(arch, &mut rng).unwrap();
        let b = batch(2, 3, 5, 8, 3);
        let coarse = gradient_check(&model, &b, 0.5, 500, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(coarse.skipped > 0, "{coarse:?}");
        assert_eq!(coarse.checked + coarse.skipped, model.parameter_count().min(500));
        let linear = GcnModel::init(ArchConfig::linear(3, 5, 8, 3), &mut rng).unwrap();
        assert_eq!(gradient_check(&linear, &b, 0.5, 50, &mut rng).unwrap().skipped, 0);
    }
}
