//! SGD with momentum, weight decay, linear warmup and step decay.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{argmax, softmax_cross_entropy, GcnModel};
use crate::config::{join_list, KvConfig};
use crate::error::{Error, Result};
use crate::features::{assemble, EmbedConfig, FeatureTensor};
use crate::geometry::{rotate, rotate_frames, sample_rotation, RotationMode};
use crate::Rotation;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub warmup_epochs: usize,
    pub decay_epochs: Vec<usize>,
    pub decay_factor: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            momentum: 0.9,
            weight_decay: 4e-4,
            epochs: 65,
            warmup_epochs: 5,
            decay_epochs: vec![35, 55],
            decay_factor: 0.1,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::config("epochs and batch_size must be positive"));
        }
        if !(self.lr >= 0.0 && self.momentum >= 0.0 && self.weight_decay >= 0.0) {
            return Err(Error::config("lr, momentum and weight_decay must be non-negative"));
        }
        if let Some(&e) = self.decay_epochs.iter().find(|&&e| e >= self.epochs) {
            return Err(Error::config(format!("decay epoch {e} is not below epochs = {}", self.epochs)));
        }
        Ok(())
    }

    /// Learning rate for a 0-based epoch and the fraction of it completed.
    pub fn lr_at(&self, epoch: usize, progress: f64) -> f64 {
        let decays = self.decay_epochs.iter().filter(|&&e| epoch >= e).count() as i32;
        let base = self.lr * self.decay_factor.powi(decays);
        if epoch < self.warmup_epochs {
            base * (epoch as f64 + progress) / self.warmup_epochs as f64
        } else {
            base
        }
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::default();
        kv.set("lr", self.lr);
        kv.set("momentum", self.momentum);
        kv.set("weight_decay", self.weight_decay);
        kv.set("epochs", self.epochs);
        kv.set("warmup_epochs", self.warmup_epochs);
        kv.set("decay_epochs", join_list(&self.decay_epochs));
        kv.set("decay_factor", self.decay_factor);
        kv.set("batch_size", self.batch_size);
        kv.set("seed", self.seed);
        kv
    }

    /// Missing keys keep their defaults.
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = Self {
            lr: kv.get_or("lr", d.lr)?,
            momentum: kv.get_or("momentum", d.momentum)?,
            weight_decay: kv.get_or("weight_decay", d.weight_decay)?,
            epochs: kv.get_or("epochs", d.epochs)?,
            warmup_epochs: kv.get_or("warmup_epochs", d.warmup_epochs)?,
            decay_epochs: kv.get_list("decay_epochs")?.unwrap_or(d.decay_epochs),
            decay_factor: kv.get_or("decay_factor", d.decay_factor)?,
            batch_size: kv.get_or("batch_size", d.batch_size)?,
            seed: kv.get_or("seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Random rotation of the raw coordinates before re-embedding.
#[derive(Debug, Clone)]
pub struct Augmentation {
    pub embed: EmbedConfig,
    pub rotation: RotationMode,
    pub per_frame: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions<'a> {
    pub val: Option<&'a FeatureTensor<f64>>,
    pub augment: Option<Augmentation>,
}

fn labels_of(set: &FeatureTensor<f64>) -> Result<&[usize]> {
    set.labels().ok_or_else(|| Error::shape("training needs labeled features"))
}

/// Mean loss, accuracy and gradient over `indices`.
///
/// Samples run in parallel; per-sample gradients are summed in index
/// order so the result does not depend on scheduling.
pub fn batch_gradient(
    model: &GcnModel,
    set: &FeatureTensor<f64>,
    labels: &[usize],
    indices: &[usize],
) -> (f64, usize, Vec<f64>) {
    let per_sample: Vec<(f64, bool, Vec<f64>)> = indices
        .par_iter()
        .map(|&n| {
            let (logits, cache) = model.forward_sample(set.sample(n), set.bodies());
            let (loss, dlogits) = softmax_cross_entropy(&logits, labels[n]);
            let mut grad = vec![0.0; model.parameter_count()];
            model.backward_sample(&cache, &dlogits, &mut grad);
            (loss, argmax(&logits) == labels[n], grad)
        })
        .collect();
    let scale = 1.0 / indices.len() as f64;
    let mut grad = vec![0.0; model.parameter_count()];
    let mut loss = 0.0;
    let mut correct = 0;
    for (l, ok, g) in per_sample {
        loss += l;
        correct += ok as usize;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b * scale;
        }
    }
    (loss * scale, correct, grad)
}

/// Mean loss and accuracy without gradients.
pub fn loss_and_accuracy(model: &GcnModel, set: &FeatureTensor<f64>) -> Result<(f64, f64)> {
    let labels = labels_of(set)?;
    if set.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    model.check_input(set)?;
    let rows: Vec<(f64, bool)> = (0..set.len())
        .into_par_iter()
        .map(|n| {
            let (logits, _) = model.forward_sample(set.sample(n), set.bodies());
            (softmax_cross_entropy(&logits, labels[n]).0, argmax(&logits) == labels[n])
        })
        .collect();
    let n = rows.len() as f64;
    Ok((rows.iter().map(|r| r.0).sum::<f64>() / n, rows.iter().filter(|r| r.1).count() as f64 / n))
}

fn augmented(set: &FeatureTensor<f64>, aug: &Augmentation, rng: &mut ChaCha8Rng) -> Result<FeatureTensor<f64>> {
    let raw = EmbedConfig {
        scale: 1.0,
        bodies: None,
        target_frames: None,
        modality: Default::default(),
        ..aug.embed.clone()
    };
    let rotated: Vec<_> = set
        .to_sequences()?
        .into_iter()
        .map(|seq| {
            if aug.per_frame {
                let rs: Vec<Rotation> =
                    (0..seq.frames()).map(|_| sample_rotation(rng, aug.rotation, raw.up_axis)).collect();
                rotate_frames(&seq, &rs)
            } else {
                rotate(&seq, &sample_rotation(rng, aug.rotation, raw.up_axis))
            }
        })
        .collect();
    let out = assemble(&rotated, &raw, rng)?;
    if out.channel_map() != set.channel_map() {
        return Err(Error::config("augmentation embedding does not reproduce the training channel map"));
    }
    Ok(out)
}

/// Trains in place and returns the per-epoch history.
pub fn train(
    model: &mut GcnModel,
    train_set: &FeatureTensor<f64>,
    cfg: &TrainConfig,
    opts: &TrainOptions<'_>,
) -> Result<Vec<EpochRecord>> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    labels_of(train_set)?;
    model.check_input(train_set)?;
    if let Some(val) = opts.val {
        model.check_input(val)?;
        labels_of(val)?;
    }
    if let Some(&bad) = labels_of(train_set)?.iter().find(|&&l| l >= model.arch().classes) {
        return Err(Error::shape(format!("label {bad} out of range for {} classes", model.arch().classes)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut velocity = vec![0.0; model.parameter_count()];
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let steps = order.len().div_ceil(cfg.batch_size);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let owned;
        let set = match &opts.augment {
            Some(aug) => {
                let mut aug_rng = ChaCha8Rng::seed_from_u64(rng.random());
                owned = augmented(train_set, aug, &mut aug_rng)?;
                &owned
            }
            None => train_set,
        };
        let labels = labels_of(set)?;
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut correct = 0;
        let mut lr = 0.0;
        for (step, chunk) in order.chunks(cfg.batch_size).enumerate() {
            lr = cfg.lr_at(epoch, step as f64 / steps as f64);
            let (loss, ok, grad) = batch_gradient(model, set, labels, chunk);
            if !loss.is_finite() {
                return Err(Error::Training(format!("loss became {loss} at epoch {epoch}, step {step} (lr {lr})")));
            }
            loss_sum += loss * chunk.len() as f64;
            correct += ok;
            for ((p, v), g) in model.params_mut().iter_mut().zip(&mut velocity).zip(grad) {
                *v = cfg.momentum * *v + g + cfg.weight_decay * *p;
                *p -= lr * *v;
            }
        }
        let n = order.len() as f64;
        let (val_loss, val_accuracy) = match opts.val {
            Some(val) => {
                let (l, a) = loss_and_accuracy(model, val)?;
                (Some(l), Some(a))
            }
            None => (None, None),
        };
        history.push(EpochRecord {
            epoch,
            lr,
            train_loss: loss_sum / n,
            train_accuracy: correct as f64 / n,
            val_loss,
            val_accuracy,
        });
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ArchConfig;
    use crate::skeleton_io::DenseTensor;

    fn separable(n: usize, seed: u64) -> FeatureTensor<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, t, v) = (3, 6, 8);
        let mut data = Vec::with_capacity(n * c * t * v);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = i % 2;
            let shift = if label == 0 { 1.0 } else { -1.0 };
            for ch in 0..c {
                for _ in 0..t * v {
                    let x: f64 = rng.random_range(-0.5..0.5);
                    data.push(if ch == 0 { x + shift } else { x });
                }
            }
            labels.push(label);
        }
        let names = (0..c).map(|i| format!("c{i}")).collect();
        FeatureTensor::new(DenseTensor::new(vec![n, 1, c, t, v], data).unwrap(), names, Some(labels)).unwrap()
    }

    fn small_arch() -> ArchConfig {
        ArchConfig { widths: vec![8, 8], strides: vec![1, 2], ..ArchConfig::desk(3, 6, 8, 2) }
    }

    fn quick(epochs: usize) -> TrainConfig {
        TrainConfig { epochs, warmup_epochs: 0, decay_epochs: vec![], batch_size: 20, lr: 0.05, ..Default::default() }
    }

    #[test]
    fn schedule() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.lr_at(0, 0.0), 0.0);
        assert!((cfg.lr_at(2, 0.5) - 0.05).abs() < 1e-15);
        assert_eq!(cfg.lr_at(5, 0.0), 0.1);
        assert!((cfg.lr_at(35, 0.0) - 0.01).abs() < 1e-15);
        assert!((cfg.lr_at(64, 0.9) - 0.001).abs() < 1e-15);
        assert!(TrainConfig { decay_epochs: vec![65], ..cfg.clone() }.validate().is_err());
        assert_eq!(TrainConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn zero_lr_leaves_parameters() {
        let data = separable(20, 0);
        let mut model = GcnModel::init(small_arch(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let before = model.params().to_vec();
        train(&mut model, &data, &TrainConfig { lr: 0.0, ..quick(1) }, &Default::default()).unwrap();
        assert_eq!(model.params(), &before[..]);
    }

    #[test]
    fn overfits_twenty_samples() {
        let data = separable(20, 3);
        let mut model = GcnModel::init(small_arch(), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let history = train(&mut model, &data, &quick(50), &Default::default()).unwrap();
        for w in history[..5].windows(2) {
            assert!(w[1].train_loss < w[0].train_loss, "{history:?}");
        }
        assert_eq!(loss_and_accuracy(&model, &data).unwrap().1, 1.0);
    }

    #[test]
    fn weight_decay_shrinks_norms_without_gradient() {
        let names = vec!["a".to_string(); 3];
        let zeros =
            FeatureTensor::new(DenseTensor::filled(vec![4, 1, 3, 6, 8], 0.0), names, Some(vec![0, 1, 0, 1])).unwrap();
        let mut model = GcnModel::init(small_arch(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let cfg = TrainConfig { weight_decay: 0.01, ..quick(1) };
        let norm = |m: &GcnModel| m.params().iter().map(|p| p * p).sum::<f64>();
        let mut last = norm(&model);
        for step in 0..10 {
            train(&mut model, &zeros, &TrainConfig { seed: step, ..cfg.clone() }, &Default::default()).unwrap();
            let now = norm(&model);
            assert!(now < last, "step {step}: {now} >= {last}");
            last = now;
        }
    }

    #[test]
    fn deterministic_history_and_parameters() {
        let data = separable(24, 6);
        let run = || {
            let mut model = GcnModel::init(small_arch(), &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
            let h = train(&mut model, &data, &TrainConfig { batch_size: 5, ..quick(3) }, &Default::default()).unwrap();
            (h, model)
        };
        let (h1, m1) = run();
        let (h2, m2) = run();
        assert_eq!(h1, h2);
        assert!(m1.params().iter().zip(m2.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn rejects_bad_input() {
        let mut model = GcnModel::zeros(small_arch()).unwrap();
        let mut data = separable(4, 0);
        data.set_labels(vec![0, 1, 2, 0]).unwrap();
        assert!(train(&mut model, &data, &quick(1), &Default::default()).is_err());
        let diverge = TrainConfig { lr: 1e300, ..quick(2) };
        let mut model = GcnModel::init(small_arch(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(matches!(train(&mut model, &separable(20, 0), &diverge, &Default::default()), Err(Error::Training(_))));
    }
}
