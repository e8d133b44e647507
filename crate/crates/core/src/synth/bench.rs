//! Train on upright gestures, test on rotated ones.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{generate, split, GestureSpec, TemplateKind};
use crate::classifier::{evaluate, train, ArchConfig, GcnModel, TrainConfig};
use crate::error::Result;
use crate::features::{assemble, EmbedConfig, EmbedMode};
use crate::geometry::{rotate, sample_rotation, Axis, RotationMode};
use crate::harmonics::ComplexFormat;
use crate::{Rotation, Sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Raw,
    RawLshr,
    RandomBaseline,
    LshrOnly,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::RawLshr => "raw+lshr-mag",
            Variant::RandomBaseline => "raw+random",
            Variant::LshrOnly => "lshr-mag-only",
        }
    }

    pub fn embed(self, joints: usize) -> EmbedConfig {
        let mode = match self {
            Variant::Raw => EmbedMode::None,
            Variant::RawLshr => EmbedMode::Lshr,
            Variant::RandomBaseline => EmbedMode::RandomBaseline,
            Variant::LshrOnly => EmbedMode::LshrOnly,
        };
        EmbedConfig {
            mode,
            format: ComplexFormat::Magnitude,
            hand_set: Some((0..joints).collect()),
            up_axis: Axis::Y,
            ..EmbedConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub template: TemplateKind,
    pub per_class: usize,
    pub frames: usize,
    pub seeds: Vec<u64>,
    pub train_fraction: f64,
    /// Rotation drawn per sample by the generator, before the split.
    pub data_rotation: Option<RotationMode>,
    /// Extra rotation applied to the test split only.
    pub test_rotation: RotationMode,
    pub widths: Vec<usize>,
    pub strides: Vec<usize>,
    pub kernel: usize,
    pub train: TrainConfig,
    pub variants: Vec<Variant>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            template: TemplateKind::TwoHand,
            per_class: 200,
            frames: 24,
            seeds: vec![0, 1, 2],
            train_fraction: 0.5,
            data_rotation: None,
            test_rotation: RotationMode::So3Uniform,
            widths: vec![16, 16],
            strides: vec![1, 2],
            kernel: 5,
            train: TrainConfig {
                lr: 0.02,
                epochs: 30,
                warmup_epochs: 3,
                decay_epochs: vec![20, 26],
                batch_size: 32,
                ..TrainConfig::default()
            },
            variants: vec![Variant::Raw, Variant::RawLshr, Variant::RandomBaseline],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub variant: Variant,
    pub channels: usize,
    /// One entry per seed.
    pub upright: Vec<f64>,
    pub rotated: Vec<f64>,
}

impl VariantResult {
    pub fn mean_upright(&self) -> f64 {
        mean(&self.upright)
    }

    pub fn mean_rotated(&self) -> f64 {
        mean(&self.rotated)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub results: Vec<VariantResult>,
    pub seconds: f64,
}

impl BenchReport {
    pub fn get(&self, v: Variant) -> Option<&VariantResult> {
        self.results.iter().find(|r| r.variant == v)
    }
}

/// Runs every variant on every seed. The same split and test rotations are
/// shared by all variants of one seed.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    let start = Instant::now();
    let specs: Vec<GestureSpec> = GestureSpec::standard_set(cfg.template)
        .into_iter()
        .map(|s| GestureSpec { rotation: cfg.data_rotation, ..s })
        .collect();
    let classes = specs.len();
    let joints = cfg.template.joints();
    let mut results: Vec<VariantResult> = cfg
        .variants
        .iter()
        .map(|&variant| VariantResult {
            variant,
            channels: variant.embed(joints).channel_count(joints),
            upright: Vec::new(),
            rotated: Vec::new(),
        })
        .collect();

    for &seed in &cfg.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = generate(&specs, cfg.per_class, cfg.frames, &mut rng)?;
        let labels: Vec<usize> = data.iter().map(|s| s.label.unwrap_or(0)).collect();
        let (train_idx, test_idx) = split(&labels, cfg.train_fraction, &mut rng)?;
        let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<Sequence>>();
        let train_seqs = pick(&train_idx);
        let test_seqs = pick(&test_idx);
        let rotated: Vec<Sequence> = test_seqs
            .iter()
            .map(|s| {
                let r: Rotation = sample_rotation(&mut rng, cfg.test_rotation, Axis::Y);
                rotate(s, &r)
            })
            .collect();

        for result in &mut results {
            let embed = result.variant.embed(joints);
            let mut embed_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let train_set = assemble(&train_seqs, &embed, &mut embed_rng)?;
            let upright_set = assemble(&test_seqs, &embed, &mut embed_rng)?;
            let rotated_set = assemble(&rotated, &embed, &mut embed_rng)?;

            let arch = ArchConfig {
                widths: cfg.widths.clone(),
                strides: cfg.strides.clone(),
                kernel: cfg.kernel,
                ..ArchConfig::desk(train_set.channels(), cfg.frames, joints, classes)
            };
            let mut model = GcnModel::init(arch, &mut ChaCha8Rng::seed_from_u64(seed))?;
            model.fit_input_normalization(&train_set)?;
            let tcfg = TrainConfig { seed, ..cfg.train.clone() };
            train(&mut model, &train_set, &tcfg, &Default::default())?;
            result.upright.push(evaluate(&model, &upright_set, None)?.accuracy);
            result.rotated.push(evaluate(&model, &rotated_set, None)?.accuracy);
        }
    }
    Ok(BenchReport { results, seconds: start.elapsed().as_secs_f64() })
}
