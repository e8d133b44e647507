//! Labeled synthetic hand gestures with controlled jitter, noise and
//! rotation.

mod bench;
mod family;
mod template;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::geometry::{rotate, sample_rotation, Axis, RotationMode};
use crate::skeleton_io::SkeletonSequence;
use crate::{Rotation, Sequence};

pub use bench::{run_benchmark, BenchConfig, BenchReport, Variant, VariantResult};
pub use family::{Family, Motion};
pub use template::{HandRig, TemplateKind};

#[derive(Debug, Clone, PartialEq)]
pub struct GestureSpec {
    pub class_id: usize,
    pub family: Family,
    pub template: TemplateKind,
    pub amplitude: RangeInclusive<f64>,
    pub frequency: RangeInclusive<f64>,
    pub phase: RangeInclusive<f64>,
    /// Relative size jitter: scale drawn from `[1 - j, 1 + j]`.
    pub scale_jitter: f64,
    pub noise: f64,
    pub rotation: Option<RotationMode>,
}

impl GestureSpec {
    pub fn new(class_id: usize, family: Family) -> Self {
        Self {
            class_id,
            family,
            template: TemplateKind::TwoHand,
            amplitude: 0.6..=1.0,
            frequency: 1.0..=2.0,
            phase: 0.0..=std::f64::consts::TAU,
            scale_jitter: 0.1,
            noise: 0.002,
            rotation: None,
        }
    }

    /// One class per family, in [`Family::ALL`] order.
    pub fn standard_set(template: TemplateKind) -> Vec<Self> {
        Family::ALL.into_iter().enumerate().map(|(i, f)| Self { template, ..Self::new(i, f) }).collect()
    }

    /// No jitter, no noise, no rotation.
    pub fn exact(self) -> Self {
        let a = *self.amplitude.end();
        let f = *self.frequency.start();
        let p = *self.phase.start();
        Self { amplitude: a..=a, frequency: f..=f, phase: p..=p, scale_jitter: 0.0, noise: 0.0, rotation: None, ..self }
    }

    fn validate(&self) -> Result<()> {
        for (name, r) in [("amplitude", &self.amplitude), ("frequency", &self.frequency), ("phase", &self.phase)] {
            if !(r.start().is_finite() && r.end().is_finite() && r.start() <= r.end()) {
                return Err(Error::config(format!("class {}: bad {name} range {r:?}", self.class_id)));
            }
        }
        if !(0.0..1.0).contains(&self.scale_jitter) || !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::config(format!("class {}: bad jitter or noise", self.class_id)));
        }
        Ok(())
    }

    /// One sequence from a per-sample seed.
    pub fn sample(&self, frames: usize, seed: u64) -> Result<Sequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |r: &RangeInclusive<f64>| {
            if r.start() == r.end() {
                *r.start()
            } else {
                rng.random_range(r.clone())
            }
        };
        let motion =
            Motion { amplitude: draw(&self.amplitude), frequency: draw(&self.frequency), phase: draw(&self.phase) };
        let scale = draw(&(1.0 - self.scale_jitter..=1.0 + self.scale_jitter));

        let rest = self.template.rest_pose();
        let centroid = [0, 1, 2].map(|k| rest.iter().map(|p| p[k]).sum::<f64>() / rest.len() as f64);
        let noise = Normal::new(0.0, self.noise).map_err(|e| Error::config(e.to_string()))?;
        let mut coords = Vec::with_capacity(frames * rest.len());
        for t in 0..frames {
            let s = t as f64 / (frames - 1) as f64;
            for p in self.family.pose(self.template, &rest, &motion, s) {
                coords.push([0, 1, 2].map(|k| {
                    let x = centroid[k] + scale * (p[k] - centroid[k]);
                    if self.noise > 0.0 {
                        x + noise.sample(&mut rng)
                    } else {
                        x
                    }
                }));
            }
        }
        let seq = SkeletonSequence::new(frames, 1, rest.len(), coords)?.with_label(self.class_id);
        Ok(match self.rotation {
            Some(mode) => {
                let r: Rotation = sample_rotation(&mut rng, mode, Axis::Y);
                rotate(&seq, &r).with_label(self.class_id)
            }
            None => seq,
        })
    }
}

/// `n` samples per spec, interleaved by class.
///
/// Per-sample seeds are drawn from `rng` in output order, so the result
/// does not depend on the thread count.
pub fn generate<R: Rng + ?Sized>(specs: &[GestureSpec], n: usize, frames: usize, rng: &mut R) -> Result<Vec<Sequence>> {
    let first = specs.first().ok_or(Error::Empty("gesture specs"))?;
    if n == 0 || frames < 2 {
        return Err(Error::config(format!("need n >= 1 and at least 2 frames, got n = {n}, frames = {frames}")));
    }
    let mut ids: Vec<usize> = specs.iter().map(|s| s.class_id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("duplicate class id"));
    }
    for s in specs {
        s.validate()?;
        if s.template != first.template {
            return Err(Error::config("all classes must share one template"));
        }
    }
    let jobs: Vec<(&GestureSpec, u64)> = (0..n).flat_map(|_| specs.iter()).map(|s| (s, rng.random())).collect();
    jobs.par_iter().map(|(s, seed)| s.sample(frames, *seed)).collect()
}

/// Label-stratified partition into `(train, test)` index lists, each in
/// ascending order. Per class, `round(fraction · count)` samples go to
/// the training side.
pub fn split<R: Rng + ?Sized>(labels: &[usize], fraction: f64, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config(format!("split fraction {fraction} is not in (0, 1)")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut idx) in by_class {
        idx.shuffle(rng);
        let k = (fraction * idx.len() as f64).round() as usize;
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn parse_range(text: &str) -> Result<RangeInclusive<f64>> {
    let bad = || Error::config(format!("bad range '{text}' (use a or a..b)"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match text.split_once("..") {
        Some((a, b)) => Ok(num(a)?..=num(b)?),
        None => {
            let x = num(text)?;
            Ok(x..=x)
        }
    }
}

fn parse_rotation(text: &str) -> Result<Option<RotationMode>> {
    match text.trim() {
        "none" => Ok(None),
        other => other.parse().map(Some),
    }
}

/// Class list from key–value text.
///
/// ```text
/// template = two-hand
/// classes = pinch, spread, wave
/// noise = 0.002
/// amplitude = 0.6..1.0
/// class.2.frequency = 2..3
/// ```
///
/// Keys without a `class.<id>.` prefix set defaults for every class;
/// `rotation` takes `none`, `up` or `so3`. Other keys (`frames`, `n`,
/// `seed`) are left for the caller.
pub fn parse_spec(kv: &KvConfig) -> Result<Vec<GestureSpec>> {
    let families: Vec<Family> = kv.get_list("classes")?.ok_or_else(|| Error::config("spec needs a classes list"))?;
    let template: TemplateKind = kv.get_or("template", TemplateKind::default())?;
    let apply = |spec: &mut GestureSpec, kv: &KvConfig| -> Result<()> {
        if let Some(v) = kv.raw("amplitude") {
            spec.amplitude = parse_range(v)?;
        }
        if let Some(v) = kv.raw("frequency") {
            spec.frequency = parse_range(v)?;
        }
        if let Some(v) = kv.raw("phase") {
            spec.phase = parse_range(v)?;
        }
        if let Some(v) = kv.get("scale_jitter")? {
            spec.scale_jitter = v;
        }
        if let Some(v) = kv.get("noise")? {
            spec.noise = v;
        }
        if let Some(v) = kv.raw("rotation") {
            spec.rotation = parse_rotation(v)?;
        }
        Ok(())
    };
    let specs = families
        .iter()
        .enumerate()
        .map(|(i, &family)| {
            let mut spec = GestureSpec { template, ..GestureSpec::new(i, family) };
            apply(&mut spec, kv)?;
            let own = kv.section(&format!("class.{i}."));
            own.check_keys(&["amplitude", "frequency", "phase", "scale_jitter", "noise", "rotation"])?;
            apply(&mut spec, &own)?;
            spec.validate()?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;
    for key in kv.iter().map(|(k, _)| k) {
        if let Some(rest) = key.strip_prefix("class.") {
            let id = rest.split('.').next().and_then(|s| s.parse::<usize>().ok());
            if id.is_none_or(|id| id >= specs.len()) {
                return Err(Error::config(format!("key '{key}' names no class")));
            }
        }
    }
    Ok(specs)
}
