//! Model-ready feature tensors: temporal resizing, modality, embedding
//! channels and the ablation baselines.

mod dataset;
mod embed_config;
mod hand_set;
mod temporal;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{to_local, validate_subset};
use crate::harmonics::{lshr_embed, lsht_transform, lsht_transform_mean};
use crate::scalar::Real;
use crate::skeleton_io::{DenseTensor, SkeletonSequence};

pub use dataset::{load_dataset, read_labels, save_dataset, Dataset};
pub use embed_config::{EmbedConfig, EmbedMode, Modality};
pub use hand_set::{ntu_hand_set, parse_hand_set, parse_ntu_hand_set, NTU_HAND_JOINTS};
pub use temporal::{resize_temporal, velocity};

/// `N × M × C × T × V` features with channel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor<T = f64> {
    data: DenseTensor<T>,
    channel_map: Vec<String>,
    labels: Option<Vec<usize>>,
}

impl<T: Real> FeatureTensor<T> {
    pub fn new(data: DenseTensor<T>, channel_map: Vec<String>, labels: Option<Vec<usize>>) -> Result<Self> {
        let dims = data.dims();
        if dims.len() != 5 {
            return Err(Error::shape(format!("feature tensor needs 5 dims, got {dims:?}")));
        }
        if channel_map.len() != dims[2] {
            return Err(Error::shape(format!("{} channel labels for {} channels", channel_map.len(), dims[2])));
        }
        if let Some(l) = &labels {
            if l.len() != dims[0] {
                return Err(Error::shape(format!("{} labels for {} samples", l.len(), dims[0])));
            }
        }
        Ok(Self { data, channel_map, labels })
    }

    pub fn data(&self) -> &DenseTensor<T> {
        &self.data
    }

    pub fn channel_map(&self) -> &[String] {
        &self.channel_map
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Vec<usize>) -> Result<()> {
        if labels.len() != self.len() {
            return Err(Error::shape(format!("{} labels for {} samples", labels.len(), self.len())));
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.data.dims()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bodies(&self) -> usize {
        self.data.dims()[1]
    }

    pub fn channels(&self) -> usize {
        self.data.dims()[2]
    }

    pub fn frames(&self) -> usize {
        self.data.dims()[3]
    }

    pub fn joints(&self) -> usize {
        self.data.dims()[4]
    }

    pub fn sample_len(&self) -> usize {
        self.data.dims()[1..].iter().product()
    }

    /// One sample as an `M × C × T × V` slice.
    pub fn sample(&self, n: usize) -> &[T] {
        let len = self.sample_len();
        &self.data.data()[n * len..(n + 1) * len]
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize, c: usize, t: usize, v: usize) -> T {
        let d = self.data.dims();
        self.data.data()[(((n * d[1] + m) * d[2] + c) * d[3] + t) * d[4] + v]
    }

    /// Samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("sample selection"));
        }
        let len = self.sample_len();
        let mut data = Vec::with_capacity(indices.len() * len);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::shape(format!("sample {i} out of range for {}", self.len())));
            }
            data.extend_from_slice(self.sample(i));
        }
        let mut dims = self.data.dims().to_vec();
        dims[0] = indices.len();
        let labels = self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect());
        Self::new(DenseTensor::new(dims, data)?, self.channel_map.clone(), labels)
    }

    /// Rebuilds skeleton sequences from the `cart_*` channels.
    pub fn to_sequences(&self) -> Result<Vec<SkeletonSequence<T>>> {
        let cart: Vec<usize> = ["cart_x", "cart_y", "cart_z"]
            .iter()
            .map(|name| {
                self.channel_map
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::shape(format!("tensor has no {name} channel")))
            })
            .collect::<Result<_>>()?;
        let (m_count, t_count, v_count) = (self.bodies(), self.frames(), self.joints());
        (0..self.len())
            .map(|n| {
                let mut coords = Vec::with_capacity(t_count * m_count * v_count);
                for t in 0..t_count {
                    for m in 0..m_count {
                        for v in 0..v_count {
                            coords.push([0, 1, 2].map(|k| self.get(n, m, cart[k], t, v)));
                        }
                    }
                }
                let seq = SkeletonSequence::new(t_count, m_count, v_count, coords)?;
                Ok(match &self.labels {
                    Some(l) => seq.with_label(l[n]),
                    None => seq,
                })
            })
            .collect()
    }
}

/// Scale, body count, temporal size and modality, in that order.
pub fn prepare_sequence<T: Real>(seq: &SkeletonSequence<T>, cfg: &EmbedConfig) -> Result<SkeletonSequence<T>> {
    let mut out = if cfg.scale != 1.0 {
        let s = T::lit(cfg.scale);
        seq.map_points(|_, p| p.map(|c| c * s))?
    } else {
        seq.clone()
    };
    if let Some(b) = cfg.bodies {
        out = out.with_bodies(b)?;
    }
    if let Some(t) = cfg.target_frames {
        out = resize_temporal(&out, t)?;
    }
    if cfg.modality == Modality::Velocity {
        out = velocity(&out);
    }
    Ok(out)
}

/// Stacks a batch into a [`FeatureTensor`].
///
/// Raw channels come first, embeddings follow in channel-map order. Only
/// joints of the hand set carry embedding values; all others are zero.
pub fn assemble<T: Real, R: Rng + ?Sized>(
    batch: &[SkeletonSequence<T>],
    cfg: &EmbedConfig,
    rng: &mut R,
) -> Result<FeatureTensor<T>> {
    let first = batch.first().ok_or(Error::Empty("batch"))?;
    let joints = first.joints();
    if let Some(bad) = batch.iter().find(|s| s.joints() != joints) {
        return Err(Error::shape(format!("batch mixes {joints} and {} joints", bad.joints())));
    }
    let hand = cfg.hand_joints(joints);
    if cfg.mode != EmbedMode::None {
        validate_subset(&hand, joints)?;
    }

    let mut prepared = batch.iter().map(|s| prepare_sequence(s, cfg)).collect::<Result<Vec<_>>>()?;
    let frames = prepared[0].frames();
    if let Some(bad) = prepared.iter().find(|s| s.frames() != frames) {
        return Err(Error::shape(format!(
            "batch mixes {frames} and {} frames; set a target frame count",
            bad.frames()
        )));
    }
    let bodies = prepared.iter().map(SkeletonSequence::bodies).max().expect("nonempty");
    for s in prepared.iter_mut().filter(|s| s.bodies() != bodies) {
        *s = s.with_bodies(bodies)?;
    }

    let channels = cfg.channel_count(hand.len());
    let seeds: Vec<u64> = prepared.iter().map(|_| rng.random()).collect();
    let blocks = prepared
        .par_iter()
        .zip(seeds)
        .map(|(seq, seed)| embed_sample(seq, cfg, &hand, channels, seed))
        .collect::<Result<Vec<_>>>()?;

    let labels = batch.iter().map(|s| s.label).collect::<Option<Vec<_>>>();
    let data = DenseTensor::new(vec![batch.len(), bodies, channels, frames, joints], blocks.concat())?;
    FeatureTensor::new(data, cfg.channel_map(hand.len()), labels)
}

/// One sample as `M × C × T × V`.
fn embed_sample<T: Real>(
    seq: &SkeletonSequence<T>,
    cfg: &EmbedConfig,
    hand: &[usize],
    channels: usize,
    seed: u64,
) -> Result<Vec<T>> {
    let (mb, tn, vn) = (seq.bodies(), seq.frames(), seq.joints());
    let at = |m: usize, c: usize, t: usize, v: usize| ((m * channels + c) * tn + t) * vn + v;
    let mut out = vec![T::zero(); mb * channels * tn * vn];

    let offset = if cfg.mode.has_raw() {
        for t in 0..tn {
            for m in 0..mb {
                for (v, p) in seq.frame_body(t, m).iter().enumerate() {
                    for (c, &x) in p.iter().enumerate() {
                        out[at(m, c, t, v)] = x;
                    }
                }
            }
        }
        3
    } else {
        0
    };

    let emb = cfg.embedding_channels(hand.len());
    match cfg.mode {
        EmbedMode::None => {}
        EmbedMode::RandomBaseline => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for m in 0..mb {
                for f in 0..emb {
                    for t in 0..tn {
                        for &v in hand {
                            out[at(m, offset + f, t, v)] = T::lit(rng.sample(StandardNormal));
                        }
                    }
                }
            }
        }
        EmbedMode::Lshr | EmbedMode::LshrOnly | EmbedMode::Lsht => {
            let field = to_local(seq, hand, cfg.up_axis)?;
            let coeffs = match cfg.mode {
                EmbedMode::Lsht if cfg.lsht_mean => lsht_transform_mean(&field, &cfg.degrees),
                EmbedMode::Lsht => lsht_transform(&field, &cfg.degrees),
                _ => lshr_embed(&field, &cfg.degrees),
            };
            let formatted = coeffs.formatted(cfg.format);
            debug_assert_eq!(formatted.dims()[3], emb);
            let values = formatted.data();
            let s = hand.len();
            for t in 0..tn {
                for m in 0..mb {
                    for (i, &v) in hand.iter().enumerate() {
                        let row = &values[((t * mb + m) * s + i) * emb..][..emb];
                        for (f, &x) in row.iter().enumerate() {
                            out[at(m, offset + f, t, v)] = x;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
