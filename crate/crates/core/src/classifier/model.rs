//! Shared-topology graph convolution blocks with hand-written gradients.
//!
//! Each block maps `C_in × T × V` to `C_out × T' × V`:
//!
//! ```text
//! u = Wᵀ h                 channel mixing      (C_in × C_out weights)
//! z = u (A_base + A_learn) graph aggregation   (V × V)
//! a = relu(z)
//! y = K * a + b            temporal conv       (C_out × C_out × k, stride s)
//! out = relu(y)
//! ```
//!
//! The head averages over bodies, frames and joints and applies a linear
//! layer. Bodies share all weights.

use rand::Rng;
use rayon::prelude::*;

use super::graph::Graph;
use crate::config::{join_list, KvConfig};
use crate::error::{Error, Result};
use crate::features::FeatureTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct ArchConfig {
    pub in_channels: usize,
    pub frames: usize,
    pub joints: usize,
    pub classes: usize,
    pub widths: Vec<usize>,
    pub strides: Vec<usize>,
    pub kernel: usize,
    pub graph: Graph,
}

impl ArchConfig {
    /// Four blocks of widths 16, 16, 32, 32, kernel 5, stride 2 on the
    /// last two blocks.
    pub fn desk(in_channels: usize, frames: usize, joints: usize, classes: usize) -> Self {
        Self {
            in_channels,
            frames,
            joints,
            classes,
            widths: vec![16, 16, 32, 32],
            strides: vec![1, 1, 2, 2],
            kernel: 5,
            graph: Graph::Auto,
        }
    }

    /// No graph blocks: pooled input straight into the linear head.
    pub fn linear(in_channels: usize, frames: usize, joints: usize, classes: usize) -> Self {
        Self { widths: Vec::new(), strides: Vec::new(), ..Self::desk(in_channels, frames, joints, classes) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.frames == 0 || self.joints == 0 {
            return Err(Error::shape("input channels, frames and joints must be positive"));
        }
        if self.classes < 2 {
            return Err(Error::shape("need at least two classes"));
        }
        if self.widths.len() != self.strides.len() {
            return Err(Error::shape(format!("{} widths but {} strides", self.widths.len(), self.strides.len())));
        }
        if self.widths.contains(&0) || self.strides.contains(&0) {
            return Err(Error::shape("widths and strides must be positive"));
        }
        if self.kernel.is_multiple_of(2) {
            return Err(Error::shape(format!("temporal kernel must be odd, got {}", self.kernel)));
        }
        self.graph.bones(self.joints)?;
        Ok(())
    }

    /// Frame count after each block.
    fn frame_chain(&self) -> Vec<usize> {
        let pad = self.kernel / 2;
        let mut t = self.frames;
        let mut out = Vec::with_capacity(self.strides.len());
        for &s in &self.strides {
            t = (t + 2 * pad - self.kernel) / s + 1;
            out.push(t);
        }
        out
    }

    /// Closed-form parameter count.
    pub fn parameter_count(&self) -> usize {
        let v = self.joints;
        let mut c_in = self.in_channels;
        let mut n = 0;
        for &c in &self.widths {
            n += v * v + c_in * c + c * c * self.kernel + c;
            c_in = c;
        }
        n + c_in * self.classes + self.classes
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::default();
        kv.set("in_channels", self.in_channels);
        kv.set("frames", self.frames);
        kv.set("joints", self.joints);
        kv.set("classes", self.classes);
        kv.set("widths", join_list(&self.widths));
        kv.set("strides", join_list(&self.strides));
        kv.set("kernel", self.kernel);
        kv.set("graph", self.graph.name());
        kv
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let need = |k: &str| -> Result<usize> { kv.get(k)?.ok_or_else(|| Error::config(format!("missing {k}"))) };
        let arch = Self {
            in_channels: need("in_channels")?,
            frames: need("frames")?,
            joints: need("joints")?,
            classes: need("classes")?,
            widths: kv.get_list("widths")?.unwrap_or_default(),
            strides: kv.get_list("strides")?.unwrap_or_default(),
            kernel: kv.get_or("kernel", 5)?,
            graph: kv.get_or("graph", Graph::Auto)?,
        };
        arch.validate()?;
        Ok(arch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl ParamSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct BlockShape {
    c_in: usize,
    c_out: usize,
    t_in: usize,
    t_out: usize,
    stride: usize,
    adj: usize,
    mix: usize,
    conv: usize,
    bias: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    arch: ArchConfig,
    base_adjacency: Vec<f64>,
    /// Fixed per-channel input standardization, `(x - shift) * scale`.
    input_shift: Vec<f64>,
    input_scale: Vec<f64>,
    params: Vec<f64>,
    layout: Vec<ParamSpec>,
}

struct BlockCache {
    input: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
}

/// Per-sample forward state needed by the backward pass.
pub(crate) struct SampleCache {
    bodies: Vec<Vec<BlockCache>>,
    finals: Vec<Vec<f64>>,
    pooled: Vec<f64>,
}

impl SampleCache {
    /// Appends `x > 0` for every ReLU input, in forward order.
    pub(crate) fn relu_pattern(&self, out: &mut Vec<bool>) {
        for block in self.bodies.iter().flatten() {
            out.extend(block.z.iter().chain(&block.y).map(|&x| x > 0.0));
        }
    }
}

#[inline]
fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

impl GcnModel {
    /// Fan-in scaled uniform weights, zero biases, zero learned adjacency.
    pub fn init<R: Rng + ?Sized>(arch: ArchConfig, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        let kernel = model.arch.kernel;
        for spec in model.layout.clone() {
            let bound = if spec.name.ends_with(".mix") {
                (6.0 / spec.shape[0] as f64).sqrt()
            } else if spec.name.ends_with(".conv") {
                (6.0 / (spec.shape[1] * kernel) as f64).sqrt()
            } else if spec.name == "head.weight" {
                (1.0 / spec.shape[0] as f64).sqrt()
            } else {
                continue;
            };
            for p in &mut model.params[spec.range()] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(model)
    }

    /// All parameters zero.
    pub fn zeros(arch: ArchConfig) -> Result<Self> {
        arch.validate()?;
        let base_adjacency = arch.graph.normalized_adjacency(arch.joints)?;
        let v = arch.joints;
        let mut layout = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, shape: Vec<usize>| {
            let spec = ParamSpec { name, shape, offset };
            offset += spec.len();
            layout.push(spec);
        };
        let mut c_in = arch.in_channels;
        for (b, &c) in arch.widths.iter().enumerate() {
            push(format!("block{b}.adjacency"), vec![v, v]);
            push(format!("block{b}.mix"), vec![c_in, c]);
            push(format!("block{b}.conv"), vec![c, c, arch.kernel]);
            push(format!("block{b}.bias"), vec![c]);
            c_in = c;
        }
        push("head.weight".into(), vec![c_in, arch.classes]);
        push("head.bias".into(), vec![arch.classes]);
        debug_assert_eq!(offset, arch.parameter_count());
        let c = arch.in_channels;
        Ok(Self {
            arch,
            base_adjacency,
            input_shift: vec![0.0; c],
            input_scale: vec![1.0; c],
            params: vec![0.0; offset],
            layout,
        })
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.arch
    }

    /// Standardizes each input channel to zero mean and unit variance over
    /// the given set. Channels with no spread are only centred.
    pub fn fit_input_normalization(&mut self, set: &FeatureTensor<f64>) -> Result<()> {
        self.check_input(set)?;
        if set.is_empty() {
            return Err(Error::Empty("normalization set"));
        }
        let cells = set.frames() * set.joints();
        let count = (set.len() * set.bodies() * cells) as f64;
        let c_count = self.arch.in_channels;
        let mut sum = vec![0.0; c_count];
        let mut sq = vec![0.0; c_count];
        for block in set.data().data().chunks_exact(c_count * cells) {
            for (c, plane) in block.chunks_exact(cells).enumerate() {
                sum[c] += plane.iter().sum::<f64>();
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count).collect();
        for block in set.data().data().chunks_exact(c_count * cells) {
            for (c, plane) in block.chunks_exact(cells).enumerate() {
                sq[c] += plane.iter().map(|x| (x - mean[c]).powi(2)).sum::<f64>();
            }
        }
        self.input_scale = sq
            .iter()
            .map(|s| {
                let sd = (s / count).sqrt();
                if sd > 1e-12 {
                    1.0 / sd
                } else {
                    1.0
                }
            })
            .collect();
        self.input_shift = mean;
        Ok(())
    }

    pub fn input_normalization(&self) -> (&[f64], &[f64]) {
        (&self.input_shift, &self.input_scale)
    }

    pub fn set_input_normalization(&mut self, shift: Vec<f64>, scale: Vec<f64>) -> Result<()> {
        let c = self.arch.in_channels;
        if shift.len() != c || scale.len() != c {
            return Err(Error::shape(format!("normalization needs {c} channels")));
        }
        self.input_shift = shift;
        self.input_scale = scale;
        Ok(())
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn layout(&self) -> &[ParamSpec] {
        &self.layout
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn param(&self, name: &str) -> Option<&[f64]> {
        self.layout.iter().find(|s| s.name == name).map(|s| &self.params[s.range()])
    }

    fn blocks(&self) -> Vec<BlockShape> {
        let chain = self.arch.frame_chain();
        let mut c_in = self.arch.in_channels;
        let mut t_in = self.arch.frames;
        self.arch
            .widths
            .iter()
            .enumerate()
            .map(|(b, &c_out)| {
                let specs = &self.layout[4 * b..4 * b + 4];
                let shape = BlockShape {
                    c_in,
                    c_out,
                    t_in,
                    t_out: chain[b],
                    stride: self.arch.strides[b],
                    adj: specs[0].offset,
                    mix: specs[1].offset,
                    conv: specs[2].offset,
                    bias: specs[3].offset,
                };
                c_in = c_out;
                t_in = chain[b];
                shape
            })
            .collect()
    }

    fn head(&self) -> (&ParamSpec, &ParamSpec) {
        let n = self.layout.len();
        (&self.layout[n - 2], &self.layout[n - 1])
    }

    pub fn check_input(&self, batch: &FeatureTensor<f64>) -> Result<()> {
        let a = &self.arch;
        if (batch.channels(), batch.frames(), batch.joints()) != (a.in_channels, a.frames, a.joints) {
            return Err(Error::shape(format!(
                "model expects C×T×V = {}×{}×{}, batch has {}×{}×{}",
                a.in_channels,
                a.frames,
                a.joints,
                batch.channels(),
                batch.frames(),
                batch.joints()
            )));
        }
        Ok(())
    }

    /// Logits, `N × classes` row-major.
    pub fn forward(&self, batch: &FeatureTensor<f64>) -> Result<Vec<f64>> {
        self.check_input(batch)?;
        let rows: Vec<Vec<f64>> =
            (0..batch.len()).into_par_iter().map(|n| self.forward_sample(batch.sample(n), batch.bodies()).0).collect();
        Ok(rows.concat())
    }

    /// `sample` is `M × C × T × V`.
    pub(crate) fn forward_sample(&self, sample: &[f64], bodies: usize) -> (Vec<f64>, SampleCache) {
        let per_body = sample.len() / bodies;
        let blocks = self.blocks();
        let mut body_caches = Vec::with_capacity(bodies);
        let mut finals = Vec::with_capacity(bodies);
        let plane = per_body / self.arch.in_channels;
        for m in 0..bodies {
            let mut h: Vec<f64> = sample[m * per_body..(m + 1) * per_body]
                .chunks_exact(plane)
                .zip(self.input_shift.iter().zip(&self.input_scale))
                .flat_map(|(xs, (&shift, &scale))| xs.iter().map(move |&x| (x - shift) * scale))
                .collect();
            let mut caches = Vec::with_capacity(blocks.len());
            for shape in &blocks {
                let (z, y) = self.block_forward(shape, &h);
                let out: Vec<f64> = y.iter().map(|&x| relu(x)).collect();
                caches.push(BlockCache { input: std::mem::replace(&mut h, out), z, y });
            }
            body_caches.push(caches);
            finals.push(h);
        }

        let (w, b) = self.head();
        let channels = w.shape[0];
        let cells = finals[0].len() / channels;
        let scale = 1.0 / (bodies * cells) as f64;
        let mut pooled = vec![0.0; channels];
        for h in &finals {
            for (c, p) in pooled.iter_mut().enumerate() {
                *p += h[c * cells..(c + 1) * cells].iter().sum::<f64>() * scale;
            }
        }
        let classes = self.arch.classes;
        let wh = &self.params[w.range()];
        let mut logits = self.params[b.range()].to_vec();
        for (c, &p) in pooled.iter().enumerate() {
            for (k, l) in logits.iter_mut().enumerate() {
                *l += wh[c * classes + k] * p;
            }
        }
        (logits, SampleCache { bodies: body_caches, finals, pooled })
    }

    fn block_forward(&self, s: &BlockShape, h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let v = self.arch.joints;
        let k = self.arch.kernel;
        let pad = k / 2;
        let plane_in = s.t_in * v;
        let mix = &self.params[s.mix..s.mix + s.c_in * s.c_out];

        // u = Wᵀ h
        let mut u = vec![0.0; s.c_out * plane_in];
        for ci in 0..s.c_in {
            let hrow = &h[ci * plane_in..(ci + 1) * plane_in];
            for co in 0..s.c_out {
                let w = mix[ci * s.c_out + co];
                if w == 0.0 {
                    continue;
                }
                for (dst, &x) in u[co * plane_in..(co + 1) * plane_in].iter_mut().zip(hrow) {
                    *dst += w * x;
                }
            }
        }

        // z = u A
        let adj = self.effective_adjacency(s);
        let mut z = vec![0.0; s.c_out * plane_in];
        for (urow, zrow) in u.chunks_exact(v).zip(z.chunks_exact_mut(v)) {
            for (j, &x) in urow.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for (dst, &a) in zrow.iter_mut().zip(&adj[j * v..(j + 1) * v]) {
                    *dst += x * a;
                }
            }
        }

        // y = K * relu(z) + b
        let conv = &self.params[s.conv..s.conv + s.c_out * s.c_out * k];
        let bias = &self.params[s.bias..s.bias + s.c_out];
        let plane_out = s.t_out * v;
        let mut y = vec![0.0; s.c_out * plane_out];
        for co in 0..s.c_out {
            y[co * plane_out..(co + 1) * plane_out].fill(bias[co]);
        }
        for co in 0..s.c_out {
            for ci in 0..s.c_out {
                for kk in 0..k {
                    let w = conv[(co * s.c_out + ci) * k + kk];
                    if w == 0.0 {
                        continue;
                    }
                    for to in 0..s.t_out {
                        let ti = (to * s.stride + kk) as isize - pad as isize;
                        if ti < 0 || ti as usize >= s.t_in {
                            continue;
                        }
                        let src = &z[(ci * s.t_in + ti as usize) * v..][..v];
                        let dst = &mut y[(co * s.t_out + to) * v..][..v];
                        for (d, &x) in dst.iter_mut().zip(src) {
                            *d += w * relu(x);
                        }
                    }
                }
            }
        }
        (z, y)
    }

    fn effective_adjacency(&self, s: &BlockShape) -> Vec<f64> {
        let v = self.arch.joints;
        self.base_adjacency.iter().zip(&self.params[s.adj..s.adj + v * v]).map(|(a, b)| a + b).collect()
    }

    /// Accumulates `∂L/∂θ` into `grad` given `∂L/∂logits`.
    pub(crate) fn backward_sample(&self, cache: &SampleCache, dlogits: &[f64], grad: &mut [f64]) {
        let (w, b) = self.head();
        let classes = self.arch.classes;
        let channels = w.shape[0];
        let wh = &self.params[w.range()];
        for (g, &d) in grad[b.range()].iter_mut().zip(dlogits) {
            *g += d;
        }
        let mut dpooled = vec![0.0; channels];
        {
            let gw = &mut grad[w.range()];
            for c in 0..channels {
                for k in 0..classes {
                    gw[c * classes + k] += cache.pooled[c] * dlogits[k];
                    dpooled[c] += wh[c * classes + k] * dlogits[k];
                }
            }
        }

        let bodies = cache.finals.len();
        let cells = cache.finals[0].len() / channels;
        let scale = 1.0 / (bodies * cells) as f64;
        let blocks = self.blocks();
        for body in &cache.bodies {
            let mut dh: Vec<f64> = dpooled.iter().flat_map(|&d| std::iter::repeat_n(d * scale, cells)).collect();
            for (shape, bc) in blocks.iter().zip(body).rev() {
                dh = self.block_backward(shape, bc, &dh, grad);
            }
        }
    }

    fn block_backward(&self, s: &BlockShape, cache: &BlockCache, dout: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let v = self.arch.joints;
        let k = self.arch.kernel;
        let pad = k / 2;
        let plane_in = s.t_in * v;
        let plane_out = s.t_out * v;

        let dy: Vec<f64> = dout.iter().zip(&cache.y).map(|(&d, &y)| if y > 0.0 { d } else { 0.0 }).collect();

        for co in 0..s.c_out {
            grad[s.bias + co] += dy[co * plane_out..(co + 1) * plane_out].iter().sum::<f64>();
        }

        // temporal conv
        let conv = &self.params[s.conv..s.conv + s.c_out * s.c_out * k];
        let mut da = vec![0.0; s.c_out * plane_in];
        for co in 0..s.c_out {
            for ci in 0..s.c_out {
                for kk in 0..k {
                    let idx = (co * s.c_out + ci) * k + kk;
                    let w = conv[idx];
                    let mut gw = 0.0;
                    for to in 0..s.t_out {
                        let ti = (to * s.stride + kk) as isize - pad as isize;
                        if ti < 0 || ti as usize >= s.t_in {
                            continue;
                        }
                        let off_in = (ci * s.t_in + ti as usize) * v;
                        let g = &dy[(co * s.t_out + to) * v..][..v];
                        let z = &cache.z[off_in..off_in + v];
                        for (&gi, &zi) in g.iter().zip(z) {
                            gw += gi * relu(zi);
                        }
                        for (d, &gi) in da[off_in..off_in + v].iter_mut().zip(g) {
                            *d += w * gi;
                        }
                    }
                    grad[s.conv + idx] += gw;
                }
            }
        }

        // relu
        let dz: Vec<f64> = da.iter().zip(&cache.z).map(|(&d, &z)| if z > 0.0 { d } else { 0.0 }).collect();

        // z = u A: recompute u from the cached input.
        let mix = &self.params[s.mix..s.mix + s.c_in * s.c_out];
        let mut u = vec![0.0; s.c_out * plane_in];
        for ci in 0..s.c_in {
            let hrow = &cache.input[ci * plane_in..(ci + 1) * plane_in];
            for co in 0..s.c_out {
                let w = mix[ci * s.c_out + co];
                for (dst, &x) in u[co * plane_in..(co + 1) * plane_in].iter_mut().zip(hrow) {
                    *dst += w * x;
                }
            }
        }
        let adj = self.effective_adjacency(s);
        let mut du = vec![0.0; s.c_out * plane_in];
        {
            let gadj = &mut grad[s.adj..s.adj + v * v];
            for ((urow, zrow), durow) in u.chunks_exact(v).zip(dz.chunks_exact(v)).zip(du.chunks_exact_mut(v)) {
                for j in 0..v {
                    let arow = &adj[j * v..(j + 1) * v];
                    let grow = &mut gadj[j * v..(j + 1) * v];
                    let uj = urow[j];
                    let mut acc = 0.0;
                    for ((g, &a), &d) in grow.iter_mut().zip(arow).zip(zrow) {
                        *g += uj * d;
                        acc += a * d;
                    }
                    durow[j] = acc;
                }
            }
        }

        // u = Wᵀ h
        let mut dh = vec![0.0; s.c_in * plane_in];
        for ci in 0..s.c_in {
            let hrow = &cache.input[ci * plane_in..(ci + 1) * plane_in];
            let dhrow = &mut dh[ci * plane_in..(ci + 1) * plane_in];
            for co in 0..s.c_out {
                let durow = &du[co * plane_in..(co + 1) * plane_in];
                let w = mix[ci * s.c_out + co];
                let mut gw = 0.0;
                for ((d, &x), &g) in dhrow.iter_mut().zip(hrow).zip(durow) {
                    gw += x * g;
                    *d += w * g;
                }
                grad[s.mix + ci * s.c_out + co] += gw;
            }
        }
        dh
    }
}

/// Softmax cross-entropy of one row; returns `(loss, ∂loss/∂logits)`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln() + max;
    let loss = log_sum - logits[label];
    let mut grad = softmax(logits);
    grad[label] -= 1.0;
    (loss, grad)
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn argmax(row: &[f64]) -> usize {
    row.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best }).0
}
