use std::str::FromStr;

use crate::config::{join_list, KvConfig};
use crate::error::{Error, Result};
use crate::geometry::Axis;
use crate::harmonics::{ComplexFormat, DegreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbedMode {
    /// Raw Cartesian channels only.
    #[default]
    None,
    Lshr,
    Lsht,
    /// LSHR channels without the Cartesian ones.
    LshrOnly,
    /// Standard-normal noise with the LSHR channel layout.
    RandomBaseline,
}

impl EmbedMode {
    pub fn name(self) -> &'static str {
        match self {
            EmbedMode::None => "none",
            EmbedMode::Lshr => "lshr",
            EmbedMode::Lsht => "lsht",
            EmbedMode::LshrOnly => "lshr-only",
            EmbedMode::RandomBaseline => "random",
        }
    }

    pub fn has_raw(self) -> bool {
        self != EmbedMode::LshrOnly
    }
}

impl FromStr for EmbedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "none" | "raw" => EmbedMode::None,
            "lshr" => EmbedMode::Lshr,
            "lsht" => EmbedMode::Lsht,
            "lshr-only" | "lshr_only" => EmbedMode::LshrOnly,
            "random" | "random_baseline" | "random-baseline" => EmbedMode::RandomBaseline,
            other => return Err(Error::config(format!("unknown embedding mode {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modality {
    #[default]
    Location,
    Velocity,
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "loc" | "location" => Ok(Modality::Location),
            "vel" | "velocity" => Ok(Modality::Velocity),
            other => Err(Error::config(format!("unknown modality {other:?}"))),
        }
    }
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Location => "loc",
            Modality::Velocity => "vel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    pub mode: EmbedMode,
    pub format: ComplexFormat,
    pub degrees: DegreeSet,
    /// Joints that receive embeddings; `None` means every joint.
    pub hand_set: Option<Vec<usize>>,
    pub up_axis: Axis,
    pub target_frames: Option<usize>,
    /// Pad or truncate the body dimension.
    pub bodies: Option<usize>,
    /// Multiplies coordinates before anything else.
    pub scale: f64,
    pub modality: Modality,
    /// Divide LSHT sums by the neighbor count.
    pub lsht_mean: bool,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            mode: EmbedMode::None,
            format: ComplexFormat::Magnitude,
            degrees: DegreeSet::default(),
            hand_set: None,
            up_axis: Axis::Y,
            target_frames: None,
            bodies: None,
            scale: 1.0,
            modality: Modality::Location,
            lsht_mean: false,
        }
    }
}

const KEYS: &[&str] =
    &["mode", "format", "degrees", "hand_set", "up_axis", "frames", "bodies", "scale", "modality", "lsht_mean"];

impl EmbedConfig {
    pub fn hand_joints(&self, joints: usize) -> Vec<usize> {
        self.hand_set.clone().unwrap_or_else(|| (0..joints).collect())
    }

    /// Embedding channels added per joint for a hand set of `hand_size` joints.
    pub fn embedding_channels(&self, hand_size: usize) -> usize {
        let per = self.degrees.coefficient_count() * self.format.parts();
        match self.mode {
            EmbedMode::None => 0,
            EmbedMode::Lsht => per,
            EmbedMode::Lshr | EmbedMode::LshrOnly | EmbedMode::RandomBaseline => hand_size * per,
        }
    }

    pub fn channel_count(&self, hand_size: usize) -> usize {
        let raw = if self.mode.has_raw() { 3 } else { 0 };
        raw + self.embedding_channels(hand_size)
    }

    /// Channel labels in tensor order.
    pub fn channel_map(&self, hand_size: usize) -> Vec<String> {
        let mut names = Vec::with_capacity(self.channel_count(hand_size));
        if self.mode.has_raw() {
            names.extend(["cart_x", "cart_y", "cart_z"].map(String::from));
        }
        let prefix = match self.mode {
            EmbedMode::None => return names,
            EmbedMode::Lsht => "lsht",
            _ => "lshr",
        };
        let slots = if self.mode == EmbedMode::Lsht { 1 } else { hand_size };
        for part in self.format.part_names() {
            for n in 0..slots {
                for idx in self.degrees.indices() {
                    let mut name = format!("{prefix}_l{}_m{}_{part}", idx.ell(), idx.m());
                    if self.mode != EmbedMode::Lsht {
                        name.push_str(&format!("_n{n}"));
                    }
                    names.push(name);
                }
            }
        }
        names
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::default();
        kv.set("mode", self.mode.name());
        kv.set("format", self.format.name());
        kv.set("degrees", &self.degrees);
        if let Some(h) = &self.hand_set {
            kv.set("hand_set", join_list(h));
        }
        kv.set("up_axis", self.up_axis.name());
        if let Some(t) = self.target_frames {
            kv.set("frames", t);
        }
        if let Some(b) = self.bodies {
            kv.set("bodies", b);
        }
        kv.set("scale", self.scale);
        kv.set("modality", self.modality.name());
        kv.set("lsht_mean", self.lsht_mean);
        kv
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.check_keys(KEYS)?;
        let d = Self::default();
        let scale = kv.get_or("scale", d.scale)?;
        if !(scale > 0.0 && f64::is_finite(scale)) {
            return Err(Error::config(format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            mode: kv.get_or("mode", d.mode)?,
            format: kv.get_or("format", d.format)?,
            degrees: kv.get_or("degrees", d.degrees)?,
            hand_set: kv.get_list("hand_set")?,
            up_axis: kv.get_or("up_axis", d.up_axis)?,
            target_frames: kv.get("frames")?,
            bodies: kv.get("bodies")?,
            scale,
            modality: kv.get_or("modality", d.modality)?,
            lsht_mean: kv.get_or("lsht_mean", d.lsht_mean)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fpha_lshr_channel_count() {
        let cfg = EmbedConfig { mode: EmbedMode::Lshr, ..Default::default() };
        assert_eq!(cfg.channel_count(21), 3 + 21 * 8);
        assert_eq!(cfg.channel_map(21).len(), 171);
    }

    #[test]
    fn ntu_lsht_mag_phase_channel_count() {
        let cfg = EmbedConfig { mode: EmbedMode::Lsht, format: ComplexFormat::MagAndPhase, ..Default::default() };
        assert_eq!(cfg.channel_count(8), 19);
        let map = cfg.channel_map(8);
        assert_eq!(map[3], "lsht_l1_m-1_mag");
        assert_eq!(map[11], "lsht_l1_m-1_phase");
    }

    #[test]
    fn random_baseline_matches_lshr_layout() {
        let lshr = EmbedConfig { mode: EmbedMode::Lshr, ..Default::default() };
        let rand = EmbedConfig { mode: EmbedMode::RandomBaseline, ..Default::default() };
        assert_eq!(lshr.channel_map(8), rand.channel_map(8));
    }

    #[test]
    fn kv_round_trip() {
        let cfg = EmbedConfig {
            mode: EmbedMode::LshrOnly,
            format: ComplexFormat::RealAndImag,
            degrees: DegreeSet::new(vec![0, 1, 2]).unwrap(),
            hand_set: Some(vec![1, 4, 2]),
            up_axis: Axis::Z,
            target_frames: Some(64),
            bodies: Some(2),
            scale: 0.001,
            modality: Modality::Velocity,
            lsht_mean: true,
        };
        let text = cfg.to_kv().to_text();
        assert_eq!(EmbedConfig::from_kv(&KvConfig::parse(&text).unwrap()).unwrap(), cfg);
        assert!(EmbedConfig::from_kv(&KvConfig::parse("mode = fancy").unwrap()).is_err());
        assert!(EmbedConfig::from_kv(&KvConfig::parse("colour = red").unwrap()).is_err());
    }
}
