use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use super::template::{HandRig, TemplateKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Pinch,
    Spread,
    Wave,
    Circle,
    FistCurl,
    Point,
}

/// Drawn once per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub amplitude: f64,
    /// Cycles over the whole sequence.
    pub frequency: f64,
    pub phase: f64,
}

impl Family {
    pub const ALL: [Family; 6] =
        [Family::Pinch, Family::Spread, Family::Wave, Family::Circle, Family::FistCurl, Family::Point];

    pub fn name(self) -> &'static str {
        match self {
            Family::Pinch => "pinch",
            Family::Spread => "spread",
            Family::Wave => "wave",
            Family::Circle => "circle",
            Family::FistCurl => "fist-curl",
            Family::Point => "point",
        }
    }

    /// Pose at normalized time `s ∈ [0, 1]`.
    pub fn pose(self, kind: TemplateKind, rest: &[[f64; 3]], motion: &Motion, s: f64) -> Vec<[f64; 3]> {
        let angle = TAU * motion.frequency * s + motion.phase;
        let osc = angle.sin();
        let ramp = 0.5 * (1.0 - angle.cos());
        let a = motion.amplitude;
        let mut pose = rest.to_vec();
        let hands = kind.hands();
        for (h, rig) in hands.iter().enumerate() {
            let side = if h == 0 && hands.len() == 2 { -1.0 } else { 1.0 };
            match self {
                Family::Pinch => pinch(&mut pose, rig, a * ramp),
                Family::Spread => match kind {
                    TemplateKind::TwoHand => translate(&mut pose, rig, [side * 0.08 * a * osc, 0.0, 0.0]),
                    TemplateKind::Hand21 => fan(&mut pose, rig, 0.35 * a * osc),
                },
                Family::Wave => {
                    let w = pose[rig.wrist];
                    for j in rig_joints(rig) {
                        pose[j] = rotate_about(pose[j], w, 2, 0.6 * a * osc);
                    }
                }
                Family::Circle => translate(&mut pose, rig, [0.06 * a * angle.cos(), 0.06 * a * osc, 0.0]),
                Family::FistCurl => {
                    for chain in &rig.fingers {
                        curl(&mut pose, rig.wrist, chain, a * ramp);
                    }
                }
                Family::Point => {
                    for (f, chain) in rig.fingers.iter().enumerate() {
                        if f != 1 {
                            curl(&mut pose, rig.wrist, chain, 0.6 * a);
                        }
                    }
                    let w = pose[rig.wrist];
                    for j in rig_joints(rig) {
                        pose[j] = rotate_about(pose[j], w, 0, -0.5 * PI * a * ramp);
                    }
                }
            }
        }
        pose
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::config(format!("unknown gesture family '{}'", s.trim())))
    }
}

fn rig_joints(rig: &HandRig) -> impl Iterator<Item = usize> + '_ {
    std::iter::once(rig.wrist).chain(rig.fingers.iter().flatten().copied())
}

fn translate(pose: &mut [[f64; 3]], rig: &HandRig, d: [f64; 3]) {
    for j in rig_joints(rig) {
        for k in 0..3 {
            pose[j][k] += d[k];
        }
    }
}

/// Rotates `p` about `centre` around coordinate axis `axis`.
fn rotate_about(p: [f64; 3], centre: [f64; 3], axis: usize, angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut d = [p[0] - centre[0], p[1] - centre[1], p[2] - centre[2]];
    let (di, dj) = (d[i], d[j]);
    d[i] = c * di - s * dj;
    d[j] = s * di + c * dj;
    [d[0] + centre[0], d[1] + centre[1], d[2] + centre[2]]
}

/// Folds a finger towards the palm; deeper joints bend further.
fn curl(pose: &mut [[f64; 3]], wrist: usize, chain: &[usize], amount: f64) {
    let pivot = pose[wrist];
    let n = chain.len() as f64;
    for (depth, &j) in chain.iter().enumerate() {
        let bend = 0.5 * PI * amount * (depth + 1) as f64 / n;
        pose[j] = rotate_about(pose[j], pivot, 0, bend);
    }
}

/// Thumb and index tips meet at their midpoint when `amount` is 1.
fn pinch(pose: &mut [[f64; 3]], rig: &HandRig, amount: f64) {
    let (t, i) = (rig.thumb_tip(), rig.index_tip());
    let mid = [0, 1, 2].map(|k| 0.5 * (pose[t][k] + pose[i][k]));
    for j in [t, i] {
        for k in 0..3 {
            pose[j][k] += 0.9 * amount * (mid[k] - pose[j][k]);
        }
    }
}

/// Rotates fingers sideways around the forward axis, fanning them out.
fn fan(pose: &mut [[f64; 3]], rig: &HandRig, angle: f64) {
    let pivot = pose[rig.wrist];
    let centre = (rig.fingers.len() as f64 - 1.0) / 2.0;
    for (f, chain) in rig.fingers.iter().enumerate() {
        let a = angle * (centre - f as f64) / centre.max(1.0);
        for &j in chain {
            pose[j] = rotate_about(pose[j], pivot, 2, a);
        }
    }
}
