use std::str::FromStr;

use crate::error::{Error, Result};

/// Joint roles of one hand inside a template.
#[derive(Debug, Clone, PartialEq)]
pub struct HandRig {
    pub wrist: usize,
    /// Finger chains from the knuckle outward; the first is the thumb,
    /// the second the index finger.
    pub fingers: Vec<Vec<usize>>,
}

impl HandRig {
    pub fn thumb_tip(&self) -> usize {
        *self.fingers[0].last().expect("nonempty finger")
    }

    pub fn index_tip(&self) -> usize {
        *self.fingers[1].last().expect("nonempty finger")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemplateKind {
    /// Eight joints in NTU hand-set order: per side wrist, hand, tip, thumb.
    #[default]
    TwoHand,
    /// One hand, 21 joints: wrist, five knuckles, then PIP/DIP/TIP per finger.
    Hand21,
}

impl TemplateKind {
    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::TwoHand => "two-hand",
            TemplateKind::Hand21 => "hand21",
        }
    }

    pub fn joints(self) -> usize {
        match self {
            TemplateKind::TwoHand => 8,
            TemplateKind::Hand21 => 21,
        }
    }

    /// Rest pose in metres, Y up, hands held in front of the body.
    pub fn rest_pose(self) -> Vec<[f64; 3]> {
        match self {
            TemplateKind::TwoHand => {
                let mut pose = Vec::with_capacity(8);
                for side in [-1.0, 1.0] {
                    let x = 0.18 * side;
                    pose.push([x, 1.00, 0.35]);
                    pose.push([x, 1.07, 0.36]);
                    pose.push([x + 0.01 * side, 1.16, 0.38]);
                    pose.push([x - 0.05 * side, 1.05, 0.40]);
                }
                pose
            }
            TemplateKind::Hand21 => {
                let base = [0.05, 1.00, 0.35];
                let spread = [-0.035, -0.015, 0.0, 0.015, 0.03];
                let lengths = [
                    [0.035, 0.03, 0.025],
                    [0.04, 0.025, 0.02],
                    [0.045, 0.03, 0.02],
                    [0.04, 0.028, 0.02],
                    [0.032, 0.022, 0.018],
                ];
                let knuckle_y = [0.03, 0.085, 0.09, 0.085, 0.075];
                let mut pose = vec![base; 21];
                for f in 0..5 {
                    let kx = base[0] + spread[f] * if f == 0 { 1.3 } else { 1.0 };
                    let mut p = [kx, base[1] + knuckle_y[f], base[2] + if f == 0 { 0.02 } else { 0.0 }];
                    pose[1 + f] = p;
                    for (s, len) in lengths[f].iter().enumerate() {
                        p[1] += len;
                        if f == 0 {
                            p[0] -= 0.4 * len;
                        }
                        pose[6 + 3 * f + s] = p;
                    }
                }
                pose
            }
        }
    }

    pub fn hands(self) -> Vec<HandRig> {
        match self {
            TemplateKind::TwoHand => (0..2)
                .map(|h| {
                    let o = 4 * h;
                    HandRig { wrist: o, fingers: vec![vec![o + 3], vec![o + 1, o + 2]] }
                })
                .collect(),
            TemplateKind::Hand21 => vec![HandRig {
                wrist: 0,
                fingers: (0..5).map(|f| vec![1 + f, 6 + 3 * f, 7 + 3 * f, 8 + 3 * f]).collect(),
            }],
        }
    }
}

impl FromStr for TemplateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "two-hand" | "8" => Ok(TemplateKind::TwoHand),
            "hand21" | "21" => Ok(TemplateKind::Hand21),
            other => Err(Error::config(format!("unknown template '{other}' (two-hand, hand21)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Graph;

    #[test]
    fn rigs_match_graph_bones() {
        for kind in [TemplateKind::TwoHand, TemplateKind::Hand21] {
            let pose = kind.rest_pose();
            assert_eq!(pose.len(), kind.joints());
            let bones = Graph::Auto.bones(kind.joints()).unwrap();
            for rig in kind.hands() {
                for chain in &rig.fingers {
                    let mut prev =
                        if kind == TemplateKind::TwoHand && chain.len() == 1 { rig.wrist + 1 } else { rig.wrist };
                    for &j in chain {
                        assert!(bones.contains(&(prev, j)) || bones.contains(&(j, prev)), "{kind:?} {prev}-{j}");
                        prev = j;
                    }
                }
            }
            for i in 0..pose.len() {
                for j in i + 1..pose.len() {
                    assert_ne!(pose[i], pose[j], "{kind:?} joints {i} and {j} coincide");
                }
            }
        }
    }
}
