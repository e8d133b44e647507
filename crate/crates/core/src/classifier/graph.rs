//! Fixed skeleton graphs and their normalized adjacency.

use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Graph {
    /// Picked from the joint count: 25 → NTU, 21 → FPHA, 8 → two-hand,
    /// anything else → self loops only.
    #[default]
    Auto,
    Ntu,
    Fpha,
    TwoHand,
    SelfLoops,
}

/// NTU RGB+D bones, 0-based.
#[rustfmt::skip]
const NTU_BONES: [(usize, usize); 24] = [
    (0, 1), (1, 20), (2, 20), (3, 2), (4, 20), (5, 4), (6, 5), (7, 6),
    (8, 20), (9, 8), (10, 9), (11, 10), (12, 0), (13, 12), (14, 13), (15, 14),
    (16, 0), (17, 16), (18, 17), (19, 18), (21, 22), (22, 7), (23, 24), (24, 11),
];

/// Two hands of four joints each (wrist, hand, tip, thumb), in the order
/// of the NTU hand set.
const TWO_HAND_BONES: [(usize, usize); 6] = [(0, 1), (1, 2), (1, 3), (4, 5), (5, 6), (5, 7)];

/// Wrist to the five MCP joints, then MCP-PIP-DIP-TIP per finger.
fn fpha_bones() -> Vec<(usize, usize)> {
    let mut bones: Vec<(usize, usize)> = (1..=5).map(|mcp| (0, mcp)).collect();
    for finger in 0..5 {
        let pip = 6 + 3 * finger;
        bones.extend([(1 + finger, pip), (pip, pip + 1), (pip + 1, pip + 2)]);
    }
    bones
}

impl Graph {
    pub fn name(self) -> &'static str {
        match self {
            Graph::Auto => "auto",
            Graph::Ntu => "ntu",
            Graph::Fpha => "fpha",
            Graph::TwoHand => "two-hand",
            Graph::SelfLoops => "self",
        }
    }

    pub fn resolve(self, joints: usize) -> Graph {
        match self {
            Graph::Auto => match joints {
                25 => Graph::Ntu,
                21 => Graph::Fpha,
                8 => Graph::TwoHand,
                _ => Graph::SelfLoops,
            },
            g => g,
        }
    }

    pub fn bones(self, joints: usize) -> Result<Vec<(usize, usize)>> {
        let (bones, expected) = match self.resolve(joints) {
            Graph::Ntu => (NTU_BONES.to_vec(), 25),
            Graph::Fpha => (fpha_bones(), 21),
            Graph::TwoHand => (TWO_HAND_BONES.to_vec(), 8),
            _ => return Ok(Vec::new()),
        };
        if joints != expected {
            return Err(Error::shape(format!("{} graph needs {expected} joints, got {joints}", self.name())));
        }
        Ok(bones)
    }

    /// `D^{-1/2} (A + I) D^{-1/2}`, row-major `V × V`.
    pub fn normalized_adjacency(self, joints: usize) -> Result<Vec<f64>> {
        let mut a = vec![0.0; joints * joints];
        for v in 0..joints {
            a[v * joints + v] = 1.0;
        }
        for (i, j) in self.bones(joints)? {
            a[i * joints + j] = 1.0;
            a[j * joints + i] = 1.0;
        }
        let deg: Vec<f64> = (0..joints).map(|i| a[i * joints..(i + 1) * joints].iter().sum()).collect();
        for i in 0..joints {
            for j in 0..joints {
                a[i * joints + j] /= (deg[i] * deg[j]).sqrt();
            }
        }
        Ok(a)
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "auto" => Graph::Auto,
            "ntu" => Graph::Ntu,
            "fpha" => Graph::Fpha,
            "two-hand" | "two_hand" | "hand8" => Graph::TwoHand,
            "self" | "identity" => Graph::SelfLoops,
            other => return Err(Error::config(format!("unknown graph {other:?}"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graphs_are_trees() {
        // A connected skeleton on V joints has V - 1 bones.
        assert_eq!(Graph::Ntu.bones(25).unwrap().len(), 24);
        assert_eq!(Graph::Fpha.bones(21).unwrap().len(), 20);
        for (g, v) in [(Graph::Ntu, 25), (Graph::Fpha, 21)] {
            let mut seen = vec![false; v];
            seen[0] = true;
            let bones = g.bones(v).unwrap();
            for _ in 0..v {
                for &(a, b) in &bones {
                    if seen[a] || seen[b] {
                        seen[a] = true;
                        seen[b] = true;
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "{g:?} is disconnected");
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_normalized() {
        let a = Graph::Auto.normalized_adjacency(8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(a[i * 8 + j], a[j * 8 + i]);
            }
        }
        // wrist (deg 2 incl. self) to hand (deg 4): 1/sqrt(8)
        assert!((a[1] - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        assert!(Graph::Ntu.normalized_adjacency(21).is_err());
        let eye = Graph::Auto.normalized_adjacency(3).unwrap();
        assert_eq!(eye, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    }
}
