//! Numerical self-checks shared by the command line and the test suites.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::features::{assemble, EmbedConfig, EmbedMode};
use crate::geometry::{rotate, sample_rotation, to_local, Axis, RotationMode};
use crate::harmonics::{lsht_transform, sph_harm, ComplexFormat, DegreeSet, HarmonicIndex};
use crate::skeleton_io::{format_fpha, format_ntu, parse_fpha, parse_ntu, ParseError, FPHA_JOINTS, NTU_JOINTS};
use crate::{Complex, Rotation, Sequence};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Largest entry of `|G - I|`, where `G` is the Gram matrix of every
/// `Y_ℓ^m` with `ℓ ≤ max_degree` under Gauss–Legendre (θ) × trapezoid (φ)
/// quadrature.
pub fn orthonormality_error(max_degree: u32, theta_nodes: usize, phi_nodes: usize) -> Result<f64> {
    let idx: Vec<HarmonicIndex> = (0..=max_degree)
        .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m)))
        .map(|(l, m)| HarmonicIndex::new(l, m))
        .collect::<Result<_>>()?;
    let (xs, ws) = gauss_legendre(theta_nodes);
    let dphi = TAU / phi_nodes as f64;
    let k = idx.len();
    let mut gram = vec![Complex::new(0.0, 0.0); k * k];
    let mut vals = vec![Complex::new(0.0, 0.0); k];
    for (x, w) in xs.iter().zip(&ws) {
        let theta = x.acos();
        for j in 0..phi_nodes {
            let phi = j as f64 * dphi;
            for (v, &i) in vals.iter_mut().zip(&idx) {
                *v = sph_harm(i, theta, phi)?;
            }
            for a in 0..k {
                for b in 0..k {
                    gram[a * k + b] += vals[a] * vals[b].conj() * (w * dphi);
                }
            }
        }
    }
    Ok((0..k * k)
        .map(|ab| {
            let target = if ab / k == ab % k { 1.0 } else { 0.0 };
            (gram[ab] - target).norm()
        })
        .fold(0.0, f64::max))
}

/// Largest `| |Y(θ, φ+α)| − |Y(θ, φ)| |` over random triples and every
/// `(ℓ, m)` with `ℓ ≤ max_degree`.
pub fn azimuthal_basis_deviation(samples: usize, max_degree: u32, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let theta = rng.random_range(0.0..=PI);
        let phi = rng.random_range(0.0..TAU);
        let shifted = (phi + rng.random_range(0.0..TAU)) % TAU;
        for l in 0..=max_degree {
            for m in -(l as i32)..=l as i32 {
                let i = HarmonicIndex::new(l, m)?;
                let d = sph_harm(i, theta, shifted)?.norm() - sph_harm(i, theta, phi)?.norm();
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(worst)
}

/// Random skeleton with coordinates in `[-1, 1]`.
pub fn random_sequence<R: Rng + ?Sized>(rng: &mut R, frames: usize, joints: usize) -> Result<Sequence> {
    let coords = (0..frames * joints).map(|_| [0; 3].map(|_| rng.random_range(-1.0..1.0))).collect();
    Sequence::new(frames, 1, joints, coords)
}

/// Largest change of the embedding channels of magnitude-LSHR features
/// when random skeletons are rotated about the up axis.
pub fn azimuthal_feature_deviation(sequences: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = EmbedConfig {
        mode: EmbedMode::Lshr,
        format: ComplexFormat::Magnitude,
        hand_set: Some((0..8).collect()),
        ..EmbedConfig::default()
    };
    let seqs: Vec<Sequence> = (0..sequences).map(|_| random_sequence(&mut rng, 4, 8)).collect::<Result<_>>()?;
    let turned: Vec<Sequence> = seqs
        .iter()
        .map(|s| {
            let r: Rotation = sample_rotation(&mut rng, RotationMode::AboutUpAxis, cfg.up_axis);
            rotate(s, &r)
        })
        .collect();
    let a = assemble(&seqs, &cfg, &mut rng)?;
    let b = assemble(&turned, &cfg, &mut rng)?;
    let mut worst: f64 = 0.0;
    for n in 0..a.len() {
        for c in 3..a.channels() {
            for t in 0..a.frames() {
                for v in 0..a.joints() {
                    worst = worst.max((a.get(n, 0, c, t, v) - b.get(n, 0, c, t, v)).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Largest change of the per-degree LSHT power spectrum of one random
/// 8-joint hand under `rotations` Haar-random rotations.
pub fn so3_spectrum_deviation(rotations: usize, degrees: &DegreeSet, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subset: Vec<usize> = (0..8).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..rotations {
        let seq = random_sequence(&mut rng, 1, 8)?;
        let r: Rotation = sample_rotation(&mut rng, RotationMode::So3Uniform, Axis::Y);
        let base = lsht_transform(&to_local(&seq, &subset, Axis::Y)?, degrees).power_spectrum();
        let moved = lsht_transform(&to_local(&rotate(&seq, &r), &subset, Axis::Y)?, degrees).power_spectrum();
        for (x, y) in base.data().iter().zip(moved.data()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// A broken skeleton file and the error kind the parser must report.
#[derive(Debug, Clone)]
pub struct Malformation {
    pub name: &'static str,
    pub format: &'static str,
    pub text: String,
    pub expected: &'static str,
}

/// A well-formed two-frame NTU file with one body.
pub fn sample_ntu_text() -> String {
    let coords = (0..2 * NTU_JOINTS).map(|i| [i as f64 * 0.01, 1.0 - i as f64 * 0.02, 3.5]).collect();
    format_ntu(&Sequence::new(2, 1, NTU_JOINTS, coords).expect("valid")).expect("25 joints")
}

/// A well-formed three-frame FPHA file.
pub fn sample_fpha_text() -> String {
    let coords = (0..3 * FPHA_JOINTS).map(|i| [i as f64, -(i as f64) * 0.5, 400.25]).collect();
    format_fpha(&Sequence::new(3, 1, FPHA_JOINTS, coords).expect("valid")).expect("21 joints")
}

/// Ten canonical ways to break the two text formats.
pub fn malformations() -> Vec<Malformation> {
    let ntu = sample_ntu_text();
    let fpha = sample_fpha_text();
    let ntu_lines: Vec<&str> = ntu.lines().collect();
    let fpha_lines: Vec<&str> = fpha.lines().collect();
    let replace = |lines: &[&str], at: usize, with: &str| {
        let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
        out[at] = with.to_string();
        out.join("\n") + "\n"
    };
    let first_joint = 4;
    let short_joint = ntu_lines[first_joint].rsplit_once(' ').expect("12 fields").0.to_string();
    let mut fpha_short: Vec<&str> = fpha_lines[1].split(' ').collect();
    fpha_short.pop();
    let fpha_nan = fpha_lines[1].replacen(" 21 ", " nan ", 1);
    vec![
        Malformation { name: "ntu-empty", format: "ntu", text: "\n\n".into(), expected: "empty" },
        Malformation {
            name: "ntu-bad-frame-count",
            format: "ntu",
            text: replace(&ntu_lines, 0, "two"),
            expected: "line",
        },
        Malformation {
            name: "ntu-wrong-joint-count",
            format: "ntu",
            text: replace(&ntu_lines, 3, "24"),
            expected: "frame",
        },
        Malformation {
            name: "ntu-short-joint-line",
            format: "ntu",
            text: replace(&ntu_lines, first_joint, &short_joint),
            expected: "frame",
        },
        Malformation {
            name: "ntu-truncated",
            format: "ntu",
            text: ntu_lines[..ntu_lines.len() - 3].join("\n"),
            expected: "frame",
        },
        Malformation { name: "ntu-trailing-content", format: "ntu", text: format!("{ntu}1\n"), expected: "line" },
        Malformation {
            name: "fpha-missing-value",
            format: "fpha",
            text: replace(&fpha_lines, 1, &fpha_short.join(" ")),
            expected: "line",
        },
        Malformation {
            name: "fpha-repeated-index",
            format: "fpha",
            text: replace(&fpha_lines, 2, &fpha_lines[2].replacen('2', "1", 1)),
            expected: "line",
        },
        Malformation { name: "fpha-nan", format: "fpha", text: replace(&fpha_lines, 1, &fpha_nan), expected: "line" },
        Malformation { name: "fpha-empty", format: "fpha", text: "  \n".into(), expected: "empty" },
    ]
}

pub fn parse_text(format: &str, text: &str) -> std::result::Result<Sequence, ParseError> {
    match format {
        "ntu" => parse_ntu(text.as_bytes()),
        _ => parse_fpha(text.as_bytes()),
    }
}
