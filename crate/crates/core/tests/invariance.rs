use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sph_hands::features::{assemble, EmbedConfig, EmbedMode};
use sph_hands::geometry::{rotate, sample_rotation, to_local, Axis, RotationMode};
use sph_hands::harmonics::{lshr_embed, lsht_transform, DegreeSet};
use sph_hands::verify::{random_sequence, so3_spectrum_deviation};
use sph_hands::{LocalField, Rotation, Sequence};

fn hand(seed: u64, frames: usize) -> Sequence {
    random_sequence(&mut ChaCha8Rng::seed_from_u64(seed), frames, 8).unwrap()
}

fn subset() -> Vec<usize> {
    (0..8).collect()
}

fn local(seq: &Sequence, up: Axis) -> LocalField {
    to_local(seq, &subset(), up).unwrap()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radii_survive_any_rotation(seed in any::<u64>(), up in axis()) {
        let seq = hand(seed, 3);
        let r: Rotation = sample_rotation(&mut ChaCha8Rng::seed_from_u64(seed ^ 1), RotationMode::So3Uniform, up);
        let (a, b) = (local(&seq, up), local(&rotate(&seq, &r), up));
        for t in 0..3 {
            for c in 0..8 {
                for w in 0..8 {
                    prop_assert!((a.get(t, 0, c, w).r - b.get(t, 0, c, w).r).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn up_axis_rotation_shifts_azimuth(seed in any::<u64>(), alpha in 0.0..TAU, up in axis()) {
        let seq = hand(seed, 2);
        let turned = rotate(&seq, &Rotation::about_axis(up, alpha));
        let (a, b) = (local(&seq, up), local(&turned, up));
        for t in 0..2 {
            for c in 0..8 {
                for w in (0..8).filter(|&w| w != c) {
                    let (p, q) = (a.get(t, 0, c, w), b.get(t, 0, c, w));
                    prop_assert!((p.r - q.r).abs() < 1e-10);
                    prop_assert!((p.theta - q.theta).abs() < 1e-10);
                    prop_assert!(angle_gap(q.phi, p.phi + alpha) < 1e-10, "{} vs {} + {alpha}", q.phi, p.phi);
                }
            }
        }
    }

    #[test]
    fn translation_leaves_field_unchanged(seed in any::<u64>(), shift in prop::array::uniform3(-5.0f64..5.0)) {
        let seq = hand(seed, 3);
        let moved = seq.map_points(|_, p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]]).unwrap();
        let (a, b) = (local(&seq, Axis::Y), local(&moved, Axis::Y));
        for t in 0..3 {
            for c in 0..8 {
                for w in 0..8 {
                    let (p, q) = (a.get(t, 0, c, w), b.get(t, 0, c, w));
                    prop_assert!((p.r - q.r).abs() < 1e-12);
                    prop_assert!((p.theta - q.theta).abs() < 1e-12);
                    prop_assert!(angle_gap(p.phi, q.phi) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn per_frame_translation_leaves_field_unchanged(seed in any::<u64>()) {
        let seq = hand(seed, 4);
        let moved = seq.map_points(|t, p| [p[0] + t as f64, p[1] - 2.0 * t as f64, p[2]]).unwrap();
        let (a, b) = (local(&seq, Axis::Y), local(&moved, Axis::Y));
        for t in 0..4 {
            for c in 0..8 {
                for w in 0..8 {
                    prop_assert!((a.get(t, 0, c, w).r - b.get(t, 0, c, w).r).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lshr_magnitude_ignores_up_axis_rotation(seed in any::<u64>(), alpha in 0.0..TAU) {
        let seq = hand(seed, 2);
        let turned = rotate(&seq, &Rotation::about_axis(Axis::Y, alpha));
        let d = DegreeSet::new(vec![1, 2, 3]).unwrap();
        let a = lshr_embed(&local(&seq, Axis::Y), &d);
        let b = lshr_embed(&local(&turned, Axis::Y), &d);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn assembled_magnitude_channels_ignore_up_axis_rotation(seed in any::<u64>(), alpha in 0.0..TAU) {
        let seqs = vec![hand(seed, 3), hand(seed.wrapping_add(1), 3)];
        let turned: Vec<_> = seqs.iter().map(|s| rotate(s, &Rotation::about_axis(Axis::Y, alpha))).collect();
        let cfg = EmbedConfig { mode: EmbedMode::Lshr, hand_set: Some(subset()), ..EmbedConfig::default() };
        let a = assemble(&seqs, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let b = assemble(&turned, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut raw_moved = false;
        for n in 0..2 {
            for c in 0..a.channels() {
                for t in 0..3 {
                    for v in 0..8 {
                        let d = (a.get(n, 0, c, t, v) - b.get(n, 0, c, t, v)).abs();
                        if c < 3 {
                            raw_moved |= d > 1e-6;
                        } else {
                            prop_assert!(d < 1e-10);
                        }
                    }
                }
            }
        }
        prop_assert!(raw_moved || alpha < 1e-3 || (TAU - alpha) < 1e-3);
    }

    #[test]
    fn lsht_spectrum_ignores_any_rotation(seed in any::<u64>()) {
        let seq = hand(seed, 1);
        let r: Rotation = sample_rotation(&mut ChaCha8Rng::seed_from_u64(!seed), RotationMode::So3Uniform, Axis::Y);
        let d = DegreeSet::new(vec![0, 1, 2, 3, 4]).unwrap();
        let a = lsht_transform(&local(&seq, Axis::Y), &d).power_spectrum();
        let b = lsht_transform(&local(&rotate(&seq, &r), Axis::Y), &d).power_spectrum();
        for (x, y) in a.data().iter().zip(b.data()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn lsht_magnitudes_ignore_up_axis_rotation(seed in any::<u64>(), alpha in 0.0..TAU) {
        let seq = hand(seed, 1);
        let d = DegreeSet::default();
        let a = lsht_transform(&local(&seq, Axis::Y), &d);
        let b = lsht_transform(&local(&rotate(&seq, &Rotation::about_axis(Axis::Y, alpha)), Axis::Y), &d);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn lsht_is_linear_in_radii(seed in any::<u64>(), c in -3.0f64..3.0) {
        let field = local(&hand(seed, 2), Axis::Y);
        let d = DegreeSet::default();
        let a = lsht_transform(&field, &d);
        let b = lsht_transform(&field.scale_radii(c), &d);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x * c - y).norm() < 1e-12);
        }
    }
}

#[test]
fn hundred_haar_rotations() {
    let worst = so3_spectrum_deviation(100, &DegreeSet::default(), 7).unwrap();
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn single_magnitudes_are_not_so3_invariant() {
    // Only the per-degree power is invariant; individual orders mix.
    let seq = hand(3, 1);
    let r = Rotation::about_axis(Axis::X, 1.0);
    let d = DegreeSet::default();
    let a = lsht_transform(&local(&seq, Axis::Y), &d);
    let b = lsht_transform(&local(&rotate(&seq, &r), Axis::Y), &d);
    let gap = a.values().iter().zip(b.values()).map(|(x, y)| (x.norm() - y.norm()).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-3);
}
