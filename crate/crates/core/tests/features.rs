use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sph_hands::features::{
    assemble, load_dataset, ntu_hand_set, save_dataset, Dataset, EmbedConfig, EmbedMode, Modality,
};
use sph_hands::harmonics::{ComplexFormat, DegreeSet};
use sph_hands::skeleton_io::DType;
use sph_hands::synth::{generate, GestureSpec, TemplateKind};
use sph_hands::verify::random_sequence;

fn mode() -> impl Strategy<Value = EmbedMode> {
    prop_oneof![
        Just(EmbedMode::None),
        Just(EmbedMode::Lshr),
        Just(EmbedMode::Lsht),
        Just(EmbedMode::LshrOnly),
        Just(EmbedMode::RandomBaseline)
    ]
}

fn format() -> impl Strategy<Value = ComplexFormat> {
    prop::sample::select(ComplexFormat::ALL.to_vec())
}

fn config() -> impl Strategy<Value = (EmbedConfig, usize)> {
    (
        mode(),
        format(),
        prop::collection::btree_set(0u32..=4, 1..4),
        prop::collection::btree_set(0usize..10, 2..6),
        any::<bool>(),
    )
        .prop_map(|(mode, format, degrees, hand, velocity)| {
            let cfg = EmbedConfig {
                mode,
                format,
                degrees: DegreeSet::new(degrees.into_iter().collect()).unwrap(),
                hand_set: Some(hand.into_iter().collect()),
                modality: if velocity { Modality::Velocity } else { Modality::Location },
                ..EmbedConfig::default()
            };
            (cfg, 10)
        })
}

/// Channel count from first principles.
fn expected_channels(cfg: &EmbedConfig) -> usize {
    let raw = if matches!(cfg.mode, EmbedMode::LshrOnly) { 0 } else { 3 };
    let coeffs: usize = cfg.degrees.degrees().iter().map(|&l| 2 * l as usize + 1).sum();
    let parts = match cfg.format {
        ComplexFormat::RealAndImag | ComplexFormat::MagAndPhase => 2,
        _ => 1,
    };
    let hand = cfg.hand_set.as_ref().map_or(0, Vec::len);
    raw + match cfg.mode {
        EmbedMode::None => 0,
        EmbedMode::Lsht => coeffs * parts,
        _ => hand * coeffs * parts,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_count_formula((cfg, joints) in config(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch = vec![random_sequence(&mut rng, 3, joints).unwrap()];
        let f = assemble(&batch, &cfg, &mut rng).unwrap();
        let hand = cfg.hand_set.as_ref().unwrap().len();
        prop_assert_eq!(f.channels(), expected_channels(&cfg));
        prop_assert_eq!(cfg.channel_count(hand), expected_channels(&cfg));
        prop_assert_eq!(f.channel_map().len(), f.channels());
    }

    #[test]
    fn non_hand_joints_stay_zero((cfg, joints) in config(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch: Vec<_> = (0..2).map(|_| random_sequence(&mut rng, 3, joints).unwrap()).collect();
        let f = assemble(&batch, &cfg, &mut rng).unwrap();
        let hand = cfg.hand_set.clone().unwrap();
        let first = if cfg.mode.has_raw() { 3 } else { 0 };
        let mut total = 0.0;
        for n in 0..2 {
            for c in first..f.channels() {
                for t in 0..3 {
                    for v in (0..joints).filter(|v| !hand.contains(v)) {
                        total += f.get(n, 0, c, t, v).abs();
                    }
                }
            }
        }
        prop_assert_eq!(total, 0.0);
    }

    #[test]
    fn random_baseline_mirrors_lshr(format in format(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch = vec![random_sequence(&mut rng, 2, 25).unwrap()];
        let lshr = EmbedConfig { mode: EmbedMode::Lshr, format, hand_set: Some(ntu_hand_set()), ..EmbedConfig::default() };
        let random = EmbedConfig { mode: EmbedMode::RandomBaseline, ..lshr.clone() };
        let a = assemble(&batch, &lshr, &mut rng).unwrap();
        let b = assemble(&batch, &random, &mut rng).unwrap();
        prop_assert_eq!(a.data().dims(), b.data().dims());
        prop_assert_eq!(a.channel_map(), b.channel_map());
    }
}

#[test]
fn synthetic_sequences_embed() {
    for template in [TemplateKind::TwoHand, TemplateKind::Hand21] {
        let seqs = generate(&GestureSpec::standard_set(template), 2, 10, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for mode in [EmbedMode::Lshr, EmbedMode::Lsht, EmbedMode::LshrOnly, EmbedMode::RandomBaseline] {
            let cfg = EmbedConfig { mode, ..EmbedConfig::default() };
            let f = assemble(&seqs, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert_eq!(f.len(), 12);
            assert!(f.data().data().iter().all(|x| x.is_finite()));
            assert_eq!(f.labels().unwrap()[..6], [0, 1, 2, 3, 4, 5]);
        }
    }
}

#[test]
fn dataset_round_trip() {
    let dir = tempdir();
    let seqs =
        generate(&GestureSpec::standard_set(TemplateKind::TwoHand), 2, 6, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let cfg = EmbedConfig { mode: EmbedMode::Lshr, format: ComplexFormat::RealAndImag, ..EmbedConfig::default() };
    let features = assemble(&seqs, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let ds = Dataset { features, embed: Some(cfg.clone()) };
    save_dataset(&dir, &ds, DType::F64).unwrap();
    let back = load_dataset(&dir).unwrap();
    assert_eq!(back.embed, Some(cfg));
    assert_eq!(back.features.labels(), ds.features.labels());
    assert_eq!(back.features.channel_map(), ds.features.channel_map());
    assert_eq!(back.features.data().data(), ds.features.data().data());
    let seqs_back = back.features.to_sequences().unwrap();
    assert_eq!(seqs_back[3].coords(), seqs[3].coords());
    std::fs::remove_dir_all(&dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("sph-hands-features-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
