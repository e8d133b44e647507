use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sph_hands::classifier::{
    accuracy_report, evaluate, fuse_scores, gradient_check, load_checkpoint, predictions, save_checkpoint, scores,
    train as fit, ArchConfig, Augmentation, GcnModel, Graph, TrainConfig, TrainOptions,
};
use sph_hands::config::{join_list, KvConfig};
use sph_hands::features::{
    assemble, load_dataset, ntu_hand_set, parse_hand_set, read_labels, save_dataset, Dataset, EmbedConfig, EmbedMode,
    FeatureTensor, Modality,
};
use sph_hands::geometry::{Axis, RotationMode};
use sph_hands::harmonics::{ComplexFormat, DegreeSet};
use sph_hands::skeleton_io::{
    annotate_from_file_name, parse_fpha, parse_ntu, read_any_tensor, write_tensor, DType, DenseTensor, NTU_JOINTS,
};
use sph_hands::synth::{generate, parse_spec};
use sph_hands::verify::{
    azimuthal_basis_deviation, azimuthal_feature_deviation, orthonormality_error, so3_spectrum_deviation,
};
use sph_hands::{Error, Result, Sequence};

use crate::manifest::RunManifest;
use crate::{Dtype, Property, SkeletonFormat};

/// `Ok(false)` means the command ran but a checked property failed.
pub type Outcome = Result<bool>;

fn dtype(d: Dtype) -> DType {
    match d {
        Dtype::F32 => DType::F32,
        Dtype::F64 => DType::F64,
    }
}

fn write_any(path: &Path, tensor: &DenseTensor<f64>, d: DType) -> Result<()> {
    let file = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    match d {
        DType::F64 => write_tensor(tensor, file)?,
        DType::F32 => write_tensor(&tensor.cast::<f32>(), file)?,
    }
    Ok(())
}

fn read_f64(path: &Path) -> Result<DenseTensor<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(read_any_tensor(BufReader::new(file))?.to_f64())
}

fn sequence_tensor(seq: &Sequence) -> DenseTensor<f64> {
    let data = seq.coords().iter().flatten().copied().collect();
    DenseTensor::new(vec![seq.frames(), seq.bodies(), seq.joints(), 3], data).expect("sized from sequence")
}

fn tensor_sequence(t: &DenseTensor<f64>) -> Result<Sequence> {
    match *t.dims() {
        [frames, bodies, joints, 3] => {
            let coords = t.data().chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
            Sequence::new(frames, bodies, joints, coords)
        }
        _ => Err(Error::shape(format!("expected a T×M×V×3 sequence tensor, got dims {:?}", t.dims()))),
    }
}

fn report(key: &str, value: impl std::fmt::Display) {
    println!("{key}={value}");
}

pub fn parse(format: SkeletonFormat, d: Dtype, input: &Path, output: &Path, manifest: Option<&Path>) -> Outcome {
    let mut run = RunManifest::new("parse");
    run.input(input);
    let file = BufReader::new(File::open(input).map_err(|e| Error::io(input, e))?);
    let parsed = match format {
        SkeletonFormat::Fpha => parse_fpha(file),
        SkeletonFormat::Ntu => parse_ntu(file),
    };
    let mut seq = parsed.map_err(|e| Error::parse_file(input, e))?;
    if let SkeletonFormat::Ntu = format {
        let name = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        annotate_from_file_name(&mut seq, &name);
    }
    write_any(output, &sequence_tensor(&seq), dtype(d))?;
    run.output(output);
    run.set("format", if let SkeletonFormat::Fpha = format { "fpha" } else { "ntu" });
    report("frames", seq.frames());
    report("bodies", seq.bodies());
    report("joints", seq.joints());
    if let Some(label) = seq.label {
        report("label", label);
        run.set("label", label);
    }
    run.finish(manifest)?;
    Ok(true)
}

#[derive(Args)]
pub struct EmbedArgs {
    #[arg(long, default_value = "lshr", value_parser = ["none", "lshr", "lsht", "lshr-only", "random"])]
    mode: String,
    #[arg(long, default_value = "mag", value_parser = ["mag", "real", "imag", "phase", "real-imag", "mag-phase"])]
    format: String,
    #[arg(long, default_value = "1,2")]
    degrees: String,
    /// Joint ids; defaults to the NTU hand joints for 25-joint input and to
    /// every joint otherwise.
    #[arg(long, value_name = "FILE")]
    hand_set: Option<PathBuf>,
    #[arg(long, default_value = "y", value_parser = ["x", "y", "z"])]
    up_axis: String,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    bodies: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value = "loc", value_parser = ["loc", "vel"])]
    modality: String,
    /// Average LSHT sums over neighbors.
    #[arg(long)]
    lsht_mean: bool,
    /// Seeds the random-baseline channels.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: Dtype,
    /// Dataset directory or sequence tensor.
    input: PathBuf,
    /// Dataset directory.
    output: PathBuf,
}

pub fn embed(args: &EmbedArgs, manifest: Option<&Path>) -> Outcome {
    let mut run = RunManifest::new("embed");
    run.input(&args.input);
    run.seed(args.seed);
    let sequences = if args.input.is_dir() {
        load_dataset(&args.input)?.features.to_sequences()?
    } else {
        vec![tensor_sequence(&read_f64(&args.input)?)?]
    };
    let joints = sequences.first().ok_or(Error::Empty("input"))?.joints();
    let hand_set = match &args.hand_set {
        Some(path) => {
            run.input(path);
            Some(parse_hand_set(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?, joints)?)
        }
        None if joints == NTU_JOINTS => Some(ntu_hand_set()),
        None => None,
    };
    let cfg = EmbedConfig {
        mode: args.mode.parse::<EmbedMode>()?,
        format: args.format.parse::<ComplexFormat>()?,
        degrees: args.degrees.parse::<DegreeSet>()?,
        hand_set,
        up_axis: args.up_axis.parse::<Axis>()?,
        target_frames: args.frames,
        bodies: args.bodies,
        scale: args.scale,
        modality: args.modality.parse::<Modality>()?,
        lsht_mean: args.lsht_mean,
    };
    // Round trip through the text form to apply its validation.
    let cfg = EmbedConfig::from_kv(&cfg.to_kv())?;
    let features = assemble(&sequences, &cfg, &mut ChaCha8Rng::seed_from_u64(args.seed))?;
    report("samples", features.len());
    report("channels", features.channels());
    report("frames", features.frames());
    report("joints", features.joints());
    save_dataset(&args.output, &Dataset { features, embed: Some(cfg.clone()) }, dtype(args.dtype))?;
    run.output(&args.output);
    run.config("embed.", &cfg.to_kv());
    run.finish(manifest)?;
    Ok(true)
}

pub fn verify(property: Property, tol: Option<f64>, seed: u64, manifest: Option<&Path>) -> Outcome {
    let mut run = RunManifest::new("verify");
    run.seed(seed);
    let mut pass = true;
    let mut check = |name: &str, value: f64, tol: f64| {
        let ok = value < tol;
        report(name, format!("{value:e}"));
        report(&format!("{name}.tol"), format!("{tol:e}"));
        println!("{} {} {tol:e}", name.replace('_', " "), if ok { "<" } else { ">=" });
        pass &= ok;
    };
    let name = match property {
        Property::Orthonormality => {
            check("max_deviation", orthonormality_error(2, 32, 64)?, tol.unwrap_or(1e-9));
            "orthonormality"
        }
        Property::Azimuthal => {
            check("max_deviation", azimuthal_basis_deviation(10_000, 4, seed)?, tol.unwrap_or(1e-12));
            check("max_feature_deviation", azimuthal_feature_deviation(100, seed)?, tol.unwrap_or(1e-10));
            "azimuthal"
        }
        Property::So3Spectrum => {
            let degrees: DegreeSet = "0,1,2,3,4".parse()?;
            check("max_deviation", so3_spectrum_deviation(100, &degrees, seed)?, tol.unwrap_or(1e-8));
            "so3-spectrum"
        }
    };
    report("property", name);
    report("status", if pass { "pass" } else { "fail" });
    run.set("property", name);
    if let Some(t) = tol {
        run.set("tol", t);
    }
    run.finish(manifest)?;
    Ok(pass)
}

pub fn synth(
    spec_path: &Path,
    n: Option<usize>,
    seed: Option<u64>,
    frames: Option<usize>,
    output: &Path,
    manifest: Option<&Path>,
) -> Outcome {
    let mut run = RunManifest::new("synth");
    run.input(spec_path);
    let spec = KvConfig::load(spec_path)?;
    let specs = parse_spec(&spec)?;
    let n = match n {
        Some(n) => n,
        None => spec.get("n")?.ok_or_else(|| Error::config("sample count missing: pass --n or set n in the spec"))?,
    };
    let seed = match seed {
        Some(s) => s,
        None => spec.get_or("seed", 0)?,
    };
    let frames = match frames {
        Some(t) => t,
        None => spec.get_or("frames", 32)?,
    };
    let sequences = generate(&specs, n, frames, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let cfg = EmbedConfig::default();
    let features = assemble(&sequences, &cfg, &mut ChaCha8Rng::seed_from_u64(seed))?;
    report("samples", features.len());
    report("classes", specs.len());
    report("frames", frames);
    report("joints", features.joints());
    save_dataset(output, &Dataset { features, embed: Some(cfg) }, DType::F64)?;
    run.output(output);
    run.seed(seed);
    run.config("spec.", &spec);
    run.set("n", n);
    run.set("frames", frames);
    run.finish(manifest)?;
    Ok(true)
}

const MODEL_KEYS: &[&str] = &["arch", "widths", "strides", "kernel", "graph", "classes", "seed"];
const TRAIN_KEYS: &[&str] = &[
    "lr",
    "momentum",
    "weight_decay",
    "epochs",
    "warmup_epochs",
    "decay_epochs",
    "decay_factor",
    "batch_size",
    "seed",
];
const AUGMENT_KEYS: &[&str] = &["rotation", "per_frame"];
const GRADCHECK_KEYS: &[&str] = &["eps", "params", "batch", "tol", "seed"];
const DATA_KEYS: &[&str] = &["channels", "frames", "joints", "bodies"];

fn check_sections(cfg: &KvConfig, sections: &[(&str, &[&str])]) -> Result<()> {
    for (key, _) in cfg.iter() {
        if !sections.iter().any(|(prefix, _)| key.starts_with(prefix)) {
            return Err(Error::config(format!("unknown key {key:?}")));
        }
    }
    for (prefix, keys) in sections {
        cfg.section(prefix).check_keys(keys).map_err(|e| Error::config(format!("{prefix}: {e}")))?;
    }
    Ok(())
}

/// Architecture from the `model.` section and the data shape.
fn architecture(model: &KvConfig, channels: usize, frames: usize, joints: usize, classes: usize) -> Result<ArchConfig> {
    let classes = model.get_or("classes", classes)?;
    let mut arch = match model.raw("arch").unwrap_or("desk") {
        "desk" => ArchConfig::desk(channels, frames, joints, classes),
        "linear" => ArchConfig::linear(channels, frames, joints, classes),
        other => return Err(Error::config(format!("unknown arch {other:?}"))),
    };
    if let Some(w) = model.get_list("widths")? {
        arch.widths = w;
    }
    if let Some(s) = model.get_list("strides")? {
        arch.strides = s;
    }
    arch.kernel = model.get_or("kernel", arch.kernel)?;
    arch.graph = model.get_or("graph", Graph::Auto)?;
    arch.validate()?;
    Ok(arch)
}

fn labels(set: &FeatureTensor<f64>, dir: &Path) -> Result<Vec<usize>> {
    set.labels().map(<[usize]>::to_vec).ok_or_else(|| Error::config(format!("{} has no labels.txt", dir.display())))
}

pub fn train(config: &Path, data: &Path, val: Option<&Path>, out: &Path, manifest: Option<&Path>) -> Outcome {
    let mut run = RunManifest::new("train");
    run.input(config);
    run.input(data);
    let cfg = KvConfig::load(config)?;
    check_sections(&cfg, &[("model.", MODEL_KEYS), ("train.", TRAIN_KEYS), ("augment.", AUGMENT_KEYS)])?;
    let train_cfg = TrainConfig::from_kv(&cfg.section("train."))?;
    let dataset = load_dataset(data)?;
    let set = &dataset.features;
    let y = labels(set, data)?;
    let classes = y.iter().max().map_or(0, |&m| m + 1);
    let model_kv = cfg.section("model.");
    let arch = architecture(&model_kv, set.channels(), set.frames(), set.joints(), classes)?;
    let init_seed = model_kv.get_or("seed", train_cfg.seed)?;
    let mut model = GcnModel::init(arch, &mut ChaCha8Rng::seed_from_u64(init_seed))?;
    model.fit_input_normalization(set)?;

    let val_set = match val {
        Some(dir) => {
            run.input(dir);
            Some(load_dataset(dir)?.features)
        }
        None => None,
    };
    let augment_kv = cfg.section("augment.");
    let augment = match augment_kv.raw("rotation") {
        None | Some("none") => None,
        Some(mode) => Some(Augmentation {
            embed: dataset
                .embed
                .clone()
                .ok_or_else(|| Error::config("rotation augmentation needs a dataset with embed.cfg"))?,
            rotation: mode.parse::<RotationMode>()?,
            per_frame: augment_kv.get_or("per_frame", false)?,
        }),
    };
    let history = fit(&mut model, set, &train_cfg, &TrainOptions { val: val_set.as_ref(), augment })?;

    let mut meta = KvConfig::default();
    for (k, v) in cfg.iter() {
        meta.set(k, v);
    }
    for (k, v) in train_cfg.to_kv().iter() {
        meta.set(&format!("train.{k}"), v);
    }
    if let Some(embed) = &dataset.embed {
        for (k, v) in embed.to_kv().iter() {
            meta.set(&format!("embed.{k}"), v);
        }
    }
    meta.set("channel_map", set.channel_map().join(","));
    save_checkpoint(out, &model, &meta)?;

    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
    let mut text = String::from("epoch lr train_loss train_accuracy val_loss val_accuracy\n");
    for r in &history {
        text.push_str(&format!(
            "{} {:e} {:.6} {:.6} {} {}\n",
            r.epoch,
            r.lr,
            r.train_loss,
            r.train_accuracy,
            fmt(r.val_loss),
            fmt(r.val_accuracy)
        ));
    }
    let history_path = out.join("history.txt");
    fs::write(&history_path, text).map_err(|e| Error::io(&history_path, e))?;

    let last = history.last().expect("at least one epoch");
    report("epochs", history.len());
    report("parameters", model.parameter_count());
    report("train_loss", format!("{:.6}", last.train_loss));
    report("train_accuracy", format!("{:.6}", last.train_accuracy));
    if let Some(a) = last.val_accuracy {
        report("val_accuracy", format!("{a:.6}"));
    }
    run.output(out);
    run.seed(train_cfg.seed);
    run.config("", &meta);
    run.finish(manifest)?;
    Ok(true)
}

fn read_ids(path: &Path) -> Result<Vec<usize>> {
    fs::read_to_string(path)
        .map_err(|e| Error::io(path, e))?
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::config(format!("bad class id {t:?} in {}", path.display()))))
        .collect()
}

pub fn eval(
    ckpt: &Path,
    data: &Path,
    hand_classes: Option<&Path>,
    scores_out: Option<&Path>,
    manifest: Option<&Path>,
) -> Outcome {
    let mut run = RunManifest::new("eval");
    run.input(ckpt);
    run.input(data);
    let (model, meta) = load_checkpoint(ckpt)?;
    let dataset = load_dataset(data)?;
    let set = &dataset.features;
    if let Some(trained) = meta.raw("channel_map") {
        if trained != set.channel_map().join(",") {
            return Err(Error::config(format!(
                "{} has a different channel layout than the checkpoint was trained on",
                data.display()
            )));
        }
    }
    let hand = match hand_classes {
        Some(p) => {
            run.input(p);
            Some(read_ids(p)?)
        }
        None => None,
    };
    let s = scores(&model, set)?;
    if let Some(out) = scores_out {
        write_any(out, &s, DType::F64)?;
        run.output(out);
    }
    report("samples", set.len());
    if set.labels().is_some() {
        let report_ = evaluate(&model, set, hand.as_deref())?;
        report("accuracy", format!("{:.6}", report_.accuracy));
        for (c, a) in report_.per_class.iter().enumerate() {
            if let Some(a) = a {
                report(&format!("class.{c}"), format!("{a:.6}"));
            }
        }
        if let Some(h) = report_.hand_accuracy {
            report("hand_accuracy", format!("{h:.6}"));
        }
    } else {
        let preds = predictions(&s)?;
        report("predictions", join_list(&preds));
    }
    run.finish(manifest)?;
    Ok(true)
}

pub fn ensemble(
    paths: &[PathBuf],
    weights: Option<&[f64]>,
    labels_file: Option<&Path>,
    data: Option<&Path>,
    out: Option<&Path>,
    manifest: Option<&Path>,
) -> Outcome {
    let mut run = RunManifest::new("ensemble");
    let tensors = paths
        .iter()
        .map(|p| {
            run.input(p);
            read_f64(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let fused = fuse_scores(&tensors, weights)?;
    if let Some(out) = out {
        write_any(out, &fused, DType::F64)?;
        run.output(out);
    }
    let y = match (labels_file, data) {
        (Some(p), _) => Some(read_labels(p)?),
        (None, Some(dir)) => Some(read_labels(&dir.join("labels.txt"))?),
        (None, None) => None,
    };
    report("models", tensors.len());
    report("samples", fused.dims()[0]);
    let preds = predictions(&fused)?;
    match y {
        Some(y) => {
            let r = accuracy_report(&preds, &y, fused.dims()[1], None)?;
            report("accuracy", format!("{:.6}", r.accuracy));
        }
        None => report("predictions", join_list(&preds)),
    }
    if let Some(w) = weights {
        run.set("weights", join_list(w));
    }
    run.finish(manifest)?;
    Ok(true)
}

pub fn gradcheck(config: &Path, data: Option<&Path>, manifest: Option<&Path>) -> Outcome {
    let mut run = RunManifest::new("gradcheck");
    run.input(config);
    let cfg = KvConfig::load(config)?;
    check_sections(&cfg, &[("model.", MODEL_KEYS), ("gradcheck.", GRADCHECK_KEYS), ("data.", DATA_KEYS)])?;
    let gc = cfg.section("gradcheck.");
    let eps: f64 = gc.get_or("eps", 1e-5)?;
    let count: usize = gc.get_or("params", 500)?;
    let batch_size: usize = gc.get_or("batch", 2)?;
    let tol: f64 = gc.get_or("tol", 1e-4)?;
    let seed: u64 = gc.get_or("seed", 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model_kv = cfg.section("model.");

    let batch = match data {
        Some(dir) => {
            run.input(dir);
            let set = load_dataset(dir)?.features;
            let take: Vec<usize> = (0..batch_size.min(set.len())).collect();
            set.select(&take)?
        }
        None => {
            let d = cfg.section("data.");
            let (c, t, v, m) =
                (d.get_or("channels", 3)?, d.get_or("frames", 16)?, d.get_or("joints", 8)?, d.get_or("bodies", 1)?);
            let classes = model_kv.get_or("classes", 6)?;
            let values = (0..batch_size * m * c * t * v).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = (0..batch_size).map(|i| i % classes).collect();
            let names = (0..c).map(|i| format!("c{i}")).collect();
            FeatureTensor::new(DenseTensor::new(vec![batch_size, m, c, t, v], values)?, names, Some(y))?
        }
    };
    let classes = batch.labels().and_then(|y| y.iter().max()).map_or(2, |&m| (m + 1).max(2));
    let arch = architecture(&model_kv, batch.channels(), batch.frames(), batch.joints(), classes)?;
    let mut model = GcnModel::init(arch, &mut rng)?;
    model.fit_input_normalization(&batch)?;
    let result = gradient_check(&model, &batch, eps, count, &mut rng)?;
    let pass = result.max_relative_error < tol;
    report("parameters", model.parameter_count());
    report("checked", result.checked);
    report("skipped_kinks", result.skipped);
    report("max_relative_error", format!("{:e}", result.max_relative_error));
    report("max_absolute_error", format!("{:e}", result.max_absolute_error));
    report("worst_parameter", result.worst_parameter);
    report("tol", format!("{tol:e}"));
    report("status", if pass { "pass" } else { "fail" });
    run.seed(seed);
    run.config("", &cfg);
    run.finish(manifest)?;
    Ok(pass)
}
