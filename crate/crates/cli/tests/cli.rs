use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sph_hands::config::KvConfig;
use sph_hands::skeleton_io::{read_any_tensor, FPHA_JOINTS, NTU_JOINTS};
use sph_hands::verify::{sample_fpha_text, sample_ntu_text};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sph-hands")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn value(report: &str, key: &str) -> Option<String> {
    report.lines().find_map(|l| l.strip_prefix(&format!("{key}="))).map(String::from)
}

const SPEC: &str = "classes = pinch,wave,circle\nframes = 12\n";
const TRAIN: &str = "model.widths = 4\nmodel.strides = 1\ntrain.lr = 0.02\ntrain.epochs = 2\n\
                     train.warmup_epochs = 1\ntrain.decay_epochs = 1\ntrain.batch_size = 8\n";

fn pipeline(dir: &Path) {
    fs::write(dir.join("spec.cfg"), SPEC).unwrap();
    fs::write(dir.join("train.cfg"), TRAIN).unwrap();
    for args in [
        &["synth", "--spec", "spec.cfg", "--n", "4", "--seed", "3", "raw"][..],
        &["embed", "--mode", "lshr", "raw", "feat"],
        &["train", "--config", "train.cfg", "--data", "feat", "--out", "ckpt"],
    ] {
        let out = run(dir, args);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn verify_azimuthal_reports_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--property", "azimuthal"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l == "max deviation < 1e-12"), "{}", stdout(&out));
}

#[test]
fn verify_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--property", "orthonormality", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(value(&stdout(&out), "status").as_deref(), Some("fail"));
}

#[test]
fn missing_input_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["parse", "--format", "fpha", "missing.txt", "out.sktf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.txt"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["parse", "--bogus"][..], &["frobnicate"], &[]] {
        let out = run(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains("Usage"), "{args:?}: {}", stderr(&out));
    }
    let out = run(dir.path(), &["verify", "--property", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("so3-spectrum"));
}

#[test]
fn parse_writes_sequence_tensor() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("hand.txt"), sample_fpha_text()).unwrap();
    fs::write(dir.path().join("S001C002P003R002A013.skeleton"), sample_ntu_text()).unwrap();

    let out = run(dir.path(), &["parse", "--format", "fpha", "hand.txt", "hand.sktf"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let t = read_any_tensor(fs::File::open(dir.path().join("hand.sktf")).unwrap()).unwrap().to_f64();
    assert_eq!(t.dims(), &[3, 1, FPHA_JOINTS, 3]);
    assert_eq!(t.data()[3], 1.0);
    assert!(dir.path().join("hand.sktf.manifest").exists());

    let out =
        run(dir.path(), &["parse", "--format", "ntu", "--dtype", "f32", "S001C002P003R002A013.skeleton", "n.sktf"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(value(&stdout(&out), "label").as_deref(), Some("12"));
    let t = read_any_tensor(fs::File::open(dir.path().join("n.sktf")).unwrap()).unwrap();
    assert_eq!(t.to_f64().dims(), &[2, 1, NTU_JOINTS, 3]);
}

#[test]
fn malformed_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "0 1 2 3\n").unwrap();
    let out = run(dir.path(), &["parse", "--format", "fpha", "bad.txt", "out.sktf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.txt") && stderr(&out).contains("line 1"), "{}", stderr(&out));
}

#[test]
fn embed_channel_counts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.cfg"), SPEC).unwrap();
    assert!(run(dir.path(), &["synth", "--spec", "spec.cfg", "--n", "2", "raw"]).status.success());
    fs::write(dir.path().join("hands.txt"), "0, 1, 2\n").unwrap();
    for (args, channels) in [
        (&["embed", "--mode", "lshr", "raw", "a"][..], 3 + 8 * 8),
        (&["embed", "--mode", "lshr", "--hand-set", "hands.txt", "--format", "real-imag", "raw", "b"], 3 + 3 * 16),
        (&["embed", "--mode", "lsht", "--format", "mag-phase", "--degrees", "0,1,2", "raw", "c"], 3 + 18),
        (&["embed", "--mode", "lshr-only", "raw", "d"], 8 * 8),
    ] {
        let out = run(dir.path(), args);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        assert_eq!(value(&stdout(&out), "channels"), Some(channels.to_string()), "{args:?}");
    }
    let out = run(dir.path(), &["embed", "--degrees", "1,x", "raw", "e"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn self_ensemble_matches_eval() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let out = run(dir.path(), &["eval", "--ckpt", "ckpt", "--data", "feat", "--scores", "s.sktf"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let single = value(&stdout(&out), "accuracy").unwrap();

    fs::write(dir.path().join("labels.txt"), fs::read(dir.path().join("feat/labels.txt")).unwrap()).unwrap();
    let out = run(dir.path(), &["ensemble", "s.sktf", "s.sktf", "--weights", "1,1", "--labels", "labels.txt"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(value(&stdout(&out), "accuracy").unwrap(), single);
    assert_eq!(value(&stdout(&out), "manifest.command").as_deref(), Some("ensemble"));

    let out = run(dir.path(), &["ensemble", "s.sktf", "--weights", "1,2", "--data", "feat"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_writes_checkpoint_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let ckpt = dir.path().join("ckpt");
    for name in ["manifest.txt", "history.txt", "run.manifest", "head.weight.sktf", "input.scale.sktf"] {
        assert!(ckpt.join(name).exists(), "{name}");
    }
    assert_eq!(fs::read_to_string(ckpt.join("history.txt")).unwrap().lines().count(), 3);
    let m = KvConfig::load(&ckpt.join("run.manifest")).unwrap();
    assert_eq!(m.raw("command"), Some("train"));
    assert_eq!(m.raw("config.train.lr"), Some("0.02"));
    assert_eq!(m.raw("seed"), Some("0"));
    assert!(m.raw("inputs").unwrap().contains("feat"));
    assert!(m.raw("duration_s").is_some() && m.raw("version").is_some());

    let out = run(dir.path(), &["--manifest", "eval.m", "eval", "--ckpt", "ckpt", "--data", "feat"]);
    assert!(out.status.success());
    assert_eq!(KvConfig::load(&dir.path().join("eval.m")).unwrap().raw("command"), Some("eval"));
}

#[test]
fn eval_rejects_other_layout() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    assert!(run(dir.path(), &["embed", "--mode", "random", "raw", "noise"]).status.success());
    let out = run(dir.path(), &["eval", "--ckpt", "ckpt", "--data", "noise"]);
    assert!(out.status.success(), "same channel layout: {}", stderr(&out));
    assert!(run(dir.path(), &["embed", "--mode", "lsht", "raw", "other"]).status.success());
    let out = run(dir.path(), &["eval", "--ckpt", "ckpt", "--data", "other"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_typos_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    fs::write(dir.path().join("typo.cfg"), "train.learning_rate = 0.1\n").unwrap();
    let out = run(dir.path(), &["train", "--config", "typo.cfg", "--data", "feat", "--out", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("learning_rate"), "{}", stderr(&out));
}

#[test]
fn gradcheck_command() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("gc.cfg"),
        "model.widths = 4,6\nmodel.strides = 1,2\nmodel.kernel = 3\ngradcheck.params = 150\ndata.frames = 6\n",
    )
    .unwrap();
    let out = run(dir.path(), &["gradcheck", "--config", "gc.cfg"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    let report = stdout(&out);
    assert_eq!(value(&report, "status").as_deref(), Some("pass"));
    let err: f64 = value(&report, "max_relative_error").unwrap().parse().unwrap();
    assert!(err < 1e-4);
}
