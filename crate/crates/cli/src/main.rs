//! `sph-hands`: parse skeleton files, build spherical-harmonic features,
//! train and evaluate the graph classifier, and run the numerical checks.
//!
//! Exit status: 0 on success, 1 when a run fails or a checked property does
//! not hold, 2 on usage errors.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "sph-hands", version, about = "Local spherical-harmonic features for hand action recognition")]
struct Cli {
    /// Single worker thread; outputs are bit-reproducible.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Where to write the run manifest.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SkeletonFormat {
    Fpha,
    Ntu,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Dtype {
    F32,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Property {
    Orthonormality,
    Azimuthal,
    #[value(name = "so3-spectrum")]
    So3Spectrum,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a skeleton text file to a T×M×V×3 tensor.
    Parse {
        #[arg(long, value_enum)]
        format: SkeletonFormat,
        #[arg(long, value_enum, default_value = "f64")]
        dtype: Dtype,
        input: PathBuf,
        output: PathBuf,
    },
    /// Build a feature dataset from a sequence tensor or a dataset directory.
    Embed(commands::EmbedArgs),
    /// Check a numerical property of the harmonics.
    Verify {
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a labeled synthetic gesture dataset.
    Synth {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        frames: Option<usize>,
        output: PathBuf,
    },
    /// Train a classifier on a labeled dataset.
    Train {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, value_name = "DIR")]
        val: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Evaluate a checkpoint.
    Eval {
        #[arg(long, value_name = "DIR")]
        ckpt: PathBuf,
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        /// Class ids counted for the hand accuracy.
        #[arg(long, value_name = "FILE")]
        hand_classes: Option<PathBuf>,
        /// Write softmax scores (N×classes).
        #[arg(long, value_name = "FILE")]
        scores: Option<PathBuf>,
    },
    /// Fuse score tensors and report accuracy.
    Ensemble {
        #[arg(required = true)]
        scores: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Labels file, one class id per line.
        #[arg(long, value_name = "FILE", conflicts_with = "data")]
        labels: Option<PathBuf>,
        /// Dataset directory to take labels from.
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Compare analytic and numeric gradients.
    Gradcheck {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,
    },
}

fn configure_threads(deterministic: bool) -> Result<(), String> {
    let threads = if deterministic {
        Some(1)
    } else {
        match std::env::var("SPH_HANDS_THREADS") {
            Ok(v) => {
                Some(v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or(format!("bad SPH_HANDS_THREADS {v:?}"))?)
            }
            Err(_) => None,
        }
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.deterministic) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let manifest = cli.manifest.as_deref();
    let result = match cli.command {
        Command::Parse { format, dtype, input, output } => commands::parse(format, dtype, &input, &output, manifest),
        Command::Embed(args) => commands::embed(&args, manifest),
        Command::Verify { property, tol, seed } => commands::verify(property, tol, seed, manifest),
        Command::Synth { spec, n, seed, frames, output } => commands::synth(&spec, n, seed, frames, &output, manifest),
        Command::Train { config, data, val, out } => commands::train(&config, &data, val.as_deref(), &out, manifest),
        Command::Eval { ckpt, data, hand_classes, scores } => {
            commands::eval(&ckpt, &data, hand_classes.as_deref(), scores.as_deref(), manifest)
        }
        Command::Ensemble { scores, weights, labels, data, out } => commands::ensemble(
            &scores,
            weights.as_deref(),
            labels.as_deref(),
            data.as_deref(),
            out.as_deref(),
            manifest,
        ),
        Command::Gradcheck { config, data } => commands::gradcheck(&config, data.as_deref(), manifest),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
