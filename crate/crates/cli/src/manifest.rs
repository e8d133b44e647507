use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sph_hands::config::KvConfig;
use sph_hands::{Error, Result};

/// What a command did, written as `key = value` lines.
pub struct RunManifest {
    command: &'static str,
    args: Vec<String>,
    seed: Option<u64>,
    config: KvConfig,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: Instant,
    threads: usize,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            args: std::env::args().skip(1).collect(),
            seed: None,
            config: KvConfig::default(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
            threads: rayon::current_num_threads(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Adds every entry of `kv` under `prefix`.
    pub fn config(&mut self, prefix: &str, kv: &KvConfig) {
        for (k, v) in kv.iter() {
            self.config.set(&format!("{prefix}{k}"), v);
        }
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        self.config.set(key, value);
    }

    pub fn to_kv(&self) -> KvConfig {
        let join = |ps: &[PathBuf]| ps.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
        let mut kv = KvConfig::default();
        kv.set("command", self.command);
        kv.set("args", self.args.join(" "));
        kv.set("version", env!("CARGO_PKG_VERSION"));
        if let Some(seed) = self.seed {
            kv.set("seed", seed);
        }
        kv.set("threads", self.threads);
        kv.set("inputs", join(&self.inputs));
        kv.set("outputs", join(&self.outputs));
        kv.set("duration_s", format!("{:.3}", self.started.elapsed().as_secs_f64()));
        for (k, v) in self.config.iter() {
            kv.set(&format!("config.{k}"), v);
        }
        kv
    }

    /// Writes to `explicit`, else next to the first output, else prints the
    /// manifest as `manifest.`-prefixed report lines.
    pub fn finish(&self, explicit: Option<&Path>) -> Result<()> {
        let target = explicit.map(Path::to_path_buf).or_else(|| {
            self.outputs.first().map(|out| {
                if out.is_dir() {
                    out.join("run.manifest")
                } else {
                    let mut name = out.as_os_str().to_owned();
                    name.push(".manifest");
                    PathBuf::from(name)
                }
            })
        });
        let kv = self.to_kv();
        match target {
            Some(path) => fs::write(&path, kv.to_text()).map_err(|e| Error::io(&path, e)),
            None => {
                for (k, v) in kv.iter() {
                    println!("manifest.{k}={v}");
                }
                Ok(())
            }
        }
    }
}
