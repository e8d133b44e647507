//! A checkpoint is a directory holding one SKTF file per parameter tensor,
//! two for the input normalization, and `manifest.txt`, which lists names
//! and shapes and echoes the architecture.

use std::fs;
use std::path::Path;

use super::model::{ArchConfig, GcnModel};
use crate::config::{join_list, KvConfig};
use crate::error::{Error, Result};
use crate::skeleton_io::{decode_tensor, encode_tensor, DenseTensor};

pub const MANIFEST: &str = "manifest.txt";

fn tensor_file(name: &str) -> String {
    format!("{name}.sktf")
}

pub fn save_checkpoint(dir: &Path, model: &GcnModel, extra: &KvConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = KvConfig::default();
    for (k, v) in model.arch().to_kv().iter() {
        manifest.set(&format!("arch.{k}"), v);
    }
    for (k, v) in extra.iter() {
        manifest.set(&format!("meta.{k}"), v);
    }
    let names: Vec<&str> = model.layout().iter().map(|s| s.name.as_str()).collect();
    manifest.set("params", names.join(","));
    manifest.set("parameter_count", model.parameter_count());
    for spec in model.layout() {
        manifest.set(&format!("shape.{}", spec.name), join_list(&spec.shape));
        let tensor = DenseTensor::new(spec.shape.clone(), model.params()[spec.range()].to_vec())?;
        let path = dir.join(tensor_file(&spec.name));
        fs::write(&path, encode_tensor(&tensor)).map_err(|e| Error::io(&path, e))?;
    }
    let (shift, scale) = model.input_normalization();
    for (name, values) in [("input.shift", shift), ("input.scale", scale)] {
        let tensor = DenseTensor::new(vec![values.len()], values.to_vec())?;
        let path = dir.join(tensor_file(name));
        fs::write(&path, encode_tensor(&tensor)).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))
}

/// Returns the model and the `meta.*` entries of the manifest.
pub fn load_checkpoint(dir: &Path) -> Result<(GcnModel, KvConfig)> {
    let manifest = KvConfig::load(&dir.join(MANIFEST))?;
    let arch = ArchConfig::from_kv(&manifest.section("arch."))?;
    let mut model = GcnModel::zeros(arch)?;
    let stored: Vec<String> = manifest.get_list("params")?.unwrap_or_default();
    let expected: Vec<String> = model.layout().iter().map(|s| s.name.clone()).collect();
    if stored != expected {
        return Err(Error::shape(format!("checkpoint lists parameters {stored:?}, architecture needs {expected:?}")));
    }
    for spec in model.layout().to_vec() {
        let path = dir.join(tensor_file(&spec.name));
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let tensor = decode_tensor::<f64>(&bytes)?;
        if tensor.dims() != spec.shape.as_slice() {
            return Err(Error::shape(format!(
                "{} has shape {:?}, expected {:?}",
                spec.name,
                tensor.dims(),
                spec.shape
            )));
        }
        model.params_mut()[spec.range()].copy_from_slice(tensor.data());
    }
    let mut norm = Vec::with_capacity(2);
    for name in ["input.shift", "input.scale"] {
        let path = dir.join(tensor_file(name));
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        norm.push(decode_tensor::<f64>(&bytes)?.into_data());
    }
    let scale = norm.pop().expect("two tensors");
    model.set_input_normalization(norm.pop().expect("two tensors"), scale)?;
    Ok((model, manifest.section("meta.")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join(format!("sph-hands-ckpt-{}", std::process::id()));
        let mut model = GcnModel::init(ArchConfig::desk(7, 12, 8, 6), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        model.set_input_normalization(vec![0.5; 7], vec![2.0; 7]).unwrap();
        let mut meta = KvConfig::default();
        meta.set("seed", 3);
        save_checkpoint(&dir, &model, &meta).unwrap();
        let (back, meta_back) = load_checkpoint(&dir).unwrap();
        assert_eq!(back, model);
        assert_eq!(meta_back.raw("seed"), Some("3"));
        fs::remove_file(dir.join("head.bias.sktf")).unwrap();
        assert!(load_checkpoint(&dir).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
