//! Dataset directories: `data.sktf` plus plain-text sidecars.
//!
//! ```text
//! DIR/data.sktf      N × M × C × T × V tensor
//! DIR/channels.txt   one channel label per line
//! DIR/labels.txt     one class id per line (optional)
//! DIR/embed.cfg      embedding config that produced the tensor (optional)
//! ```

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use super::{EmbedConfig, FeatureTensor};
use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::skeleton_io::{decode_any_tensor, write_tensor, DType};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: FeatureTensor<f64>,
    pub embed: Option<EmbedConfig>,
}

pub fn save_dataset(dir: &Path, dataset: &Dataset, dtype: DType) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data_path = dir.join("data.sktf");
    let file = BufWriter::new(fs::File::create(&data_path).map_err(|e| Error::io(&data_path, e))?);
    match dtype {
        DType::F64 => write_tensor(dataset.features.data(), file)?,
        DType::F32 => write_tensor(&dataset.features.data().cast::<f32>(), file)?,
    }
    let mut channels = dataset.features.channel_map().join("\n");
    channels.push('\n');
    fs::write(dir.join("channels.txt"), channels)?;
    let labels_path = dir.join("labels.txt");
    match dataset.features.labels() {
        Some(labels) => fs::write(&labels_path, labels.iter().map(|l| format!("{l}\n")).collect::<String>())?,
        None if labels_path.exists() => fs::remove_file(&labels_path)?,
        None => {}
    }
    let embed_path = dir.join("embed.cfg");
    match &dataset.embed {
        Some(cfg) => fs::write(&embed_path, cfg.to_kv().to_text())?,
        None if embed_path.exists() => fs::remove_file(&embed_path)?,
        None => {}
    }
    Ok(())
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let data_path = dir.join("data.sktf");
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let data = decode_any_tensor(&bytes)?.to_f64();
    let channels_path = dir.join("channels.txt");
    let channels: Vec<String> = fs::read_to_string(&channels_path)
        .map_err(|e| Error::io(&channels_path, e))?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    let labels_path = dir.join("labels.txt");
    let labels = if labels_path.exists() { Some(read_labels(&labels_path)?) } else { None };
    let embed_path = dir.join("embed.cfg");
    let embed = if embed_path.exists() { Some(EmbedConfig::from_kv(&KvConfig::load(&embed_path)?)?) } else { None };
    Ok(Dataset { features: FeatureTensor::new(data, channels, labels)?, embed })
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    fs::read_to_string(path)
        .map_err(|e| Error::io(path, e))?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse().map_err(|_| Error::config(format!("bad label {l:?} in {}", path.display()))))
        .collect()
}
