//! Parameter checkpoints: a JSON manifest next to a flat little-endian
//! f32 blob. The manifest records every tensor's name, shape, and byte
//! offset plus the model and provider configuration, so `extract` can
//! rebuild the full inference stack from the checkpoint alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use disco_core::train::{ExtractorModel, ModelConfig};

use crate::error::CliError;
use crate::formats::ProviderConfig;
use disco_core::FORMAT_VERSION;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: [usize; 2],
    /// Byte offset into the blob.
    pub offset: usize,
    /// Element count.
    pub len: usize,
    pub dtype: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub model: ModelConfig,
    pub provider: ProviderConfig,
    pub entries: Vec<ManifestEntry>,
}

pub fn manifest_path(prefix: &Path) -> PathBuf {
    with_extension(prefix, "json")
}

pub fn blob_path(prefix: &Path) -> PathBuf {
    with_extension(prefix, "bin")
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(ext);
    prefix.with_file_name(name)
}

pub fn save(
    prefix: &Path,
    model: &ExtractorModel<f32>,
    provider: &ProviderConfig,
) -> Result<(), CliError> {
    let mut entries = Vec::new();
    let mut blob: Vec<u8> = Vec::new();
    for (name, tensor) in model.tensors() {
        entries.push(ManifestEntry {
            name,
            shape: tensor.shape(),
            offset: blob.len(),
            len: tensor.len(),
            dtype: "f32".to_string(),
        });
        for &x in tensor.data() {
            blob.extend_from_slice(&x.to_le_bytes());
        }
    }
    let manifest = Manifest {
        version: FORMAT_VERSION.to_string(),
        model: model.config.clone(),
        provider: provider.clone(),
        entries,
    };
    let blob_file = blob_path(prefix);
    fs::write(&blob_file, &blob).map_err(|e| CliError::io_at(&blob_file, e))?;
    crate::formats::write_json_pretty(&manifest_path(prefix), &manifest)
}

pub fn load(prefix: &Path) -> Result<(ExtractorModel<f32>, ProviderConfig), CliError> {
    let manifest_file = manifest_path(prefix);
    let raw = fs::read_to_string(&manifest_file).map_err(|e| CliError::io_at(&manifest_file, e))?;
    let manifest: Manifest = serde_json::from_str(&raw)
        .map_err(|e| CliError::validation(format!("{}: {e}", manifest_file.display())))?;
    if manifest.version != FORMAT_VERSION {
        return Err(CliError::version(&manifest_file, manifest.version));
    }

    let blob_file = blob_path(prefix);
    let blob = fs::read(&blob_file).map_err(|e| CliError::io_at(&blob_file, e))?;

    // Seed is irrelevant: every tensor is overwritten from the blob.
    let mut model: ExtractorModel<f32> = ExtractorModel::new(manifest.model.clone(), 0);
    let mut tensors = model.tensors_mut();
    if tensors.len() != manifest.entries.len() {
        return Err(CliError::validation(format!(
            "{}: manifest has {} tensors, model expects {}",
            manifest_file.display(),
            manifest.entries.len(),
            tensors.len()
        )));
    }
    for ((name, tensor), entry) in tensors.iter_mut().zip(&manifest.entries) {
        if *name != entry.name || tensor.shape() != entry.shape || entry.dtype != "f32" {
            return Err(CliError::validation(format!(
                "{}: entry `{}` ({:?}, {}) does not match model tensor `{}` ({:?})",
                manifest_file.display(),
                entry.name,
                entry.shape,
                entry.dtype,
                name,
                tensor.shape()
            )));
        }
        let start = entry.offset;
        let end = start + entry.len * 4;
        if end > blob.len() {
            return Err(CliError::validation(format!(
                "{}: blob too short for entry `{}`",
                blob_file.display(),
                entry.name
            )));
        }
        for (i, chunk) in blob[start..end].chunks_exact(4).enumerate() {
            tensor.data_mut()[i] = f32::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    Ok((model, manifest.provider))
}

#[cfg(test)]
mod tests {
    use super::*;
    use disco_core::nn::Activation;

    fn small_config() -> ModelConfig {
        ModelConfig {
            embed_dim: 8,
            classifier_dims: vec![6, 1],
            activation: Activation::Relu,
        }
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("ckpt");
        let model: ExtractorModel<f32> = ExtractorModel::new(small_config(), 99);
        let provider = ProviderConfig::DeterministicRandom { dim: 8, seed: 3 };
        save(&prefix, &model, &provider).unwrap();

        let (loaded, loaded_provider) = load(&prefix).unwrap();
        assert_eq!(loaded.config, model.config);
        for ((na, ta), (nb, tb)) in model.tensors().iter().zip(loaded.tensors().iter()) {
            assert_eq!(na, nb);
            let bits_a: Vec<u32> = ta.data().iter().map(|x| x.to_bits()).collect();
            let bits_b: Vec<u32> = tb.data().iter().map(|x| x.to_bits()).collect();
            assert_eq!(bits_a, bits_b, "tensor {na}");
        }
        match loaded_provider {
            ProviderConfig::DeterministicRandom { dim: 8, seed: 3 } => {}
            other => panic!("provider config mangled: {other:?}"),
        }
    }

    #[test]
    fn truncated_blobs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("ckpt");
        let model: ExtractorModel<f32> = ExtractorModel::new(small_config(), 1);
        save(&prefix, &model, &ProviderConfig::default()).unwrap();
        let blob = blob_path(&prefix);
        let bytes = fs::read(&blob).unwrap();
        fs::write(&blob, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load(&prefix).is_err());
    }

    #[test]
    fn version_mismatches_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("ckpt");
        let model: ExtractorModel<f32> = ExtractorModel::new(small_config(), 1);
        save(&prefix, &model, &ProviderConfig::default()).unwrap();
        let manifest_file = manifest_path(&prefix);
        let mangled = fs::read_to_string(&manifest_file).unwrap().replacen(
            "\"version\": \"1\"",
            "\"version\": \"0\"",
            1,
        );
        fs::write(&manifest_file, mangled).unwrap();
        let err = load(&prefix).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_VERSION);
    }
}
