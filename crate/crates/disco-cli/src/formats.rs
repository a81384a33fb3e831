//! On-disk record shapes for every pipeline stage, plus JSONL helpers.
//!
//! Every stage output carries a `version` field checked on input; see
//! docs/formats.md for the full schema reference.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use disco_core::corpus::{parse_jsonl_versioned, serialize_jsonl, Document};
use disco_core::train::{EmbeddingProvider, ModelConfig, TrainConfig, DEFAULT_EMBED_DIM};
use disco_core::FORMAT_VERSION;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeNodeRecord {
    pub first: usize,
    pub last: usize,
    pub nuclearity: String,
    pub relation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeRecord {
    pub version: String,
    pub doc_id: String,
    pub nodes: Vec<TreeNodeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphRecord {
    pub version: String,
    pub doc_id: String,
    pub num_edus: usize,
    /// `[source, target, relation_id]` triples.
    pub rst_edges: Vec<[usize; 3]>,
    /// Normalized `[min, max]` pairs.
    pub coref_pairs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelRecord {
    pub version: String,
    pub doc_id: String,
    /// One 0/1 flag per EDU.
    pub labels: Vec<u8>,
    /// Greedy pick order.
    pub selected: Vec<usize>,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub version: String,
    pub doc_id: String,
    pub num_edus: usize,
    pub dim: usize,
    pub rows: Vec<Vec<f32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub version: String,
    pub doc_id: String,
    pub selected: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub text: String,
}

/// Reference-summary sidecar; an input format, so the version tag is
/// optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub doc_id: String,
    pub summary: String,
}

/// Coreference mention clusters over EDU ordinals; an input format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub doc_id: String,
    pub clusters: Vec<Vec<usize>>,
}

/// The corpus statistics table (one JSON object, not JSONL).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsReport {
    pub version: String,
    pub total_records: usize,
    pub average_edus: f64,
    pub average_summary_words: f64,
    pub empty_rst_graph: usize,
    pub empty_oracle_label: usize,
    pub both_empty: usize,
    pub skipped_missing_reference: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricBlock {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub margin_of_error: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NovelNgramBlock {
    #[serde(rename = "1")]
    pub unigram: f64,
    #[serde(rename = "2")]
    pub bigram: f64,
    #[serde(rename = "3")]
    pub trigram: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: String,
    pub documents: usize,
    pub replicates: usize,
    pub confidence: f64,
    pub seed: u64,
    pub rouge1: MetricBlock,
    pub rouge2: MetricBlock,
    #[serde(rename = "rougeL")]
    pub rouge_l: MetricBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub novel_ngrams: Option<NovelNgramBlock>,
}

/// Embedding provider selection, stored in the train config and echoed
/// into checkpoint manifests so `extract` needs no extra flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProviderConfig {
    DeterministicRandom { dim: usize, seed: u64 },
    FileLoaded { dim: usize, path: PathBuf },
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::DeterministicRandom {
            dim: DEFAULT_EMBED_DIM,
            seed: 7,
        }
    }
}

/// One document's precomputed embeddings in the file-loaded format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub doc_id: String,
    /// Per EDU: token rows.
    pub edu_tokens: Vec<Vec<Vec<f32>>>,
    /// Per EDU: one CLS row.
    pub cls: Vec<Vec<f32>>,
}

impl ProviderConfig {
    pub fn build(&self) -> Result<EmbeddingProvider, CliError> {
        match self {
            ProviderConfig::DeterministicRandom { dim, seed } => {
                Ok(EmbeddingProvider::deterministic(*dim, *seed))
            }
            ProviderConfig::FileLoaded { dim, path } => {
                let records: Vec<EmbeddingRecord> = read_jsonl(path)?;
                let mut table = std::collections::BTreeMap::new();
                for r in records {
                    let edu_tokens = r
                        .edu_tokens
                        .into_iter()
                        .map(|rows| rows_to_tensor(rows, *dim))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| CliError::validation(format!("{}: {e}", r.doc_id)))?;
                    let cls = r
                        .cls
                        .into_iter()
                        .map(|row| rows_to_tensor(vec![row], *dim))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| CliError::validation(format!("{}: {e}", r.doc_id)))?;
                    table.insert(
                        r.doc_id,
                        disco_core::train::DocumentEmbedding { edu_tokens, cls },
                    );
                }
                Ok(EmbeddingProvider::from_table(*dim, table))
            }
        }
    }
}

fn rows_to_tensor(rows: Vec<Vec<f32>>, dim: usize) -> Result<disco_core::nn::Tensor<f32>, String> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * dim);
    for row in rows {
        if row.len() != dim {
            return Err(format!(
                "embedding row has {} values, expected {dim}",
                row.len()
            ));
        }
        data.extend_from_slice(&row);
    }
    disco_core::nn::Tensor::from_vec(n, dim, data).map_err(|e| e.to_string())
}

/// The train stage's TOML configuration file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub provider: ProviderConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = fs::read_to_string(path).map_err(|e| CliError::io_at(path, e))?;
        toml::from_str(&raw).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }
}

// ---------------------------------------------------------------------
// JSONL plumbing
// ---------------------------------------------------------------------

/// Read a whole JSONL file of records; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io_at(path, e))?;
    let mut out = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io_at(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line)
            .map_err(|e| CliError::validation(format!("{}:{}: {e}", path.display(), no + 1)))?;
        out.push(record);
    }
    Ok(out)
}

/// Read records that carry a `version` field and enforce it.
pub fn read_versioned_jsonl<T>(
    path: &Path,
    version_of: impl Fn(&T) -> &str,
) -> Result<Vec<T>, CliError>
where
    T: DeserializeOwned,
{
    let records: Vec<T> = read_jsonl(path)?;
    for r in &records {
        let v = version_of(r);
        if v != FORMAT_VERSION {
            return Err(CliError::version(path, v));
        }
    }
    Ok(records)
}

/// Read a documents.jsonl file, enforcing versions and model invariants.
pub fn read_documents(path: &Path) -> Result<Vec<Document>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io_at(path, e))?;
    let mut out = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io_at(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (doc, version) = parse_jsonl_versioned(&line)
            .map_err(|e| CliError::validation(format!("{}:{}: {e}", path.display(), no + 1)))?;
        if version != FORMAT_VERSION {
            return Err(CliError::version(path, version));
        }
        out.push(doc);
    }
    Ok(out)
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<(), CliError> {
    let lines: Vec<String> = docs.iter().map(serialize_jsonl).collect();
    write_lines(path, &lines)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let lines: Vec<String> = records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serialization is infallible"))
        .collect();
    write_lines(path, &lines)
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    body.push('\n');
    fs::write(path, body).map_err(|e| CliError::io_at(path, e))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut file = fs::File::create(path).map_err(|e| CliError::io_at(path, e))?;
    for line in lines {
        writeln!(file, "{line}").map_err(|e| CliError::io_at(path, e))?;
    }
    Ok(())
}
