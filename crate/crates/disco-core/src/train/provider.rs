use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrainError;
use crate::corpus::Document;
use crate::nn::Tensor;

/// Per-EDU embeddings for one document: token rows for the span
/// extractor plus one CLS row per EDU.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentEmbedding {
    /// One `n_tokens x dim` tensor per EDU.
    pub edu_tokens: Vec<Tensor<f32>>,
    /// One `1 x dim` CLS row per EDU.
    pub cls: Vec<Tensor<f32>>,
}

/// Stand-in for the pre-trained language model: either content-hashed
/// pseudo-random vectors (self-contained, reproducible) or embeddings
/// precomputed offline and loaded from a file.
///
/// Providers carry no trainable parameters; they are frozen by
/// construction, which is what the two-phase schedule's first phase
/// relies on. [`EmbeddingProvider::state_hash`] fingerprints the
/// provider so tests can assert it never changes across training.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingProvider {
    DeterministicRandom {
        dim: usize,
        seed: u64,
    },
    FileLoaded {
        dim: usize,
        table: BTreeMap<String, DocumentEmbedding>,
    },
}

/// Embedding width matching the pre-trained models being stood in for.
pub const DEFAULT_EMBED_DIM: usize = 768;

impl EmbeddingProvider {
    pub fn deterministic(dim: usize, seed: u64) -> Self {
        EmbeddingProvider::DeterministicRandom { dim, seed }
    }

    pub fn from_table(dim: usize, table: BTreeMap<String, DocumentEmbedding>) -> Self {
        EmbeddingProvider::FileLoaded { dim, table }
    }

    pub fn dim(&self) -> usize {
        match self {
            EmbeddingProvider::DeterministicRandom { dim, .. } => *dim,
            EmbeddingProvider::FileLoaded { dim, .. } => *dim,
        }
    }

    /// Embed every EDU of a document. Deterministic-random embeddings
    /// depend only on (seed, token identity, position within the EDU)
    /// for tokens and on the EDU's token content for CLS rows, so equal
    /// content embeds equally across documents and runs.
    pub fn embed(&self, doc: &Document) -> Result<DocumentEmbedding, TrainError> {
        match self {
            EmbeddingProvider::DeterministicRandom { dim, seed } => {
                let mut edu_tokens = Vec::with_capacity(doc.num_edus());
                let mut cls = Vec::with_capacity(doc.num_edus());
                for edu in 0..doc.num_edus() {
                    let surfaces = doc.edu_surfaces(edu);
                    let mut rows = Vec::with_capacity(surfaces.len());
                    for (position, surface) in surfaces.iter().enumerate() {
                        let h = token_hash(*seed, surface, position);
                        rows.push(hashed_row(*dim, h));
                    }
                    edu_tokens.push(stack_rows(*dim, rows));
                    cls.push(hashed_row(*dim, cls_hash(*seed, &surfaces)));
                }
                Ok(DocumentEmbedding { edu_tokens, cls })
            }
            EmbeddingProvider::FileLoaded { dim, table } => {
                let emb = table
                    .get(doc.doc_id())
                    .ok_or_else(|| TrainError::MissingEmbedding {
                        doc_id: doc.doc_id().to_string(),
                    })?;
                if emb.edu_tokens.len() != doc.num_edus()
                    || emb.cls.len() != doc.num_edus()
                    || emb.cls.iter().any(|c| c.cols() != *dim)
                    || emb.edu_tokens.iter().any(|t| t.cols() != *dim)
                {
                    return Err(TrainError::MissingEmbedding {
                        doc_id: doc.doc_id().to_string(),
                    });
                }
                Ok(emb.clone())
            }
        }
    }

    /// Stable fingerprint of the provider's state.
    pub fn state_hash(&self) -> u64 {
        let mut h = Fnv::new();
        match self {
            EmbeddingProvider::DeterministicRandom { dim, seed } => {
                h.write(b"deterministic-random");
                h.write(&(*dim as u64).to_le_bytes());
                h.write(&seed.to_le_bytes());
            }
            EmbeddingProvider::FileLoaded { dim, table } => {
                h.write(b"file-loaded");
                h.write(&(*dim as u64).to_le_bytes());
                for (doc_id, emb) in table {
                    h.write(doc_id.as_bytes());
                    for t in emb.edu_tokens.iter().chain(&emb.cls) {
                        for &x in t.data() {
                            h.write(&x.to_bits().to_le_bytes());
                        }
                    }
                }
            }
        }
        h.finish()
    }
}

fn hashed_row(dim: usize, hash: u64) -> Tensor<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(hash);
    Tensor::from_fn(1, dim, |_, _| rng.random_range(-1.0f32..1.0f32))
}

fn stack_rows(dim: usize, rows: Vec<Tensor<f32>>) -> Tensor<f32> {
    let mut data = Vec::with_capacity(rows.len() * dim);
    for r in &rows {
        data.extend_from_slice(r.data());
    }
    Tensor::from_vec(rows.len(), dim, data).expect("rows share the provider dim")
}

fn token_hash(seed: u64, surface: &str, position: usize) -> u64 {
    let mut h = Fnv::new();
    h.write(&seed.to_le_bytes());
    h.write(b"tok");
    h.write(surface.to_lowercase().as_bytes());
    h.write(&(position as u64).to_le_bytes());
    h.finish()
}

fn cls_hash(seed: u64, surfaces: &[&str]) -> u64 {
    let mut h = Fnv::new();
    h.write(&seed.to_le_bytes());
    h.write(b"cls");
    for s in surfaces {
        h.write(s.to_lowercase().as_bytes());
        h.write(&[0x1f]);
    }
    h.finish()
}

/// FNV-1a, also used for the stable validation-split hash.
pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

/// Stable content hash of a document id (validation-split assignment).
pub fn stable_doc_hash(doc_id: &str) -> u64 {
    let mut h = Fnv::new();
    h.write(doc_id.as_bytes());
    h.finish()
}
