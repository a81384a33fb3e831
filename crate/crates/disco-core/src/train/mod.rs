//! Two-phase training of the extraction encoder over a pluggable
//! embedding provider, plus inference-time EDU extraction.

mod provider;
mod schedule;
mod trainer;

pub use provider::{stable_doc_hash, DocumentEmbedding, EmbeddingProvider, DEFAULT_EMBED_DIM};
pub use schedule::{lr_at_step, LrSchedule};
pub use trainer::{
    is_validation_doc, predict_and_extract, train, EpochMetrics, Extraction, ExtractorModel,
    ModelConfig, ModelVars, OptimizerKind, Phase, Selection, SplitMetrics, TrainConfig, TrainError,
    TrainItem, TrainOutcome, DECISION_THRESHOLD, VALIDATION_BUCKETS,
};
