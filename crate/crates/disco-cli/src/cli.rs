use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Discourse-aware extractive summarization pipeline.
///
/// Stages compose through JSONL artifacts: parse -> graph -> oracle-label
/// -> features -> train -> extract -> evaluate, with `stats` summarizing
/// a processed corpus. Set `DISCO_LOG` to control log verbosity.
#[derive(Debug, Parser)]
#[command(name = "disco", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse .merge/.conll/.bracket annotation files into JSONL.
    Parse(ParseArgs),
    /// Build RST dependency and coref graphs from trees and clusters.
    Graph(GraphArgs),
    /// Greedy ROUGE-oracle importance labels plus corpus statistics.
    OracleLabel(OracleArgs),
    /// Encode per-EDU graph-context feature vectors.
    Features(FeaturesArgs),
    /// Train the extraction encoder (two-phase schedule).
    Train(TrainArgs),
    /// Rank EDUs with a trained encoder and emit extractions.
    Extract(ExtractArgs),
    /// ROUGE with bootstrap intervals and novel n-gram proportions.
    Evaluate(EvaluateArgs),
    /// Corpus statistics table from pipeline artifacts.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Directory of .merge/.conll and .bracket files (doc id = file stem).
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for documents.jsonl and trees.jsonl.
    #[arg(long)]
    pub output: PathBuf,
    /// Reference-summary sidecar JSONL ({doc_id, summary}).
    #[arg(long)]
    pub summaries: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// documents.jsonl from `parse`.
    #[arg(long)]
    pub input: PathBuf,
    /// trees.jsonl from `parse`.
    #[arg(long)]
    pub trees: PathBuf,
    /// Coreference clusters JSONL ({doc_id, clusters}).
    #[arg(long)]
    pub coref: Option<PathBuf>,
    /// Output graphs.jsonl.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// documents.jsonl (reference summaries attached or via --summaries).
    #[arg(long)]
    pub input: PathBuf,
    /// Reference-summary sidecar merged over the documents.
    #[arg(long)]
    pub summaries: Option<PathBuf>,
    /// graphs.jsonl; fills the empty-RST columns of the statistics.
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    /// Maximum EDUs to select per document.
    #[arg(long, default_value_t = 5)]
    pub budget: usize,
    /// Score to maximize: r1, r2, rl, or mean-r1r2.
    #[arg(long, default_value = "mean-r1r2")]
    pub metric: String,
    /// Output labels.jsonl.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional statistics JSON (the corpus summary table).
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// graphs.jsonl from `graph`.
    #[arg(long)]
    pub input: PathBuf,
    /// Output features.jsonl, or a directory of .feat blocks with
    /// --format binary.
    #[arg(long)]
    pub output: PathBuf,
    /// jsonl (default) or binary.
    #[arg(long, default_value = "jsonl")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// documents.jsonl.
    #[arg(long)]
    pub input: PathBuf,
    /// graphs.jsonl.
    #[arg(long)]
    pub graphs: PathBuf,
    /// labels.jsonl from `oracle-label`.
    #[arg(long)]
    pub labels: PathBuf,
    /// TOML with `[model]`, `[train]`, and `[provider]` sections.
    #[arg(long)]
    pub config: PathBuf,
    /// Checkpoint prefix; writes `<prefix>.json` and `<prefix>.bin`.
    #[arg(long)]
    pub output: PathBuf,
    /// Per-epoch metrics CSV.
    #[arg(long)]
    pub metrics: PathBuf,
    /// Overrides the config seed when given.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// documents.jsonl.
    #[arg(long)]
    pub input: PathBuf,
    /// graphs.jsonl.
    #[arg(long)]
    pub graphs: PathBuf,
    /// Checkpoint prefix from `train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Output extractions.jsonl.
    #[arg(long)]
    pub output: PathBuf,
    /// Select the k highest-probability EDUs.
    #[arg(long, conflicts_with = "threshold")]
    pub top_k: Option<usize>,
    /// Select every EDU at or above this probability.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// extractions.jsonl (or any record with doc_id and text).
    #[arg(long)]
    pub candidates: PathBuf,
    /// Reference summaries JSONL ({doc_id, summary}).
    #[arg(long)]
    pub references: PathBuf,
    /// documents.jsonl; enables the novel n-gram section.
    #[arg(long)]
    pub documents: Option<PathBuf>,
    /// Output report JSON.
    #[arg(long)]
    pub output: PathBuf,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = disco_core::bootstrap::DEFAULT_REPLICATES)]
    pub replicates: usize,
    /// Bootstrap confidence level.
    #[arg(long, default_value_t = disco_core::bootstrap::DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    /// Bootstrap seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// documents.jsonl.
    #[arg(long)]
    pub input: PathBuf,
    /// graphs.jsonl; without it every document counts as RST-empty.
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    /// labels.jsonl; without it every document counts as unlabeled.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output statistics JSON.
    #[arg(long)]
    pub output: PathBuf,
}
