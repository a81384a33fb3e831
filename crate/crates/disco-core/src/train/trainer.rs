use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::provider::{stable_doc_hash, DocumentEmbedding, EmbeddingProvider, DEFAULT_EMBED_DIM};
use super::schedule::{lr_at_step, LrSchedule};
use crate::corpus::Document;
use crate::features::{encode_document, FeatureError, FeatureMatrix, FEATURE_DIM};
use crate::graph::{CorefGraph, RstGraph};
use crate::nn::{
    classifier_forward, span_extractor_forward, weighted_mse_loss, Activation, ClassifierParams,
    ClassifierVars, DropoutMode, NnError, Scalar, SpanExtractorParams, SpanExtractorVars, Tape,
    Tensor, Var, CLASSIFIER_STAGE_DIMS,
};
use crate::oracle::MetricKind;
use crate::rouge::selection_prf;

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    EmptyCorpus,
    NonFiniteLoss {
        epoch: usize,
        step: usize,
    },
    LabelMismatch {
        doc_id: String,
        expected: usize,
        found: usize,
    },
    MissingEmbedding {
        doc_id: String,
    },
    /// Provider dim and model embedding dim disagree.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    Feature(FeatureError),
    Nn(NnError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyCorpus => write!(f, "no trainable documents in the corpus"),
            TrainError::NonFiniteLoss { epoch, step } => {
                write!(f, "non-finite loss at epoch {epoch}, step {step}")
            }
            TrainError::LabelMismatch {
                doc_id,
                expected,
                found,
            } => write!(f, "document {doc_id}: {found} labels for {expected} EDUs"),
            TrainError::MissingEmbedding { doc_id } => {
                write!(f, "no embeddings for document {doc_id}")
            }
            TrainError::DimensionMismatch { expected, found } => {
                write!(
                    f,
                    "provider dim {found} does not match model dim {expected}"
                )
            }
            TrainError::Feature(e) => write!(f, "feature encoding failed: {e}"),
            TrainError::Nn(e) => write!(f, "forward/backward failed: {e}"),
        }
    }
}

impl From<FeatureError> for TrainError {
    fn from(e: FeatureError) -> Self {
        TrainError::Feature(e)
    }
}

impl From<NnError> for TrainError {
    fn from(e: NnError) -> Self {
        TrainError::Nn(e)
    }
}

/// Architecture of the extraction encoder (the MLP variant: CLS and
/// span embeddings plus the 256-dim graph vector feed one tower).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub classifier_dims: Vec<usize>,
    pub activation: Activation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: DEFAULT_EMBED_DIM,
            classifier_dims: CLASSIFIER_STAGE_DIMS.to_vec(),
            activation: Activation::Relu,
        }
    }
}

impl ModelConfig {
    /// Classifier input width: CLS `‖` span `‖` graph features.
    pub fn input_dim(&self) -> usize {
        2 * self.embed_dim + FEATURE_DIM
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimizerKind {
    Sgd {
        momentum: f64,
    },
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Sgd { momentum: 0.9 }
    }
}

/// Two-phase training configuration. Phase 1 trains the randomly
/// initialized encoder while the embedding provider stays fixed (it is
/// untrainable by construction); phase 2 continues over the full
/// network for a few more epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs_frozen: usize,
    pub epochs_full: usize,
    pub schedule: LrSchedule,
    pub pos_weight: f64,
    pub dropout: f64,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Oracle-labeling budget (EDU count), carried in the same config
    /// file for the labeling stage.
    pub budget: usize,
    /// Oracle-labeling metric, carried for the labeling stage.
    pub metric: MetricKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs_frozen: 2,
            epochs_full: 4,
            schedule: LrSchedule::default(),
            pos_weight: 9.0,
            dropout: 0.1,
            batch_size: 8,
            optimizer: OptimizerKind::default(),
            seed: 42,
            budget: 5,
            metric: MetricKind::MeanR1R2,
        }
    }
}

/// The trainable encoder: span extractor plus classification tower.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorModel<S> {
    pub config: ModelConfig,
    pub span: SpanExtractorParams<S>,
    pub classifier: ClassifierParams<S>,
}

#[derive(Debug)]
pub struct ModelVars {
    pub span: SpanExtractorVars,
    pub classifier: ClassifierVars,
    /// Parameter vars in [`ExtractorModel::tensors`] order.
    ordered: Vec<Var>,
}

impl<S: Scalar> ExtractorModel<S> {
    pub fn new(config: ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = SpanExtractorParams::new(config.embed_dim, &mut rng);
        let classifier = ClassifierParams::new(
            config.input_dim(),
            &config.classifier_dims,
            config.activation,
            &mut rng,
        );
        ExtractorModel {
            config,
            span,
            classifier,
        }
    }

    pub fn tensors(&self) -> Vec<(String, &Tensor<S>)> {
        let mut out = self.span.tensors();
        out.extend(self.classifier.tensors("classifier"));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<S>)> {
        let mut out = self.span.tensors_mut();
        out.extend(self.classifier.tensors_mut("classifier"));
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Insert all parameters as tape leaves, in [`ExtractorModel::tensors`]
    /// order.
    pub fn insert(&self, tape: &mut Tape<S>) -> ModelVars {
        let span = self.span.insert(tape);
        let classifier = self.classifier.insert(tape);
        let mut ordered = alloc::vec![span.w1, span.b1, span.w2, span.b2];
        for stage in &classifier.stages {
            ordered.push(stage.weight);
            ordered.push(stage.bias);
            if let Some(g) = stage.gamma {
                ordered.push(g);
            }
            if let Some(b) = stage.beta {
                ordered.push(b);
            }
        }
        debug_assert_eq!(ordered.len(), self.tensors().len());
        ModelVars {
            span,
            classifier,
            ordered,
        }
    }

    /// Per-EDU importance probabilities for one embedded document.
    pub fn forward<R: rand::Rng>(
        &self,
        tape: &mut Tape<S>,
        vars: &ModelVars,
        embedding: &DocumentEmbedding,
        features: &FeatureMatrix,
        dropout: &mut DropoutMode<'_, R>,
    ) -> Result<Var, NnError> {
        let num_edus = embedding.edu_tokens.len();
        let mut rows = Vec::with_capacity(num_edus);
        for edu in 0..num_edus {
            let tokens = tape.leaf(&embedding.edu_tokens[edu].cast::<S>());
            let span = span_extractor_forward(tape, tokens, &vars.span)?.span;
            let cls = tape.leaf(&embedding.cls[edu].cast::<S>());
            let feat: Vec<S> = features
                .row(edu)
                .iter()
                .map(|&x| S::from_f64(x as f64))
                .collect();
            let feat = tape.leaf_from(1, FEATURE_DIM, feat)?;
            rows.push(tape.concat_cols(&[cls, span, feat])?);
        }
        let stacked = tape.concat_rows(&rows)?;
        classifier_forward(tape, stacked, &vars.classifier, dropout)
    }
}

/// One document ready for training: parsed, graphed, and oracle-labeled.
#[derive(Debug, Clone)]
pub struct TrainItem {
    pub doc: Document,
    pub rst: Option<RstGraph>,
    pub coref: Option<CorefGraph>,
    pub labels: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Frozen,
    Full,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Frozen => "frozen",
            Phase::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitMetrics {
    pub loss: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// 1-based epoch number across both phases.
    pub epoch: usize,
    pub phase: Phase,
    pub train: SplitMetrics,
    pub validation: SplitMetrics,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub model: ExtractorModel<f32>,
    pub history: Vec<EpochMetrics>,
}

/// Fraction denominator of the stable validation split: documents whose
/// id hashes to bucket 0 of 10 validate, the rest train.
pub const VALIDATION_BUCKETS: u64 = 10;

/// Whether a document id falls in the validation split.
pub fn is_validation_doc(doc_id: &str) -> bool {
    stable_doc_hash(doc_id).is_multiple_of(VALIDATION_BUCKETS)
}

struct PreparedDoc {
    embedding: DocumentEmbedding,
    features: FeatureMatrix,
    labels: Vec<bool>,
}

struct Optimizer {
    kind: OptimizerKind,
    velocity: Vec<Vec<f32>>,
    second: Vec<Vec<f32>>,
    step: usize,
}

impl Optimizer {
    fn new(kind: OptimizerKind, shapes: &[usize]) -> Self {
        Optimizer {
            kind,
            velocity: shapes.iter().map(|&n| alloc::vec![0.0; n]).collect(),
            second: shapes.iter().map(|&n| alloc::vec![0.0; n]).collect(),
            step: 0,
        }
    }

    fn apply(&mut self, params: &mut [(String, &mut Tensor<f32>)], grads: &[Vec<f32>], lr: f64) {
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd { momentum } => {
                let m = momentum as f32;
                for ((_, p), (v, g)) in params.iter_mut().zip(self.velocity.iter_mut().zip(grads)) {
                    for i in 0..g.len() {
                        v[i] = m * v[i] + g[i];
                        p.data_mut()[i] -= lr as f32 * v[i];
                    }
                }
            }
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let (b1, b2, eps) = (beta1 as f32, beta2 as f32, epsilon as f32);
                let bias1 = 1.0 - num_traits::Float::powi(b1, self.step as i32);
                let bias2 = 1.0 - num_traits::Float::powi(b2, self.step as i32);
                for ((_, p), ((m, v), g)) in params.iter_mut().zip(
                    self.velocity
                        .iter_mut()
                        .zip(self.second.iter_mut())
                        .zip(grads),
                ) {
                    for i in 0..g.len() {
                        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                        let m_hat = m[i] / bias1;
                        let v_hat = v[i] / bias2;
                        p.data_mut()[i] -=
                            lr as f32 * m_hat / (num_traits::Float::sqrt(v_hat) + eps);
                    }
                }
            }
        }
    }
}

/// Two-phase training over a labeled corpus. Deterministic for a fixed
/// `(corpus, configs, seed)`: batching, dropout, and initialization all
/// derive from the config seed.
pub fn train(
    corpus: &[TrainItem],
    provider: &EmbeddingProvider,
    model_config: &ModelConfig,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    if provider.dim() != model_config.embed_dim {
        return Err(TrainError::DimensionMismatch {
            expected: model_config.embed_dim,
            found: provider.dim(),
        });
    }

    // Embeddings and graph features never change across epochs.
    let mut train_docs: Vec<PreparedDoc> = Vec::new();
    let mut val_docs: Vec<PreparedDoc> = Vec::new();
    for item in corpus {
        let num_edus = item.doc.num_edus();
        if item.labels.len() != num_edus {
            return Err(TrainError::LabelMismatch {
                doc_id: item.doc.doc_id().to_string(),
                expected: num_edus,
                found: item.labels.len(),
            });
        }
        if num_edus == 0 {
            continue;
        }
        let prepared = PreparedDoc {
            embedding: provider.embed(&item.doc)?,
            features: document_features(&item.doc, item.rst.as_ref(), item.coref.as_ref())?,
            labels: item.labels.clone(),
        };
        if is_validation_doc(item.doc.doc_id()) {
            val_docs.push(prepared);
        } else {
            train_docs.push(prepared);
        }
    }
    if train_docs.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }

    let mut model: ExtractorModel<f32> = ExtractorModel::new(model_config.clone(), config.seed);
    let shapes: Vec<usize> = model.tensors().iter().map(|(_, t)| t.len()).collect();
    let mut optimizer = Optimizer::new(config.optimizer, &shapes);

    let total_epochs = config.epochs_frozen + config.epochs_full;
    let mut history = Vec::with_capacity(total_epochs);
    let mut global_step = 0usize;

    for epoch in 0..total_epochs {
        let phase = if epoch < config.epochs_frozen {
            Phase::Frozen
        } else {
            Phase::Full
        };
        let mut order: Vec<usize> = (0..train_docs.len()).collect();
        let mut shuffle_rng =
            ChaCha8Rng::seed_from_u64(mix(config.seed, epoch as u64, SHUFFLE_TAG));
        order.shuffle(&mut shuffle_rng);

        for (batch_no, batch) in order.chunks(config.batch_size.max(1)).enumerate() {
            let mut tape: Tape<f32> = Tape::new();
            let vars = model.insert(&mut tape);
            let mut dropout_rng =
                ChaCha8Rng::seed_from_u64(mix(config.seed, epoch as u64, batch_no as u64));
            let mut dropout = if config.dropout > 0.0 {
                DropoutMode::Active {
                    rate: config.dropout,
                    rng: &mut dropout_rng,
                }
            } else {
                DropoutMode::Inactive
            };

            let mut prob_vars = Vec::with_capacity(batch.len());
            let mut labels: Vec<bool> = Vec::new();
            for &doc_idx in batch {
                let d = &train_docs[doc_idx];
                let probs =
                    model.forward(&mut tape, &vars, &d.embedding, &d.features, &mut dropout)?;
                prob_vars.push(probs);
                labels.extend_from_slice(&d.labels);
            }
            let all_probs = tape.concat_rows(&prob_vars)?;
            let loss = weighted_mse_loss(&mut tape, all_probs, &labels, config.pos_weight)?;
            let loss_value = tape.value(loss)[0];
            if !loss_value.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch: epoch + 1,
                    step: batch_no,
                });
            }
            tape.backward(loss)?;

            let grads: Vec<Vec<f32>> = vars
                .ordered
                .iter()
                .map(|&v| tape.grad(v).to_vec())
                .collect();
            let lr = lr_at_step(&config.schedule, global_step);
            optimizer.apply(&mut model.tensors_mut(), &grads, lr);
            global_step += 1;
        }

        let train_metrics = evaluate_split(&model, &train_docs, config.pos_weight)?;
        let val_metrics = evaluate_split(&model, &val_docs, config.pos_weight)?;
        history.push(EpochMetrics {
            epoch: epoch + 1,
            phase,
            train: train_metrics,
            validation: val_metrics,
        });
    }

    Ok(TrainOutcome { model, history })
}

fn document_features(
    doc: &Document,
    rst: Option<&RstGraph>,
    coref: Option<&CorefGraph>,
) -> Result<FeatureMatrix, TrainError> {
    let empty;
    let rst = match rst {
        Some(g) => g,
        None => {
            empty = RstGraph::empty(doc.num_edus());
            &empty
        }
    };
    Ok(encode_document(rst, coref)?)
}

/// Decision threshold turning probabilities into selections.
pub const DECISION_THRESHOLD: f64 = 0.5;

fn evaluate_split(
    model: &ExtractorModel<f32>,
    docs: &[PreparedDoc],
    pos_weight: f64,
) -> Result<SplitMetrics, TrainError> {
    if docs.is_empty() {
        return Ok(SplitMetrics {
            loss: 0.0,
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        });
    }
    let mut tape: Tape<f32> = Tape::new();
    let vars = model.insert(&mut tape);
    let mut prob_vars = Vec::with_capacity(docs.len());
    let mut labels: Vec<bool> = Vec::new();
    for d in docs {
        let probs = model.forward(
            &mut tape,
            &vars,
            &d.embedding,
            &d.features,
            &mut DropoutMode::<ChaCha8Rng>::Inactive,
        )?;
        prob_vars.push(probs);
        labels.extend_from_slice(&d.labels);
    }
    let all_probs = tape.concat_rows(&prob_vars)?;
    let loss = weighted_mse_loss(&mut tape, all_probs, &labels, pos_weight)?;
    let predicted: Vec<bool> = tape
        .value(all_probs)
        .iter()
        .map(|&p| p as f64 >= DECISION_THRESHOLD)
        .collect();
    let (precision, recall, f1) =
        selection_prf(&predicted, &labels).expect("lengths match by construction");
    Ok(SplitMetrics {
        loss: tape.value(loss)[0] as f64,
        precision,
        recall,
        f1,
    })
}

/// How `predict_and_extract` picks EDUs from ranked probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    TopK(usize),
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// Selected EDU ordinals in document order.
    pub selected: Vec<usize>,
    /// Classifier probability per EDU.
    pub probabilities: Vec<f64>,
    /// Selected EDU surfaces concatenated in document order.
    pub text: String,
}

/// Rank EDUs by classifier probability and emit the selection plus the
/// concatenated extraction text (input to an external abstractive
/// decoder).
pub fn predict_and_extract(
    model: &ExtractorModel<f32>,
    provider: &EmbeddingProvider,
    doc: &Document,
    rst: Option<&RstGraph>,
    coref: Option<&CorefGraph>,
    selection: Selection,
) -> Result<Extraction, TrainError> {
    if doc.num_edus() == 0 {
        return Ok(Extraction {
            selected: Vec::new(),
            probabilities: Vec::new(),
            text: String::new(),
        });
    }
    let embedding = provider.embed(doc)?;
    let features = document_features(doc, rst, coref)?;
    let mut tape: Tape<f32> = Tape::new();
    let vars = model.insert(&mut tape);
    let probs = model.forward(
        &mut tape,
        &vars,
        &embedding,
        &features,
        &mut DropoutMode::<ChaCha8Rng>::Inactive,
    )?;
    let probabilities: Vec<f64> = tape.value(probs).iter().map(|&p| p as f64).collect();

    let mut selected: Vec<usize> = match selection {
        Selection::TopK(k) => {
            let mut ranked: Vec<usize> = (0..probabilities.len()).collect();
            ranked.sort_by(|&a, &b| {
                probabilities[b]
                    .total_cmp(&probabilities[a])
                    .then(a.cmp(&b))
            });
            ranked.truncate(k);
            ranked
        }
        Selection::Threshold(t) => (0..probabilities.len())
            .filter(|&i| probabilities[i] >= t)
            .collect(),
    };
    selected.sort_unstable();

    let text = selected
        .iter()
        .map(|&e| doc.edu_text(e))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Extraction {
        selected,
        probabilities,
        text,
    })
}

// Distinguishes the shuffle RNG stream from per-batch dropout streams.
const SHUFFLE_TAG: u64 = 0x7368_7566;

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut h = super::provider::Fnv::new();
    h.write(&seed.to_le_bytes());
    h.write(&a.to_le_bytes());
    h.write(&b.to_le_bytes());
    h.finish()
}
