use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::scalar::Scalar;
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use super::NnError;

/// Negative slope of the LeakyReLU in attention logits.
pub const GAT_LEAKY_SLOPE: f64 = 0.2;
/// ELU alpha used throughout.
pub const ELU_ALPHA: f64 = 1.0;
/// Epsilon inside the layer-norm square root.
pub const LAYER_NORM_EPS: f64 = 1e-8;

/// Activation used between classifier stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    #[default]
    Relu,
    Elu,
}

impl Activation {
    fn apply<S: Scalar>(&self, tape: &mut Tape<S>, x: Var) -> Var {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Elu => tape.elu(x, S::from_f64(ELU_ALPHA)),
        }
    }
}

/// Dropout behavior for a forward pass: inactive at inference, active
/// with a rate and RNG during training.
pub enum DropoutMode<'a, R: Rng> {
    Inactive,
    Active { rate: f64, rng: &'a mut R },
}

impl<'a, R: Rng> DropoutMode<'a, R> {
    fn apply<S: Scalar>(&mut self, tape: &mut Tape<S>, x: Var) -> Var {
        match self {
            DropoutMode::Inactive => x,
            DropoutMode::Active { rate, rng } => tape.dropout(x, *rate, *rng),
        }
    }
}

// ---------------------------------------------------------------------
// Self-attentive span extractor
// ---------------------------------------------------------------------

/// Parameters of the attentive span extractor:
/// `H = ReLU(X W1 + b1)`, `A = H W2 + b2`, `alpha = softmax(A)`,
/// `S = sum_i alpha_i X_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanExtractorParams<S> {
    pub w1: Tensor<S>,
    pub b1: Tensor<S>,
    pub w2: Tensor<S>,
    pub b2: Tensor<S>,
}

impl<S: Scalar> SpanExtractorParams<S> {
    pub fn new(dim: usize, rng: &mut impl Rng) -> Self {
        SpanExtractorParams {
            w1: Tensor::uniform_fan_in(dim, dim, dim, rng),
            b1: Tensor::zeros(1, dim),
            w2: Tensor::uniform_fan_in(dim, 1, dim, rng),
            b2: Tensor::zeros(1, 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn insert(&self, tape: &mut Tape<S>) -> SpanExtractorVars {
        SpanExtractorVars {
            w1: tape.leaf(&self.w1),
            b1: tape.leaf(&self.b1),
            w2: tape.leaf(&self.w2),
            b2: tape.leaf(&self.b2),
        }
    }

    pub fn tensors(&self) -> Vec<(String, &Tensor<S>)> {
        alloc::vec![
            (String::from("span.w1"), &self.w1),
            (String::from("span.b1"), &self.b1),
            (String::from("span.w2"), &self.w2),
            (String::from("span.b2"), &self.b2),
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<S>)> {
        alloc::vec![
            (String::from("span.w1"), &mut self.w1),
            (String::from("span.b1"), &mut self.b1),
            (String::from("span.w2"), &mut self.w2),
            (String::from("span.b2"), &mut self.b2),
        ]
    }
}

/// Tape handles for span-extractor parameters.
#[derive(Debug, Clone, Copy)]
pub struct SpanExtractorVars {
    pub w1: Var,
    pub b1: Var,
    pub w2: Var,
    pub b2: Var,
}

/// Span representation plus the attention weights over the span's tokens.
#[derive(Debug, Clone, Copy)]
pub struct SpanAttention {
    /// `1xD` attention-weighted sum of the token embeddings.
    pub span: Var,
    /// `nx1` softmax weights; they sum to 1.
    pub weights: Var,
}

/// Collapse one EDU's token embeddings (`nxD`) into a single `1xD` span
/// representation.
pub fn span_extractor_forward<S: Scalar>(
    tape: &mut Tape<S>,
    tokens: Var,
    params: &SpanExtractorVars,
) -> Result<SpanAttention, NnError> {
    let hidden = tape.matmul(tokens, params.w1)?;
    let hidden = tape.add_row(hidden, params.b1)?;
    let hidden = tape.relu(hidden);
    let scores = tape.matmul(hidden, params.w2)?;
    let scores = tape.add_row(scores, params.b2)?;
    let weights = tape.softmax(scores);
    let weights_t = tape.transpose(weights);
    let span = tape.matmul(weights_t, tokens)?;
    Ok(SpanAttention { span, weights })
}

// ---------------------------------------------------------------------
// Graph attention
// ---------------------------------------------------------------------

/// One multi-head graph attention layer in the original formulation:
/// shared linear transform, additive attention logits split into source
/// and destination halves, LeakyReLU, softmax over each node's
/// in-neighborhood (self-loop included), heads concatenated.
#[derive(Debug, Clone, PartialEq)]
pub struct GatLayerParams<S> {
    pub weight: Tensor<S>,
    pub att_src: Tensor<S>,
    pub att_dst: Tensor<S>,
    pub heads: usize,
    pub out_dim: usize,
}

impl<S: Scalar> GatLayerParams<S> {
    pub fn new(in_dim: usize, heads: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        GatLayerParams {
            weight: Tensor::uniform_fan_in(in_dim, heads * out_dim, in_dim, rng),
            att_src: Tensor::uniform_fan_in(1, heads * out_dim, out_dim, rng),
            att_dst: Tensor::uniform_fan_in(1, heads * out_dim, out_dim, rng),
            heads,
            out_dim,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn insert(&self, tape: &mut Tape<S>) -> GatVars {
        GatVars {
            weight: tape.leaf(&self.weight),
            att_src: tape.leaf(&self.att_src),
            att_dst: tape.leaf(&self.att_dst),
            heads: self.heads,
            out_dim: self.out_dim,
        }
    }

    pub fn tensors(&self, prefix: &str) -> Vec<(String, &Tensor<S>)> {
        alloc::vec![
            (alloc::format!("{prefix}.weight"), &self.weight),
            (alloc::format!("{prefix}.att_src"), &self.att_src),
            (alloc::format!("{prefix}.att_dst"), &self.att_dst),
        ]
    }

    pub fn tensors_mut(&mut self, prefix: &str) -> Vec<(String, &mut Tensor<S>)> {
        alloc::vec![
            (alloc::format!("{prefix}.weight"), &mut self.weight),
            (alloc::format!("{prefix}.att_src"), &mut self.att_src),
            (alloc::format!("{prefix}.att_dst"), &mut self.att_dst),
        ]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GatVars {
    pub weight: Var,
    pub att_src: Var,
    pub att_dst: Var,
    pub heads: usize,
    pub out_dim: usize,
}

/// Output of a GAT layer with its attention coefficients.
#[derive(Debug, Clone)]
pub struct GatOutput {
    /// `nx(heads*out_dim)` node features.
    pub output: Var,
    /// `mxheads` attention weights, one row per resolved edge.
    pub attention: Var,
    /// The resolved `(source, target)` edges: input edges plus one
    /// self-loop per node, deduplicated, sorted by `(target, source)`.
    pub edges: Vec<(usize, usize)>,
}

/// Multi-head graph attention over directed `(source, target)` edges;
/// messages flow source -> target.
pub fn gat_layer_forward<S: Scalar>(
    tape: &mut Tape<S>,
    nodes: Var,
    edges: &[(usize, usize)],
    params: &GatVars,
) -> Result<GatOutput, NnError> {
    let n = tape.shape(nodes)[0];
    for &(s, t) in edges {
        for idx in [s, t] {
            if idx >= n {
                return Err(NnError::IndexOutOfRange {
                    index: idx,
                    limit: n,
                });
            }
        }
    }
    let mut resolved: Vec<(usize, usize)> = edges.to_vec();
    resolved.extend((0..n).map(|u| (u, u)));
    resolved.sort_by_key(|&(s, t)| (t, s));
    resolved.dedup();
    let sources: Vec<usize> = resolved.iter().map(|&(s, _)| s).collect();
    let targets: Vec<usize> = resolved.iter().map(|&(_, t)| t).collect();

    let transformed = tape.matmul(nodes, params.weight)?;
    let src_scored = tape.mul_row(transformed, params.att_src)?;
    let src_scores = tape.row_block_sum(src_scored, params.out_dim)?;
    let dst_scored = tape.mul_row(transformed, params.att_dst)?;
    let dst_scores = tape.row_block_sum(dst_scored, params.out_dim)?;

    let edge_src = tape.gather_rows(src_scores, &sources)?;
    let edge_dst = tape.gather_rows(dst_scores, &targets)?;
    let logits = tape.add(edge_src, edge_dst)?;
    let logits = tape.leaky_relu(logits, S::from_f64(GAT_LEAKY_SLOPE));
    let attention = tape.segment_softmax(logits, &targets)?;

    let messages = tape.gather_rows(transformed, &sources)?;
    let weighted = tape.scale_col_blocks(messages, attention, params.out_dim)?;
    let output = tape.scatter_add_rows(weighted, &targets, n)?;

    Ok(GatOutput {
        output,
        attention,
        edges: resolved,
    })
}

// ---------------------------------------------------------------------
// GNN block: three stages of parallel linear + GAT, summed, ELU
// ---------------------------------------------------------------------

/// One stage: a linear branch and a GAT branch whose outputs are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnStageParams<S> {
    pub linear_w: Tensor<S>,
    pub linear_b: Tensor<S>,
    pub gat: GatLayerParams<S>,
}

/// A stacked GNN block: `ELU(Linear(x) + GAT(x))`, three times. Kept
/// per graph kind; RST and coref blocks never share parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnBlockParams<S> {
    pub stages: Vec<GnnStageParams<S>>,
    pub heads: usize,
    pub hidden: usize,
}

/// Default attention head count.
pub const GNN_HEADS: usize = 4;
/// Default per-head hidden width.
pub const GNN_HIDDEN: usize = 256;
/// Stages in a block.
pub const GNN_STAGES: usize = 3;

impl<S: Scalar> GnnBlockParams<S> {
    pub fn new(in_dim: usize, heads: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let width = heads * hidden;
        let mut stages = Vec::with_capacity(GNN_STAGES);
        let mut stage_in = in_dim;
        for _ in 0..GNN_STAGES {
            stages.push(GnnStageParams {
                linear_w: Tensor::uniform_fan_in(stage_in, width, stage_in, rng),
                linear_b: Tensor::zeros(1, width),
                gat: GatLayerParams::new(stage_in, heads, hidden, rng),
            });
            stage_in = width;
        }
        GnnBlockParams {
            stages,
            heads,
            hidden,
        }
    }

    pub fn with_defaults(in_dim: usize, rng: &mut impl Rng) -> Self {
        GnnBlockParams::new(in_dim, GNN_HEADS, GNN_HIDDEN, rng)
    }

    pub fn out_dim(&self) -> usize {
        self.heads * self.hidden
    }

    pub fn insert(&self, tape: &mut Tape<S>) -> GnnBlockVars {
        GnnBlockVars {
            stages: self
                .stages
                .iter()
                .map(|s| GnnStageVars {
                    linear_w: tape.leaf(&s.linear_w),
                    linear_b: tape.leaf(&s.linear_b),
                    gat: s.gat.insert(tape),
                })
                .collect(),
        }
    }

    pub fn tensors(&self, prefix: &str) -> Vec<(String, &Tensor<S>)> {
        let mut out = Vec::new();
        for (i, s) in self.stages.iter().enumerate() {
            out.push((alloc::format!("{prefix}.stage{i}.linear_w"), &s.linear_w));
            out.push((alloc::format!("{prefix}.stage{i}.linear_b"), &s.linear_b));
            out.extend(s.gat.tensors(&alloc::format!("{prefix}.stage{i}.gat")));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GnnBlockVars {
    pub stages: Vec<GnnStageVars>,
}

#[derive(Debug, Clone, Copy)]
pub struct GnnStageVars {
    pub linear_w: Var,
    pub linear_b: Var,
    pub gat: GatVars,
}

/// Run one graph's GNN block over merged `nxD` node features.
pub fn gnn_block_forward<S: Scalar>(
    tape: &mut Tape<S>,
    nodes: Var,
    edges: &[(usize, usize)],
    block: &GnnBlockVars,
) -> Result<Var, NnError> {
    let mut x = nodes;
    for stage in &block.stages {
        let linear = tape.matmul(x, stage.linear_w)?;
        let linear = tape.add_row(linear, stage.linear_b)?;
        let gat = gat_layer_forward(tape, x, edges, &stage.gat)?.output;
        let summed = tape.add(linear, gat)?;
        x = tape.elu(summed, S::from_f64(ELU_ALPHA));
    }
    Ok(x)
}

/// Run unshared RST and coref blocks and concatenate their outputs.
pub fn gnn_dual_forward<S: Scalar>(
    tape: &mut Tape<S>,
    nodes: Var,
    rst_edges: &[(usize, usize)],
    coref_edges: &[(usize, usize)],
    rst_block: &GnnBlockVars,
    coref_block: &GnnBlockVars,
) -> Result<Var, NnError> {
    let rst_out = gnn_block_forward(tape, nodes, rst_edges, rst_block)?;
    let coref_out = gnn_block_forward(tape, nodes, coref_edges, coref_block)?;
    tape.concat_cols(&[rst_out, coref_out])
}

// ---------------------------------------------------------------------
// Classification tower
// ---------------------------------------------------------------------

/// One classifier stage: linear, then (except on the last stage)
/// activation, dropout, and layer norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierStageParams<S> {
    pub weight: Tensor<S>,
    pub bias: Tensor<S>,
    pub gamma: Option<Tensor<S>>,
    pub beta: Option<Tensor<S>>,
}

/// The classification tower. Hidden stages run
/// linear -> activation -> dropout -> layer norm; the final stage is a
/// plain linear to one logit followed by a sigmoid (an activation or
/// norm on a single logit would pin the output to a constant).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams<S> {
    pub stages: Vec<ClassifierStageParams<S>>,
    pub activation: Activation,
}

/// Default stage output widths; the first is this artifact's choice,
/// the tail is fixed by the architecture.
pub const CLASSIFIER_STAGE_DIMS: [usize; 5] = [1024, 1024, 1024, 64, 1];

impl<S: Scalar> ClassifierParams<S> {
    /// Build a tower with the given stage output dims (last must be 1).
    pub fn new(
        input_dim: usize,
        stage_dims: &[usize],
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(
            stage_dims.last() == Some(&1),
            "classifier must end in a single logit"
        );
        let mut stages = Vec::with_capacity(stage_dims.len());
        let mut in_dim = input_dim;
        for (i, &out_dim) in stage_dims.iter().enumerate() {
            let last = i + 1 == stage_dims.len();
            stages.push(ClassifierStageParams {
                weight: Tensor::uniform_fan_in(in_dim, out_dim, in_dim, rng),
                bias: Tensor::zeros(1, out_dim),
                gamma: (!last).then(|| Tensor::from_fn(1, out_dim, |_, _| S::one())),
                beta: (!last).then(|| Tensor::zeros(1, out_dim)),
            });
            in_dim = out_dim;
        }
        ClassifierParams { stages, activation }
    }

    pub fn with_defaults(input_dim: usize, rng: &mut impl Rng) -> Self {
        ClassifierParams::new(input_dim, &CLASSIFIER_STAGE_DIMS, Activation::Relu, rng)
    }

    pub fn input_dim(&self) -> usize {
        self.stages[0].weight.rows()
    }

    pub fn stage_output_dims(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.weight.cols()).collect()
    }

    pub fn insert(&self, tape: &mut Tape<S>) -> ClassifierVars {
        ClassifierVars {
            stages: self
                .stages
                .iter()
                .map(|s| ClassifierStageVars {
                    weight: tape.leaf(&s.weight),
                    bias: tape.leaf(&s.bias),
                    gamma: s.gamma.as_ref().map(|g| tape.leaf(g)),
                    beta: s.beta.as_ref().map(|b| tape.leaf(b)),
                })
                .collect(),
            activation: self.activation,
        }
    }

    pub fn tensors(&self, prefix: &str) -> Vec<(String, &Tensor<S>)> {
        let mut out = Vec::new();
        for (i, s) in self.stages.iter().enumerate() {
            out.push((alloc::format!("{prefix}.stage{i}.weight"), &s.weight));
            out.push((alloc::format!("{prefix}.stage{i}.bias"), &s.bias));
            if let Some(g) = &s.gamma {
                out.push((alloc::format!("{prefix}.stage{i}.gamma"), g));
            }
            if let Some(b) = &s.beta {
                out.push((alloc::format!("{prefix}.stage{i}.beta"), b));
            }
        }
        out
    }

    pub fn tensors_mut(&mut self, prefix: &str) -> Vec<(String, &mut Tensor<S>)> {
        let mut out = Vec::new();
        for (i, s) in self.stages.iter_mut().enumerate() {
            out.push((alloc::format!("{prefix}.stage{i}.weight"), &mut s.weight));
            out.push((alloc::format!("{prefix}.stage{i}.bias"), &mut s.bias));
            if let Some(g) = &mut s.gamma {
                out.push((alloc::format!("{prefix}.stage{i}.gamma"), g));
            }
            if let Some(b) = &mut s.beta {
                out.push((alloc::format!("{prefix}.stage{i}.beta"), b));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ClassifierVars {
    pub stages: Vec<ClassifierStageVars>,
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifierStageVars {
    pub weight: Var,
    pub bias: Var,
    pub gamma: Option<Var>,
    pub beta: Option<Var>,
}

/// Per-EDU importance probabilities (`nx1`, in (0, 1)) from `nxK`
/// feature rows.
pub fn classifier_forward<S: Scalar, R: Rng>(
    tape: &mut Tape<S>,
    features: Var,
    params: &ClassifierVars,
    dropout: &mut DropoutMode<'_, R>,
) -> Result<Var, NnError> {
    let eps = S::from_f64(LAYER_NORM_EPS);
    let mut x = features;
    let last = params.stages.len() - 1;
    for (i, stage) in params.stages.iter().enumerate() {
        x = tape.matmul(x, stage.weight)?;
        x = tape.add_row(x, stage.bias)?;
        if i == last {
            break;
        }
        x = params.activation.apply(tape, x);
        x = dropout.apply(tape, x);
        x = tape.layer_norm(x, eps);
        if let (Some(gamma), Some(beta)) = (stage.gamma, stage.beta) {
            x = tape.mul_row(x, gamma)?;
            x = tape.add_row(x, beta)?;
        }
    }
    Ok(tape.sigmoid(x))
}

// ---------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------

/// Mean of `w_i * (prob_i - label_i)^2` with `w_i = pos_weight` on
/// positive labels and 1 otherwise.
pub fn weighted_mse_loss<S: Scalar>(
    tape: &mut Tape<S>,
    probs: Var,
    labels: &[bool],
    pos_weight: f64,
) -> Result<Var, NnError> {
    let [r, c] = tape.shape(probs);
    if c != 1 || r != labels.len() {
        return Err(NnError::LengthMismatch {
            expected: labels.len(),
            found: r * c,
        });
    }
    let targets: Vec<S> = labels
        .iter()
        .map(|&y| if y { S::one() } else { S::zero() })
        .collect();
    let weights: Vec<S> = labels
        .iter()
        .map(|&y| if y { S::from_f64(pos_weight) } else { S::one() })
        .collect();
    let targets = tape.leaf_from(r, 1, targets)?;
    let weights = tape.leaf_from(r, 1, weights)?;
    let diff = tape.sub(probs, targets)?;
    let sq = tape.mul(diff, diff)?;
    let weighted = tape.mul(weights, sq)?;
    Ok(tape.mean(weighted))
}
