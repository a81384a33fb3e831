//! Desk-scale differentiable components on a define-by-run tape.
//!
//! The building blocks of the extraction encoder: the attentive span
//! extractor, multi-head graph attention, the stacked GNN block, the
//! classification tower, and the weighted MSE loss — every one of them
//! expressed through [`Tape`] primitives so a single reverse sweep
//! produces all gradients, verified against central finite differences
//! by [`grad_check`].

mod gradcheck;
mod layers;
mod message;
mod scalar;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, kink_margin, GradCheckReport};
pub use layers::{
    classifier_forward, gat_layer_forward, gnn_block_forward, gnn_dual_forward,
    span_extractor_forward, weighted_mse_loss, Activation, ClassifierParams, ClassifierStageParams,
    ClassifierStageVars, ClassifierVars, DropoutMode, GatLayerParams, GatOutput, GatVars,
    GnnBlockParams, GnnBlockVars, GnnStageParams, GnnStageVars, SpanAttention, SpanExtractorParams,
    SpanExtractorVars, CLASSIFIER_STAGE_DIMS, ELU_ALPHA, GAT_LEAKY_SLOPE, GNN_HEADS, GNN_HIDDEN,
    GNN_STAGES, LAYER_NORM_EPS,
};
pub use message::{
    message_passing_step, AggregateFn, GatAggregate, MeanAggregate, ReplaceUpdate, ResidualUpdate,
    SumAggregate, UpdateFn,
};
pub use scalar::Scalar;
pub use tape::{Tape, Var};
pub use tensor::Tensor;

use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NnError {
    ShapeMismatch {
        context: &'static str,
        detail: alloc::string::String,
    },
    IndexOutOfRange {
        index: usize,
        limit: usize,
    },
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    NonFiniteGradient,
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { context, detail } => {
                write!(f, "{context}: shape mismatch ({detail})")
            }
            NnError::IndexOutOfRange { index, limit } => {
                write!(f, "index {index} out of range (limit {limit})")
            }
            NnError::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            NnError::NonFiniteGradient => write!(f, "non-finite value in gradient computation"),
        }
    }
}
