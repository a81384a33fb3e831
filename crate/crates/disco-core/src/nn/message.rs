//! Generic message passing: `m = AGGREGATE({h_v: v in N(u)})` followed by
//! `h_u' = UPDATE(h_u, m)`, with both functions pluggable and
//! differentiable through the tape. The aggregate also receives the
//! center state so attention-style aggregators can score neighbors
//! against it.

use alloc::vec::Vec;

use super::layers::{GatVars, GAT_LEAKY_SLOPE};
use super::scalar::Scalar;
use super::tape::{Tape, Var};
use super::NnError;

pub trait AggregateFn<S: Scalar> {
    fn aggregate(&self, tape: &mut Tape<S>, center: Var, neighbors: &[Var])
        -> Result<Var, NnError>;
}

pub trait UpdateFn<S: Scalar> {
    fn update(&self, tape: &mut Tape<S>, state: Var, message: Var) -> Result<Var, NnError>;
}

/// Element-wise sum of neighbor states; zeros when isolated.
pub struct SumAggregate;

impl<S: Scalar> AggregateFn<S> for SumAggregate {
    fn aggregate(
        &self,
        tape: &mut Tape<S>,
        center: Var,
        neighbors: &[Var],
    ) -> Result<Var, NnError> {
        let [r, c] = tape.shape(center);
        if neighbors.is_empty() {
            return Ok(tape.zeros(r, c));
        }
        let stacked = tape.concat_rows(neighbors)?;
        Ok(tape.sum_rows(stacked))
    }
}

/// Element-wise mean of neighbor states; zeros when isolated.
pub struct MeanAggregate;

impl<S: Scalar> AggregateFn<S> for MeanAggregate {
    fn aggregate(
        &self,
        tape: &mut Tape<S>,
        center: Var,
        neighbors: &[Var],
    ) -> Result<Var, NnError> {
        let [r, c] = tape.shape(center);
        if neighbors.is_empty() {
            return Ok(tape.zeros(r, c));
        }
        let stacked = tape.concat_rows(neighbors)?;
        let sums = tape.sum_rows(stacked);
        Ok(tape.scale(sums, S::from_f64(1.0 / neighbors.len() as f64)))
    }
}

/// `UPDATE(h, m) = h + m`; leaves the state unchanged on a zero message.
pub struct ResidualUpdate;

impl<S: Scalar> UpdateFn<S> for ResidualUpdate {
    fn update(&self, tape: &mut Tape<S>, state: Var, message: Var) -> Result<Var, NnError> {
        tape.add(state, message)
    }
}

/// `UPDATE(h, m) = m`.
pub struct ReplaceUpdate;

impl<S: Scalar> UpdateFn<S> for ReplaceUpdate {
    fn update(&self, _tape: &mut Tape<S>, _state: Var, message: Var) -> Result<Var, NnError> {
        Ok(message)
    }
}

/// Graph attention as an aggregate: score each neighbor against the
/// center, softmax per head, return the weighted head-concatenated sum.
/// Paired with [`ReplaceUpdate`] and self-inclusive neighborhoods this
/// reproduces the batched GAT layer node for node.
pub struct GatAggregate {
    pub params: GatVars,
}

impl<S: Scalar> AggregateFn<S> for GatAggregate {
    fn aggregate(
        &self,
        tape: &mut Tape<S>,
        center: Var,
        neighbors: &[Var],
    ) -> Result<Var, NnError> {
        let p = &self.params;
        if neighbors.is_empty() {
            let width = tape.shape(p.weight)[1];
            return Ok(tape.zeros(1, width));
        }
        let stacked = tape.concat_rows(neighbors)?;
        let h_neighbors = tape.matmul(stacked, p.weight)?;
        let h_center = tape.matmul(center, p.weight)?;

        let src_scored = tape.mul_row(h_neighbors, p.att_src)?;
        let src_scores = tape.row_block_sum(src_scored, p.out_dim)?;
        let dst_scored = tape.mul_row(h_center, p.att_dst)?;
        let dst_scores = tape.row_block_sum(dst_scored, p.out_dim)?;

        let logits = tape.add_row(src_scores, dst_scores)?;
        let logits = tape.leaky_relu(logits, S::from_f64(GAT_LEAKY_SLOPE));
        let segments = alloc::vec![0usize; neighbors.len()];
        let attention = tape.segment_softmax(logits, &segments)?;

        let weighted = tape.scale_col_blocks(h_neighbors, attention, p.out_dim)?;
        Ok(tape.sum_rows(weighted))
    }
}

/// One synchronous message-passing step over row-vector node states.
pub fn message_passing_step<S: Scalar>(
    tape: &mut Tape<S>,
    states: &[Var],
    neighborhoods: &[Vec<usize>],
    aggregate: &dyn AggregateFn<S>,
    update: &dyn UpdateFn<S>,
) -> Result<Vec<Var>, NnError> {
    if states.len() != neighborhoods.len() {
        return Err(NnError::LengthMismatch {
            expected: states.len(),
            found: neighborhoods.len(),
        });
    }
    for hood in neighborhoods {
        for &v in hood {
            if v >= states.len() {
                return Err(NnError::IndexOutOfRange {
                    index: v,
                    limit: states.len(),
                });
            }
        }
    }
    let mut next = Vec::with_capacity(states.len());
    for (u, hood) in neighborhoods.iter().enumerate() {
        let neighbors: Vec<Var> = hood.iter().map(|&v| states[v]).collect();
        let message = aggregate.aggregate(tape, states[u], &neighbors)?;
        next.push(update.update(tape, states[u], message)?);
    }
    Ok(next)
}
