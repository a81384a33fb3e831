//! The 256-dimensional one-hot graph-context vector per EDU.
//!
//! Packed layout, fixed and versioned with the formats:
//!
//! ```text
//! [ 0 ..  43)  incoming RST edge types (presence, not counts)
//! [43 ..  86)  outgoing RST edge types
//! [86 ..  87)  coref share: incident coref edges / total coref edges
//! [87 .. 256)  one-hot EDU position, clamped to the last slot
//! ```
//!
//! 43 + 43 + 1 + 169 = 256 = 2^8. Coref share sums to 2.0 over a
//! document with any coref edges (each undirected edge touches two EDUs).

use alloc::vec::Vec;
use core::fmt;

use crate::graph::{CorefGraph, RstGraph, RST_RELATION_COUNT};

/// Binary slots per RST direction (one per relation type).
pub const RST_SLOTS: usize = RST_RELATION_COUNT;
/// Real-valued coref-share slots.
pub const COREF_SLOTS: usize = 1;
/// One-hot EDU position slots; later EDUs clamp to the last slot.
pub const POSITION_SLOTS: usize = 169;
/// Total packed dimension.
pub const FEATURE_DIM: usize = 2 * RST_SLOTS + COREF_SLOTS + POSITION_SLOTS;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureError {
    IndexOutOfRange { index: usize, limit: usize },
    GraphSizeMismatch { rst: usize, coref: usize },
}

impl fmt::Display for FeatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureError::IndexOutOfRange { index, limit } => {
                write!(f, "EDU index {index} out of range (num_edus = {limit})")
            }
            FeatureError::GraphSizeMismatch { rst, coref } => {
                write!(f, "RST graph has {rst} EDUs but coref graph has {coref}")
            }
        }
    }
}

/// One EDU's graph context, kept in typed sections; [`pack`] produces the
/// dense 256-vector in the documented layout.
///
/// [`pack`]: GraphFeatureVector::pack
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatureVector {
    rst_in: [bool; RST_SLOTS],
    rst_out: [bool; RST_SLOTS],
    coref_share: f64,
    position_slot: usize,
}

impl GraphFeatureVector {
    pub fn rst_in(&self) -> &[bool; RST_SLOTS] {
        &self.rst_in
    }

    pub fn rst_out(&self) -> &[bool; RST_SLOTS] {
        &self.rst_out
    }

    pub fn coref_share(&self) -> f64 {
        self.coref_share
    }

    pub fn position_slot(&self) -> usize {
        self.position_slot
    }

    pub fn pack(&self) -> Vec<f32> {
        let mut out = alloc::vec![0.0f32; FEATURE_DIM];
        for (i, &b) in self.rst_in.iter().enumerate() {
            out[i] = b as u8 as f32;
        }
        for (i, &b) in self.rst_out.iter().enumerate() {
            out[RST_SLOTS + i] = b as u8 as f32;
        }
        out[2 * RST_SLOTS] = self.coref_share as f32;
        out[2 * RST_SLOTS + COREF_SLOTS + self.position_slot] = 1.0;
        out
    }
}

/// Incident coref edges of one EDU divided by the document's total coref
/// edges; 0.0 when the document has none.
pub fn coref_share(edu: usize, coref: &CorefGraph) -> Result<f64, FeatureError> {
    let degree = coref
        .degree(edu)
        .map_err(|_| FeatureError::IndexOutOfRange {
            index: edu,
            limit: coref.num_edus(),
        })?;
    let total = coref.total_edges();
    if total == 0 {
        Ok(0.0)
    } else {
        Ok(degree as f64 / total as f64)
    }
}

/// Encode one EDU's graph context. The coref graph is optional (absent
/// for corpora without coreference annotation; the slot stays 0).
pub fn encode_edu(
    edu: usize,
    rst: &RstGraph,
    coref: Option<&CorefGraph>,
) -> Result<GraphFeatureVector, FeatureError> {
    if edu >= rst.num_edus() {
        return Err(FeatureError::IndexOutOfRange {
            index: edu,
            limit: rst.num_edus(),
        });
    }
    let mut rst_in = [false; RST_SLOTS];
    let mut rst_out = [false; RST_SLOTS];
    for e in rst.edges() {
        if e.target == edu {
            rst_in[e.relation] = true;
        }
        if e.source == edu {
            rst_out[e.relation] = true;
        }
    }
    let share = match coref {
        Some(c) => coref_share(edu, c)?,
        None => 0.0,
    };
    Ok(GraphFeatureVector {
        rst_in,
        rst_out,
        coref_share: share,
        position_slot: edu.min(POSITION_SLOTS - 1),
    })
}

/// Dense row-major feature matrix, one packed row per EDU.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    num_edus: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn num_edus(&self) -> usize {
        self.num_edus
    }

    pub fn dim(&self) -> usize {
        FEATURE_DIM
    }

    pub fn row(&self, edu: usize) -> &[f32] {
        &self.data[edu * FEATURE_DIM..(edu + 1) * FEATURE_DIM]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn from_rows(rows: Vec<Vec<f32>>) -> Option<Self> {
        let num_edus = rows.len();
        let mut data = Vec::with_capacity(num_edus * FEATURE_DIM);
        for row in rows {
            if row.len() != FEATURE_DIM {
                return None;
            }
            data.extend_from_slice(&row);
        }
        Some(FeatureMatrix { num_edus, data })
    }
}

/// Encode every EDU of a document; row i equals `encode_edu(i, ..)`.
pub fn encode_document(
    rst: &RstGraph,
    coref: Option<&CorefGraph>,
) -> Result<FeatureMatrix, FeatureError> {
    if let Some(c) = coref {
        if c.num_edus() != rst.num_edus() {
            return Err(FeatureError::GraphSizeMismatch {
                rst: rst.num_edus(),
                coref: c.num_edus(),
            });
        }
    }
    let mut data = Vec::with_capacity(rst.num_edus() * FEATURE_DIM);
    for edu in 0..rst.num_edus() {
        data.extend_from_slice(&encode_edu(edu, rst, coref)?.pack());
    }
    Ok(FeatureMatrix {
        num_edus: rst.num_edus(),
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_coref_graph, RstEdge, RstGraph};
    use alloc::vec;

    #[test]
    fn layout_constants() {
        assert_eq!(FEATURE_DIM, 256);
        assert_eq!(2 * RST_SLOTS + COREF_SLOTS + POSITION_SLOTS, 256);
    }

    #[test]
    fn isolated_edu_has_one_hot_position_only() {
        let rst = RstGraph::empty(3);
        let v = encode_edu(0, &rst, None).unwrap();
        let packed = v.pack();
        assert_eq!(packed.len(), FEATURE_DIM);
        let nonzero: Vec<usize> = packed
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero, vec![2 * RST_SLOTS + COREF_SLOTS]);
        assert_eq!(v.coref_share(), 0.0);
    }

    #[test]
    fn rst_edges_set_exactly_their_slots() {
        // EDU 1: one incoming elaboration, one outgoing comparison ->
        // exactly 3 nonzeros (2 RST + position).
        let rst = RstGraph::empty(3);
        let vocab = rst.vocab();
        let elaboration = vocab.id("elaboration").unwrap();
        let comparison = vocab.id("comparison").unwrap();
        let rst = RstGraph::from_edges(
            3,
            vec![
                RstEdge {
                    source: 0,
                    target: 1,
                    relation: elaboration,
                },
                RstEdge {
                    source: 1,
                    target: 2,
                    relation: comparison,
                },
            ],
        )
        .unwrap();
        let v = encode_edu(1, &rst, None).unwrap();
        assert!(v.rst_in()[elaboration]);
        assert!(v.rst_out()[comparison]);
        let nonzeros = v.pack().iter().filter(|x| **x != 0.0).count();
        assert_eq!(nonzeros, 3);
    }

    #[test]
    fn duplicate_parallel_edges_do_not_change_the_encoding() {
        let rst = RstGraph::empty(2);
        let rel = rst.vocab().id("contrast").unwrap();
        let once = RstGraph::from_edges(
            2,
            vec![RstEdge {
                source: 0,
                target: 1,
                relation: rel,
            }],
        )
        .unwrap();
        let twice = RstGraph::from_edges(
            2,
            vec![
                RstEdge {
                    source: 0,
                    target: 1,
                    relation: rel,
                },
                RstEdge {
                    source: 0,
                    target: 1,
                    relation: rel,
                },
            ],
        )
        .unwrap();
        assert_eq!(
            encode_edu(1, &once, None).unwrap(),
            encode_edu(1, &twice, None).unwrap()
        );
    }

    #[test]
    fn coref_share_worked_example() {
        // 10 coref edges in the document, 2 incident to EDU 0 -> 0.2.
        let clusters = vec![
            vec![0, 1, 2],    // pairs: 01 02 12
            vec![3, 4, 5, 6], // pairs: 34 35 36 45 46 56
            vec![7, 8],       // pair:  78
        ];
        let coref = build_coref_graph(9, &clusters).unwrap();
        assert_eq!(coref.total_edges(), 10);
        assert_eq!(coref.degree(0).unwrap(), 2);
        assert_eq!(coref_share(0, &coref).unwrap(), 0.2);
    }

    #[test]
    fn star_center_owns_every_edge() {
        let coref =
            build_coref_graph(5, &[vec![2, 0], vec![2, 1], vec![2, 3], vec![2, 4]]).unwrap();
        assert_eq!(coref_share(2, &coref).unwrap(), 1.0);
    }

    #[test]
    fn empty_coref_graph_shares_zero() {
        let coref = CorefGraph::empty(4);
        assert_eq!(coref_share(1, &coref).unwrap(), 0.0);
    }

    #[test]
    fn document_matrix_matches_per_edu_encoding() {
        let rst = RstGraph::empty(1);
        let m = encode_document(&rst, None).unwrap();
        assert_eq!(m.num_edus(), 1);
        assert_eq!(m.dim(), 256);
        assert_eq!(
            m.row(0),
            encode_edu(0, &rst, None).unwrap().pack().as_slice()
        );
    }

    #[test]
    fn handshake_identity_over_the_coref_slot() {
        let coref = build_coref_graph(6, &[vec![0, 1, 2], vec![3, 4]]).unwrap();
        let rst = RstGraph::empty(6);
        let m = encode_document(&rst, Some(&coref)).unwrap();
        let share_sum: f64 = (0..6).map(|i| m.row(i)[2 * RST_SLOTS] as f64).sum();
        assert!((share_sum - 2.0).abs() < 1e-6);
    }

    #[test]
    fn random_20_edu_document_rows_match_per_edu_encoding() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let n = 20;
        let edges: Vec<RstEdge> = (0..30)
            .map(|_| RstEdge {
                source: rng.random_range(0..n),
                target: rng.random_range(0..n),
                relation: rng.random_range(0..43),
            })
            .collect();
        let rst = RstGraph::from_edges(n, edges).unwrap();
        let clusters: Vec<Vec<usize>> = (0..4)
            .map(|_| (0..3).map(|_| rng.random_range(0..n)).collect())
            .collect();
        let coref = build_coref_graph(n, &clusters).unwrap();
        let matrix = encode_document(&rst, Some(&coref)).unwrap();
        assert_eq!(matrix.num_edus(), n);
        for edu in 0..n {
            let row = encode_edu(edu, &rst, Some(&coref)).unwrap().pack();
            assert_eq!(matrix.row(edu), row.as_slice(), "row {edu}");
        }
    }

    #[test]
    fn position_clamps_to_the_last_slot() {
        let rst = RstGraph::empty(200);
        let v = encode_edu(199, &rst, None).unwrap();
        assert_eq!(v.position_slot(), POSITION_SLOTS - 1);
        let v = encode_edu(168, &rst, None).unwrap();
        assert_eq!(v.position_slot(), 168);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let rst = RstGraph::empty(3);
        let coref = CorefGraph::empty(2);
        assert_eq!(
            encode_document(&rst, Some(&coref)),
            Err(FeatureError::GraphSizeMismatch { rst: 3, coref: 2 })
        );
        assert!(matches!(
            encode_edu(5, &rst, None),
            Err(FeatureError::IndexOutOfRange { .. })
        ));
    }
}
