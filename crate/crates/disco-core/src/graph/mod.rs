//! EDU-level discourse graphs.
//!
//! [`tree_to_graph`] converts an RST constituency tree into a dependency
//! graph over EDUs by head percolation: the head of a subtree is the head
//! of its leftmost nucleus child, and every other child's head receives
//! an edge from the subtree head, labeled with that child's relation.
//! A well-formed n-leaf tree therefore yields exactly n−1 edges, and the
//! head EDU of the whole tree has no incoming edge (it IS the root; no
//! synthetic root edge is added).
//!
//! [`CorefGraph`] is the undirected companion structure connecting every
//! pair of EDUs that share a mention cluster.

mod relations;

pub use relations::{RelationVocab, RST_RELATION_COUNT, UNKNOWN_RELATION};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Nuclearity, RstTreeNode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// A tree span references EDUs outside `[1, num_edus]`.
    SpanOutOfRange {
        first: usize,
        last: usize,
        num_edus: usize,
    },
    /// The node list cannot form a tree (duplicate or straddling spans).
    InconsistentTree { detail: String },
    /// An EDU index is outside the graph.
    IndexOutOfRange { index: usize, limit: usize },
    /// A relation id is outside the vocabulary.
    RelationOutOfRange { relation: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::SpanOutOfRange {
                first,
                last,
                num_edus,
            } => write!(
                f,
                "span ({first}, {last}) escapes the document's {num_edus} EDUs"
            ),
            GraphError::InconsistentTree { detail } => {
                write!(f, "inconsistent tree: {detail}")
            }
            GraphError::IndexOutOfRange { index, limit } => {
                write!(f, "EDU index {index} out of range (num_edus = {limit})")
            }
            GraphError::RelationOutOfRange { relation } => {
                write!(f, "relation id {relation} outside the vocabulary")
            }
        }
    }
}

/// One typed dependency edge: `source` governs `target` with `relation`
/// (an id into the graph's [`RelationVocab`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RstEdge {
    pub source: usize,
    pub target: usize,
    pub relation: usize,
}

/// Typed directed dependency graph over EDU ordinals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RstGraph {
    num_edus: usize,
    edges: Vec<RstEdge>,
    vocab: RelationVocab,
}

impl RstGraph {
    pub fn empty(num_edus: usize) -> Self {
        RstGraph {
            num_edus,
            edges: Vec::new(),
            vocab: RelationVocab::v1(),
        }
    }

    /// Build a graph from explicit edges, validating indices and ids.
    pub fn from_edges(num_edus: usize, edges: Vec<RstEdge>) -> Result<Self, GraphError> {
        for e in &edges {
            for idx in [e.source, e.target] {
                if idx >= num_edus {
                    return Err(GraphError::IndexOutOfRange {
                        index: idx,
                        limit: num_edus,
                    });
                }
            }
            if e.relation >= RST_RELATION_COUNT {
                return Err(GraphError::RelationOutOfRange {
                    relation: e.relation,
                });
            }
        }
        Ok(RstGraph {
            num_edus,
            edges,
            vocab: RelationVocab::v1(),
        })
    }

    pub fn num_edus(&self) -> usize {
        self.num_edus
    }

    pub fn edges(&self) -> &[RstEdge] {
        &self.edges
    }

    pub fn vocab(&self) -> RelationVocab {
        self.vocab
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `(in_degree, out_degree)` of one EDU, counted over stored edges.
    pub fn degree_profile(&self, edu: usize) -> Result<(usize, usize), GraphError> {
        if edu >= self.num_edus {
            return Err(GraphError::IndexOutOfRange {
                index: edu,
                limit: self.num_edus,
            });
        }
        let incoming = self.edges.iter().filter(|e| e.target == edu).count();
        let outgoing = self.edges.iter().filter(|e| e.source == edu).count();
        Ok((incoming, outgoing))
    }
}

/// Untyped bidirectional coreference graph, stored as normalized
/// unordered pairs (`a < b`, no self-loops).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorefGraph {
    num_edus: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CorefGraph {
    pub fn empty(num_edus: usize) -> Self {
        CorefGraph {
            num_edus,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_pairs(
        num_edus: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut edges = BTreeSet::new();
        for (a, b) in pairs {
            for idx in [a, b] {
                if idx >= num_edus {
                    return Err(GraphError::IndexOutOfRange {
                        index: idx,
                        limit: num_edus,
                    });
                }
            }
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        Ok(CorefGraph { num_edus, edges })
    }

    pub fn num_edus(&self) -> usize {
        self.num_edus
    }

    pub fn total_edges(&self) -> usize {
        self.edges.len()
    }

    /// Pairs in normalized `(min, max)` order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Number of edges incident to one EDU.
    pub fn degree(&self, edu: usize) -> Result<usize, GraphError> {
        if edu >= self.num_edus {
            return Err(GraphError::IndexOutOfRange {
                index: edu,
                limit: self.num_edus,
            });
        }
        Ok(self
            .edges
            .iter()
            .filter(|(a, b)| *a == edu || *b == edu)
            .count())
    }

    /// `(in_degree, out_degree)`; equal by construction for an
    /// undirected graph.
    pub fn degree_profile(&self, edu: usize) -> Result<(usize, usize), GraphError> {
        let d = self.degree(edu)?;
        Ok((d, d))
    }
}

/// Connect every pair of distinct EDUs co-occurring in a mention cluster.
pub fn build_coref_graph(
    num_edus: usize,
    mention_clusters: &[Vec<usize>],
) -> Result<CorefGraph, GraphError> {
    let mut pairs = Vec::new();
    for cluster in mention_clusters {
        for (i, &a) in cluster.iter().enumerate() {
            for &b in &cluster[i + 1..] {
                pairs.push((a, b));
            }
        }
    }
    CorefGraph::from_pairs(num_edus, pairs)
}

/// Convert an RST constituency tree to a dependency graph; unknown
/// relation names are mapped to the reserved slot silently.
pub fn tree_to_graph(tree: &[RstTreeNode], num_edus: usize) -> Result<RstGraph, GraphError> {
    tree_to_graph_with_warnings(tree, num_edus).map(|(g, _)| g)
}

/// As [`tree_to_graph`], additionally returning the relation names that
/// fell through to the unknown slot (for caller-side logging).
pub fn tree_to_graph_with_warnings(
    tree: &[RstTreeNode],
    num_edus: usize,
) -> Result<(RstGraph, Vec<String>), GraphError> {
    let vocab = RelationVocab::v1();
    if tree.is_empty() {
        return Ok((RstGraph::empty(num_edus), Vec::new()));
    }
    for node in tree {
        let (first, last) = node.span;
        if first == 0 || first > last || last > num_edus {
            return Err(GraphError::SpanOutOfRange {
                first,
                last,
                num_edus,
            });
        }
    }
    for (i, a) in tree.iter().enumerate() {
        for b in tree.iter().skip(i + 1) {
            if a.span == b.span {
                return Err(GraphError::InconsistentTree {
                    detail: format!("duplicate span ({}, {})", a.span.0, a.span.1),
                });
            }
            let overlap = a.span.0.max(b.span.0) <= a.span.1.min(b.span.1);
            if overlap && !a.contains(b) && !b.contains(a) {
                return Err(GraphError::InconsistentTree {
                    detail: format!(
                        "span ({}, {}) straddles ({}, {})",
                        b.span.0, b.span.1, a.span.0, a.span.1
                    ),
                });
            }
        }
    }

    // Sort by (first asc, last desc) so each node appears right after all
    // of its ancestors; a stack then recovers the containment forest.
    let mut order: Vec<usize> = (0..tree.len()).collect();
    order.sort_by_key(|&i| (tree[i].span.0, usize::MAX - tree[i].span.1));

    let mut children: Vec<Vec<usize>> = alloc::vec![Vec::new(); tree.len()];
    let mut roots: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for &i in &order {
        while let Some(&top) = stack.last() {
            if tree[top].contains(&tree[i]) {
                break;
            }
            stack.pop();
        }
        match stack.last() {
            Some(&parent) => children[parent].push(i),
            None => roots.push(i),
        }
        stack.push(i);
    }

    let mut edges: Vec<RstEdge> = Vec::new();
    let mut unknown: Vec<String> = Vec::new();
    let root_heads: Vec<usize> = {
        // Several top-level spans (partial annotation) hang off a virtual
        // root; the leftmost nucleus among them is the document head.
        let mut heads = Vec::new();
        for &r in &roots {
            heads.push(percolate(
                tree,
                &children,
                r,
                &vocab,
                &mut edges,
                &mut unknown,
            ));
        }
        heads
    };
    if roots.len() > 1 {
        let head_slot = roots
            .iter()
            .position(|&r| tree[r].nuclearity != Nuclearity::Satellite)
            .unwrap_or(0);
        let head = root_heads[head_slot];
        for (slot, &r) in roots.iter().enumerate() {
            if slot == head_slot {
                continue;
            }
            let (relation, known) = vocab.id_or_unknown(&tree[r].relation);
            if !known {
                unknown.push(tree[r].relation.clone());
            }
            edges.push(RstEdge {
                source: head,
                target: root_heads[slot],
                relation,
            });
        }
    }

    edges.sort_by_key(|e| (e.source, e.target, e.relation));
    Ok((RstGraph::from_edges(num_edus, edges)?, unknown))
}

/// Head of the subtree at `node`, emitting one edge per non-head child.
fn percolate(
    tree: &[RstTreeNode],
    children: &[Vec<usize>],
    node: usize,
    vocab: &RelationVocab,
    edges: &mut Vec<RstEdge>,
    unknown: &mut Vec<String>,
) -> usize {
    let kids = &children[node];
    if kids.is_empty() {
        // Leaf, or an internal span whose children are missing from a
        // partial annotation; its first EDU stands in as the head.
        return tree[node].span.0 - 1;
    }
    let mut kid_order: Vec<usize> = kids.clone();
    kid_order.sort_by_key(|&k| tree[k].span.0);
    let head_slot = kid_order
        .iter()
        .position(|&k| tree[k].nuclearity != Nuclearity::Satellite)
        .unwrap_or(0);
    let mut heads = Vec::with_capacity(kid_order.len());
    for &k in &kid_order {
        heads.push(percolate(tree, children, k, vocab, edges, unknown));
    }
    let head = heads[head_slot];
    for (slot, &k) in kid_order.iter().enumerate() {
        if slot == head_slot {
            continue;
        }
        let (relation, known) = vocab.id_or_unknown(&tree[k].relation);
        if !known {
            unknown.push(tree[k].relation.clone());
        }
        edges.push(RstEdge {
            source: head,
            target: heads[slot],
            relation,
        });
    }
    head
}
