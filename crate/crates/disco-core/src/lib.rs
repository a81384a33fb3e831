//! Core library for discourse-aware extractive summarization.
//!
//! Everything in this crate operates on in-memory data and is `no_std`
//! compatible (an allocator is required). File IO, the command-line
//! front end, and on-disk binary formats live in the companion
//! `disco-cli` crate.
//!
//! The pipeline, stage by stage:
//!
//! 1. [`corpus`] — parse `.conll` / `.merge` / `.bracket` annotation
//!    files into [`corpus::Document`]s and RST constituency trees.
//! 2. [`graph`] — convert RST trees into EDU-level dependency graphs
//!    and build coreference graphs from mention clusters.
//! 3. [`oracle`] — greedy ROUGE-maximizing selection of EDUs producing
//!    binary importance labels, with an exhaustive-search cross-check.
//! 4. [`features`] — the 256-dimensional one-hot graph-context vector
//!    per EDU.
//! 5. [`nn`] — a small reverse-mode tape, the attentive span extractor,
//!    graph attention layers, the classification tower, and a
//!    finite-difference gradient checker.
//! 6. [`train`] — a two-phase training loop over a pluggable embedding
//!    provider, plus inference-time EDU extraction.
//! 7. [`rouge`] / [`bootstrap`] — ROUGE-1/2/L, selection P/R/F1, novel
//!    n-gram proportions, and percentile-bootstrap confidence intervals.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bootstrap;
pub mod corpus;
pub mod features;
pub mod graph;
pub mod nn;
pub mod oracle;
pub mod rouge;
pub mod train;

/// Version tag stamped into every serialized artifact.
///
/// Pipeline stages refuse inputs whose records carry a different tag.
pub const FORMAT_VERSION: &str = "1";
