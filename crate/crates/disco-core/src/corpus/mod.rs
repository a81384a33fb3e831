//! Annotation file formats and the canonical in-memory document model.
//!
//! The external pipeline tools emit three line-oriented formats that this
//! module parses into [`Document`]s and RST constituency trees:
//!
//! * `.conll` — one token per line, nine tab-separated attributes, blank
//!   line between sentences;
//! * `.merge` — `.conll` plus a tenth field, the token's 1-based EDU index;
//! * `.bracket` — one RST tree node per line,
//!   `((first, last), 'Nuclearity', 'relation')`.
//!
//! Documents also round-trip through a single-line JSON record
//! ([`serialize_jsonl`] / [`parse_jsonl`]) used by every pipeline stage.
//!
//! All parsers are pure and total: any input either parses or yields a
//! [`CorpusError`] with a line number. EDU indices are 1-based on disk
//! (matching the segmenter output) and 0-based in memory; document-wide,
//! never restarting per sentence.

mod bracket;
mod conll;
mod jsonl;
mod model;

pub use bracket::{parse_bracket, serialize_bracket, Nuclearity, RstTreeNode};
pub use conll::{parse_conll, parse_merge, serialize_conll, serialize_merge};
pub use jsonl::{parse_jsonl, parse_jsonl_versioned, serialize_jsonl};
pub use model::{Document, Token};

use alloc::string::String;
use core::fmt;

/// Errors produced by the corpus parsers and the [`Document`] constructor.
///
/// `at` fields are 1-based line numbers when the error comes from a file
/// parser and 0-based token positions when it comes from an in-memory
/// constructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// A line does not match the expected shape (field count, value domain).
    MalformedLine { line: usize, detail: String },
    /// An index field does not parse as an unsigned integer.
    NonNumericIndex { line: usize, field: &'static str },
    /// EDU indices decrease in document order (gaps are allowed).
    NonMonotoneEduIndex { at: usize },
    /// A `.bracket` line does not match the node grammar.
    MalformedBracketLine { line: usize },
    /// Two bracket spans overlap without one containing the other.
    InconsistentSpan { line: usize },
    /// A replacement index list does not cover the EDU-carrying tokens.
    LengthMismatch { expected: usize, found: usize },
    /// A JSONL record is not valid JSON or misses required fields.
    MalformedRecord { detail: String },
    /// Tokens of one EDU are interrupted by tokens of another (or none).
    FragmentedEdu { at: usize },
    /// Serializing a `.merge` file requires every token to carry an EDU index.
    MissingEduIndex { at: usize },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::MalformedLine { line, detail } => {
                write!(f, "line {line}: malformed line: {detail}")
            }
            CorpusError::NonNumericIndex { line, field } => {
                write!(
                    f,
                    "line {line}: field `{field}` is not a non-negative integer"
                )
            }
            CorpusError::NonMonotoneEduIndex { at } => {
                write!(f, "position {at}: EDU index decreases in document order")
            }
            CorpusError::MalformedBracketLine { line } => {
                write!(
                    f,
                    "line {line}: not a `((first, last), 'Nuclearity', 'relation')` node"
                )
            }
            CorpusError::InconsistentSpan { line } => {
                write!(f, "line {line}: span partially overlaps an earlier span")
            }
            CorpusError::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} EDU indices, found {found}")
            }
            CorpusError::MalformedRecord { detail } => {
                write!(f, "malformed document record: {detail}")
            }
            CorpusError::FragmentedEdu { at } => {
                write!(f, "position {at}: EDU is split by intervening tokens")
            }
            CorpusError::MissingEduIndex { at } => {
                write!(f, "position {at}: token carries no EDU index")
            }
        }
    }
}
