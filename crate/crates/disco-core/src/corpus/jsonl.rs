use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::model::{Document, Token};
use super::CorpusError;
use crate::FORMAT_VERSION;

// On-disk record shapes. Field names are part of the stable interchange
// format (see docs/formats.md); the in-memory types stay decoupled so the
// constructor invariants are re-checked on every parse.

#[derive(Serialize, Deserialize)]
struct TokenRecord {
    sentence_index: usize,
    token_index: usize,
    surface: String,
    lemma: String,
    pos: String,
    dep_label: String,
    dep_head: usize,
    ner: String,
    constituent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edu_index: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct DocumentRecord {
    version: String,
    doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_summary: Option<String>,
    tokens: Vec<TokenRecord>,
}

/// Serialize a document as one JSON line (no trailing newline).
pub fn serialize_jsonl(doc: &Document) -> String {
    let record = DocumentRecord {
        version: FORMAT_VERSION.to_string(),
        doc_id: doc.doc_id().to_string(),
        reference_summary: doc.reference_summary().map(ToString::to_string),
        tokens: doc
            .tokens()
            .iter()
            .map(|t| TokenRecord {
                sentence_index: t.sentence_index,
                token_index: t.token_index,
                surface: t.surface.clone(),
                lemma: t.lemma.clone(),
                pos: t.pos.clone(),
                dep_label: t.dep_label.clone(),
                dep_head: t.dep_head,
                ner: t.ner.clone(),
                constituent: t.constituent.clone(),
                edu_index: t.edu_index,
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("document records serialize infallibly")
}

/// Parse one JSONL document record, ignoring its version tag.
pub fn parse_jsonl(line: &str) -> Result<Document, CorpusError> {
    parse_jsonl_versioned(line).map(|(doc, _)| doc)
}

/// Parse one JSONL document record and surface its version tag so callers
/// can enforce cross-stage compatibility.
pub fn parse_jsonl_versioned(line: &str) -> Result<(Document, String), CorpusError> {
    let record: DocumentRecord =
        serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
            detail: e.to_string(),
        })?;
    let tokens = record
        .tokens
        .into_iter()
        .map(|t| Token {
            sentence_index: t.sentence_index,
            token_index: t.token_index,
            surface: t.surface,
            lemma: t.lemma,
            pos: t.pos,
            dep_label: t.dep_label,
            dep_head: t.dep_head,
            ner: t.ner,
            constituent: t.constituent,
            edu_index: t.edu_index,
        })
        .collect();
    let doc = Document::new(&record.doc_id, tokens, record.reference_summary)?;
    Ok((doc, record.version))
}
