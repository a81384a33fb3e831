use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::model::{Document, Token};
use super::CorpusError;

const CONLL_FIELDS: usize = 9;
const MERGE_FIELDS: usize = 10;

/// Parse a `.conll` file: nine tab-separated fields per token, blank line
/// between sentences. Sentence and token indices are assigned from the
/// file structure; the index fields themselves must be numeric but their
/// values are not trusted (segmenter output is 1-based, ours is 0-based).
pub fn parse_conll(raw: &str) -> Result<Vec<Token>, CorpusError> {
    parse_lines(raw, CONLL_FIELDS)
}

/// Parse a `.merge` file: `.conll` plus a tenth field, the 1-based EDU
/// index. EDU indices are stored 0-based and must be non-decreasing in
/// document order; gaps are allowed (the segmenter may drop EDUs when a
/// better segmentation is merged in).
pub fn parse_merge(raw: &str) -> Result<Document, CorpusError> {
    let tokens = parse_lines(raw, MERGE_FIELDS)?;
    Document::new("", tokens, None)
}

fn parse_lines(raw: &str, fields: usize) -> Result<Vec<Token>, CorpusError> {
    let mut tokens = Vec::new();
    let mut sentence = 0usize;
    let mut token_in_sentence = 0usize;
    let mut sentence_open = false;
    let mut last_edu: Option<usize> = None;

    for (line_no, line) in raw.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            if sentence_open {
                sentence += 1;
                token_in_sentence = 0;
                sentence_open = false;
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != fields {
            return Err(CorpusError::MalformedLine {
                line: line_no,
                detail: format!(
                    "expected {fields} tab-separated fields, found {}",
                    cols.len()
                ),
            });
        }
        parse_index(cols[0], line_no, "sentence_index")?;
        parse_index(cols[1], line_no, "token_index")?;
        let dep_head = parse_index(cols[6], line_no, "dep_head")?;
        let edu_index = if fields == MERGE_FIELDS {
            let disk = parse_index(cols[9], line_no, "edu_index")?;
            if disk == 0 {
                return Err(CorpusError::MalformedLine {
                    line: line_no,
                    detail: "EDU indices are 1-based on disk; found 0".to_string(),
                });
            }
            let edu = disk - 1;
            if let Some(prev) = last_edu {
                if edu < prev {
                    return Err(CorpusError::NonMonotoneEduIndex { at: line_no });
                }
            }
            last_edu = Some(edu);
            Some(edu)
        } else {
            None
        };
        tokens.push(Token {
            sentence_index: sentence,
            token_index: token_in_sentence,
            surface: cols[2].to_string(),
            lemma: cols[3].to_string(),
            pos: cols[4].to_string(),
            dep_label: cols[5].to_string(),
            dep_head,
            ner: cols[7].to_string(),
            constituent: cols[8].to_string(),
            edu_index,
        });
        token_in_sentence += 1;
        sentence_open = true;
    }
    Ok(tokens)
}

fn parse_index(s: &str, line: usize, field: &'static str) -> Result<usize, CorpusError> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| CorpusError::NonNumericIndex { line, field })
}

/// Serialize tokens back to the nine-field `.conll` layout. The stored
/// 0-based sentence/token indices are written out; a blank line separates
/// sentences.
pub fn serialize_conll(tokens: &[Token]) -> String {
    serialize_lines(tokens, |_| Ok(None)).expect("conll serialization is total")
}

/// Serialize a document to the ten-field `.merge` layout; EDU indices are
/// written 1-based. Every token must carry an EDU index.
pub fn serialize_merge(doc: &Document) -> Result<String, CorpusError> {
    serialize_lines(doc.tokens(), |(pos, t)| match t.edu_index {
        Some(edu) => Ok(Some(edu + 1)),
        None => Err(CorpusError::MissingEduIndex { at: pos }),
    })
}

fn serialize_lines(
    tokens: &[Token],
    edu_field: impl Fn((usize, &Token)) -> Result<Option<usize>, CorpusError>,
) -> Result<String, CorpusError> {
    let mut out = String::new();
    let mut prev_sentence: Option<usize> = None;
    for (pos, t) in tokens.iter().enumerate() {
        if let Some(prev) = prev_sentence {
            if t.sentence_index != prev {
                out.push('\n');
            }
        }
        prev_sentence = Some(t.sentence_index);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.sentence_index,
            t.token_index,
            t.surface,
            t.lemma,
            t.pos,
            t.dep_label,
            t.dep_head,
            t.ner,
            t.constituent
        ));
        if let Some(edu) = edu_field((pos, t))? {
            out.push_str(&format!("\t{edu}"));
        }
        out.push('\n');
    }
    Ok(out)
}
