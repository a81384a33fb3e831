use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::CorpusError;

/// One token with the nine linguistic attributes produced by the
/// annotation pipeline, plus the EDU index added at segmentation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 0-based sentence position within the document.
    pub sentence_index: usize,
    /// 0-based token position within its sentence.
    pub token_index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub dep_label: String,
    /// 1-based dependency head within the sentence; 0 marks the sentence root.
    pub dep_head: usize,
    pub ner: String,
    /// Partial constituent parse fragment, preserved verbatim.
    pub constituent: String,
    /// 0-based EDU index; `None` until segmentation has run.
    pub edu_index: Option<usize>,
}

impl Token {
    /// Minimal token for tests and synthetic corpora: everything except
    /// the surface form is a placeholder.
    pub fn word(sentence_index: usize, token_index: usize, surface: &str) -> Self {
        Token {
            sentence_index,
            token_index,
            surface: surface.to_string(),
            lemma: surface.to_string(),
            pos: "X".to_string(),
            dep_label: "dep".to_string(),
            dep_head: 0,
            ner: "O".to_string(),
            constituent: "*".to_string(),
            edu_index: None,
        }
    }

    /// Same as [`Token::word`] with an EDU index attached.
    pub fn edu_word(sentence_index: usize, token_index: usize, surface: &str, edu: usize) -> Self {
        let mut t = Token::word(sentence_index, token_index, surface);
        t.edu_index = Some(edu);
        t
    }
}

/// A document: tokens in document order, an optional reference summary,
/// and the derived EDU spans.
///
/// Immutable after construction; the constructor enforces the model
/// invariants (contiguous token numbering, non-decreasing EDU indices,
/// unfragmented EDUs) and derives `edu_spans`, the half-open token
/// ranges that partition exactly the EDU-carrying tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    doc_id: String,
    tokens: Vec<Token>,
    reference_summary: Option<String>,
    edu_spans: Vec<(usize, usize)>,
}

impl Document {
    pub fn new(
        doc_id: &str,
        tokens: Vec<Token>,
        reference_summary: Option<String>,
    ) -> Result<Self, CorpusError> {
        validate_numbering(&tokens)?;
        let edu_spans = derive_spans(&tokens)?;
        Ok(Document {
            doc_id: doc_id.to_string(),
            tokens,
            reference_summary,
            edu_spans,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn with_doc_id(mut self, doc_id: &str) -> Self {
        self.doc_id = doc_id.to_string();
        self
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn reference_summary(&self) -> Option<&str> {
        self.reference_summary.as_deref()
    }

    pub fn with_reference_summary(mut self, summary: Option<String>) -> Self {
        self.reference_summary = summary;
        self
    }

    /// Half-open `(start_token, end_token)` ranges, one per EDU, in order.
    pub fn edu_spans(&self) -> &[(usize, usize)] {
        &self.edu_spans
    }

    pub fn num_edus(&self) -> usize {
        self.edu_spans.len()
    }

    /// Tokens of the EDU with ordinal `edu` (position in `edu_spans`).
    pub fn edu_tokens(&self, edu: usize) -> Option<&[Token]> {
        let &(start, end) = self.edu_spans.get(edu)?;
        Some(&self.tokens[start..end])
    }

    /// Surface forms of one EDU.
    pub fn edu_surfaces(&self, edu: usize) -> Vec<&str> {
        self.edu_tokens(edu)
            .map(|ts| ts.iter().map(|t| t.surface.as_str()).collect())
            .unwrap_or_default()
    }

    /// Surfaces of one EDU joined with single spaces.
    pub fn edu_text(&self, edu: usize) -> String {
        self.edu_surfaces(edu).join(" ")
    }

    /// Lowercased surfaces of one EDU, the token form used for ROUGE
    /// scoring and oracle labeling.
    pub fn edu_lower_tokens(&self, edu: usize) -> Vec<String> {
        self.edu_surfaces(edu)
            .iter()
            .map(|s| s.to_lowercase())
            .collect()
    }

    /// Replace the EDU indices of the EDU-carrying tokens (one entry per
    /// carrier, in document order) and re-derive the spans.
    ///
    /// This is how a re-segmentation pass (a better EDU segmenter run on
    /// the same tokens) is folded back into an existing document.
    pub fn update_edu_indices(&self, new_indices: &[usize]) -> Result<Document, CorpusError> {
        let carriers: Vec<usize> = self
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.edu_index.is_some())
            .map(|(i, _)| i)
            .collect();
        if carriers.len() != new_indices.len() {
            return Err(CorpusError::LengthMismatch {
                expected: carriers.len(),
                found: new_indices.len(),
            });
        }
        let mut tokens = self.tokens.clone();
        for (&slot, &edu) in carriers.iter().zip(new_indices) {
            tokens[slot].edu_index = Some(edu);
        }
        Document::new(&self.doc_id, tokens, self.reference_summary.clone())
    }
}

fn validate_numbering(tokens: &[Token]) -> Result<(), CorpusError> {
    let mut prev: Option<(usize, usize)> = None;
    for (pos, t) in tokens.iter().enumerate() {
        let ok = match prev {
            None => t.sentence_index == 0 && t.token_index == 0,
            Some((s, k)) => {
                (t.sentence_index == s && t.token_index == k + 1)
                    || (t.sentence_index == s + 1 && t.token_index == 0)
            }
        };
        if !ok {
            return Err(CorpusError::MalformedRecord {
                detail: alloc::format!(
                    "token {pos}: sentence/token numbering ({}, {}) is not contiguous",
                    t.sentence_index,
                    t.token_index
                ),
            });
        }
        prev = Some((t.sentence_index, t.token_index));
    }
    Ok(())
}

fn derive_spans(tokens: &[Token]) -> Result<Vec<(usize, usize)>, CorpusError> {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<(usize, usize, usize)> = None; // (edu, start, end)
    for (pos, t) in tokens.iter().enumerate() {
        let Some(edu) = t.edu_index else { continue };
        match open {
            Some((cur, start, end)) if cur == edu => {
                if end != pos {
                    return Err(CorpusError::FragmentedEdu { at: pos });
                }
                open = Some((cur, start, pos + 1));
            }
            Some((cur, start, end)) => {
                if edu < cur {
                    return Err(CorpusError::NonMonotoneEduIndex { at: pos });
                }
                spans.push((start, end));
                open = Some((edu, pos, pos + 1));
            }
            None => open = Some((edu, pos, pos + 1)),
        }
    }
    if let Some((_, start, end)) = open {
        spans.push((start, end));
    }
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn doc(tokens: Vec<Token>) -> Document {
        Document::new("d", tokens, None).unwrap()
    }

    #[test]
    fn spans_group_consecutive_equal_indices() {
        // EDU indices [0, 0, 1, 1] -> spans [(0, 2), (2, 4)]
        let d = doc(vec![
            Token::edu_word(0, 0, "a", 0),
            Token::edu_word(0, 1, "b", 0),
            Token::edu_word(0, 2, "c", 1),
            Token::edu_word(0, 3, "d", 1),
        ]);
        assert_eq!(d.edu_spans(), &[(0, 2), (2, 4)]);
        assert_eq!(d.num_edus(), 2);
    }

    #[test]
    fn gaps_in_edu_numbering_are_allowed() {
        let d = doc(vec![
            Token::edu_word(0, 0, "a", 0),
            Token::edu_word(0, 1, "b", 2),
        ]);
        assert_eq!(d.edu_spans(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn decreasing_edu_indices_are_rejected() {
        let r = Document::new(
            "d",
            vec![Token::edu_word(0, 0, "a", 1), Token::edu_word(0, 1, "b", 0)],
            None,
        );
        assert_eq!(r, Err(CorpusError::NonMonotoneEduIndex { at: 1 }));
    }

    #[test]
    fn fragmented_edu_is_rejected() {
        let r = Document::new(
            "d",
            vec![
                Token::edu_word(0, 0, "a", 0),
                Token::word(0, 1, "b"),
                Token::edu_word(0, 2, "c", 0),
            ],
            None,
        );
        assert_eq!(r, Err(CorpusError::FragmentedEdu { at: 2 }));
    }

    #[test]
    fn unindexed_tokens_between_edus_are_fine() {
        let d = doc(vec![
            Token::edu_word(0, 0, "a", 0),
            Token::word(0, 1, "b"),
            Token::edu_word(0, 2, "c", 1),
        ]);
        assert_eq!(d.edu_spans(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn update_identity_is_a_noop() {
        let d = doc(vec![
            Token::edu_word(0, 0, "a", 0),
            Token::edu_word(0, 1, "b", 1),
        ]);
        assert_eq!(d.update_edu_indices(&[0, 1]).unwrap(), d);
    }

    #[test]
    fn update_can_merge_edus() {
        // Indices [0, 1] -> [0, 0] merges two one-token EDUs into one span.
        let d = doc(vec![
            Token::edu_word(0, 0, "a", 0),
            Token::edu_word(0, 1, "b", 1),
        ]);
        let merged = d.update_edu_indices(&[0, 0]).unwrap();
        assert_eq!(merged.edu_spans(), &[(0, 2)]);
    }

    #[test]
    fn update_resegmentation_fixture() {
        // 5 tokens in 3 EDUs re-segmented to 2 EDUs.
        let d = doc(vec![
            Token::edu_word(0, 0, "a", 0),
            Token::edu_word(0, 1, "b", 0),
            Token::edu_word(0, 2, "c", 1),
            Token::edu_word(0, 3, "d", 2),
            Token::edu_word(0, 4, "e", 2),
        ]);
        assert_eq!(d.num_edus(), 3);
        let r = d.update_edu_indices(&[0, 0, 0, 1, 1]).unwrap();
        assert_eq!(r.edu_spans(), &[(0, 3), (3, 5)]);
    }

    #[test]
    fn update_length_mismatch() {
        let d = doc(vec![Token::edu_word(0, 0, "a", 0)]);
        assert_eq!(
            d.update_edu_indices(&[0, 1]),
            Err(CorpusError::LengthMismatch {
                expected: 1,
                found: 2
            })
        );
    }
}
