//! Greedy ROUGE-maximizing oracle labels for EDUs.
//!
//! [`greedy_select`] repeatedly adds the EDU whose inclusion most
//! increases the score of the document-order concatenation against the
//! reference summary, stopping at the budget or when no EDU yields a
//! strictly positive gain. [`brute_force_select`] is the exhaustive
//! cross-check on small instances.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::Document;
use crate::graph::RstGraph;
use crate::rouge::{rouge_l, rouge_n, tokenize};

use serde::{Deserialize, Serialize};

/// Which ROUGE combination the selection maximizes. All variants use F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "r1")]
    R1,
    #[serde(rename = "r2")]
    R2,
    #[serde(rename = "rl")]
    Rl,
    /// Mean of ROUGE-1 F1 and ROUGE-2 F1 (the default).
    #[default]
    #[serde(rename = "mean-r1r2")]
    MeanR1R2,
}

impl MetricKind {
    pub fn score<T: Ord>(&self, candidate: &[T], reference: &[T]) -> f64 {
        match self {
            MetricKind::R1 => rouge_n(candidate, reference, 1).expect("n >= 1").f1,
            MetricKind::R2 => rouge_n(candidate, reference, 2).expect("n >= 1").f1,
            MetricKind::Rl => rouge_l(candidate, reference).f1,
            MetricKind::MeanR1R2 => {
                let r1 = rouge_n(candidate, reference, 1).expect("n >= 1").f1;
                let r2 = rouge_n(candidate, reference, 2).expect("n >= 1").f1;
                (r1 + r2) / 2.0
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::R1 => "r1",
            MetricKind::R2 => "r2",
            MetricKind::Rl => "rl",
            MetricKind::MeanR1R2 => "mean-r1r2",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r1" => Ok(MetricKind::R1),
            "r2" => Ok(MetricKind::R2),
            "rl" => Ok(MetricKind::Rl),
            "mean-r1r2" => Ok(MetricKind::MeanR1R2),
            other => Err(alloc::format!(
                "unknown metric `{other}` (expected r1, r2, rl, or mean-r1r2)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    EmptyReference,
    /// Exhaustive search is capped at 15 EDUs and an effective budget of 5.
    TooLargeForExhaustive {
        edus: usize,
        budget: usize,
    },
    MissingReference,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::EmptyReference => write!(f, "reference summary has no tokens"),
            OracleError::TooLargeForExhaustive { edus, budget } => write!(
                f,
                "exhaustive search capped at 15 EDUs / budget 5, got {edus} EDUs, budget {budget}"
            ),
            OracleError::MissingReference => write!(f, "document has no reference summary"),
        }
    }
}

/// Binary importance labels for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleLabels {
    /// One flag per EDU, in document order.
    pub labels: Vec<bool>,
    /// Selected EDUs in pick order (ascending for the exhaustive search).
    pub selected_order: Vec<usize>,
    /// Metric of the selected document-order concatenation, recomputed.
    pub final_score: f64,
}

impl OracleLabels {
    pub fn none(num_edus: usize) -> Self {
        OracleLabels {
            labels: alloc::vec![false; num_edus],
            selected_order: Vec::new(),
            final_score: 0.0,
        }
    }

    pub fn num_selected(&self) -> usize {
        self.selected_order.len()
    }
}

fn concat_selected<'a>(edus: &'a [Vec<String>], selected: &[bool]) -> Vec<&'a String> {
    let mut out = Vec::new();
    for (edu, &keep) in edus.iter().zip(selected) {
        if keep {
            out.extend(edu.iter());
        }
    }
    out
}

/// Greedy forward selection. Ties go to the smallest EDU index; EDUs are
/// always scored as their document-order concatenation, not pick order.
pub fn greedy_select(
    edus: &[Vec<String>],
    reference: &[String],
    budget: usize,
    metric: MetricKind,
) -> Result<OracleLabels, OracleError> {
    if reference.is_empty() {
        return Err(OracleError::EmptyReference);
    }
    let reference: Vec<&String> = reference.iter().collect();
    let mut labels = alloc::vec![false; edus.len()];
    let mut selected_order = Vec::new();
    let mut current = 0.0f64;

    while selected_order.len() < budget {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..edus.len() {
            if labels[i] {
                continue;
            }
            labels[i] = true;
            let candidate = concat_selected(edus, &labels);
            let score = metric.score(&candidate, &reference);
            labels[i] = false;
            if score > current && best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        match best {
            Some((i, score)) => {
                labels[i] = true;
                selected_order.push(i);
                current = score;
            }
            None => break,
        }
    }

    Ok(OracleLabels {
        labels,
        selected_order,
        final_score: current,
    })
}

/// Globally optimal subset of size ≤ budget by enumeration. Ties are
/// broken by the lexicographically smallest index set, which also means
/// the empty set wins whenever nothing scores above zero.
pub fn brute_force_select(
    edus: &[Vec<String>],
    reference: &[String],
    budget: usize,
    metric: MetricKind,
) -> Result<OracleLabels, OracleError> {
    if reference.is_empty() {
        return Err(OracleError::EmptyReference);
    }
    let effective = budget.min(edus.len());
    if edus.len() > 15 || effective > 5 {
        return Err(OracleError::TooLargeForExhaustive {
            edus: edus.len(),
            budget,
        });
    }
    let reference: Vec<&String> = reference.iter().collect();

    let mut best_mask = 0u32;
    let mut best_score = 0.0f64;
    let mut best_indices: Vec<usize> = Vec::new();
    for mask in 1u32..(1u32 << edus.len()) {
        if mask.count_ones() as usize > effective {
            continue;
        }
        let labels: Vec<bool> = (0..edus.len()).map(|i| mask & (1 << i) != 0).collect();
        let candidate = concat_selected(edus, &labels);
        let score = metric.score(&candidate, &reference);
        let indices: Vec<usize> = (0..edus.len()).filter(|i| labels[*i]).collect();
        let better =
            score > best_score || (score == best_score && best_mask != 0 && indices < best_indices);
        if better && score > 0.0 {
            best_mask = mask;
            best_score = score;
            best_indices = indices;
        }
    }

    let labels: Vec<bool> = (0..edus.len()).map(|i| best_mask & (1 << i) != 0).collect();
    Ok(OracleLabels {
        labels,
        selected_order: best_indices,
        final_score: best_score,
    })
}

/// Corpus-level statistics accumulated while labeling (the processed-
/// dataset summary table: averages, empty-graph and empty-label counts).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorpusStats {
    pub total_records: usize,
    /// Documents that actually received labels.
    pub labeled: usize,
    /// Documents skipped for a missing or token-free reference summary.
    pub skipped_missing_reference: usize,
    /// Mean EDU count over all records.
    pub average_edus: f64,
    /// Mean whitespace-word count of reference summaries, over documents
    /// that have one.
    pub average_summary_words: f64,
    /// Records whose RST graph is absent or has no edges.
    pub empty_rst_graphs: usize,
    /// Labeled documents whose oracle selected nothing.
    pub empty_oracle_labels: usize,
    /// Labeled documents with both an empty RST graph and empty labels.
    pub both_empty: usize,
}

/// Labels for one document, keyed for corpus-level output.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDocument {
    pub doc_id: String,
    pub labels: OracleLabels,
}

/// Label a corpus and accumulate the statistics table. Documents without
/// a usable reference summary are skipped and counted; output order
/// follows input order.
pub fn label_corpus<'a, I>(
    docs: I,
    budget: usize,
    metric: MetricKind,
) -> (Vec<LabeledDocument>, CorpusStats)
where
    I: IntoIterator<Item = (&'a Document, Option<&'a RstGraph>)>,
{
    let mut out = Vec::new();
    let mut stats = CorpusStats::default();
    let mut edu_total = 0usize;
    let mut summary_words_total = 0usize;
    let mut summarized = 0usize;

    for (doc, rst) in docs {
        stats.total_records += 1;
        edu_total += doc.num_edus();
        let rst_empty = rst.is_none_or(|g| g.is_empty());
        if rst_empty {
            stats.empty_rst_graphs += 1;
        }
        if let Some(summary) = doc.reference_summary() {
            summarized += 1;
            summary_words_total += summary.split_whitespace().count();
        }

        let reference = doc.reference_summary().map(tokenize).unwrap_or_default();
        if reference.is_empty() {
            stats.skipped_missing_reference += 1;
            continue;
        }
        let edus: Vec<Vec<String>> = (0..doc.num_edus())
            .map(|i| doc.edu_lower_tokens(i))
            .collect();
        let labels =
            greedy_select(&edus, &reference, budget, metric).expect("reference checked non-empty");
        stats.labeled += 1;
        if labels.num_selected() == 0 {
            stats.empty_oracle_labels += 1;
            if rst_empty {
                stats.both_empty += 1;
            }
        }
        out.push(LabeledDocument {
            doc_id: doc.doc_id().to_string(),
            labels,
        });
    }

    if stats.total_records > 0 {
        stats.average_edus = edu_total as f64 / stats.total_records as f64;
    }
    if summarized > 0 {
        stats.average_summary_words = summary_words_total as f64 / summarized as f64;
    }
    (out, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use alloc::vec;

    fn edu(words: &str) -> Vec<String> {
        words.split_whitespace().map(ToString::to_string).collect()
    }

    fn reference(words: &str) -> Vec<String> {
        edu(words)
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let edus = [edu("a b"), edu("c d")];
        let r = greedy_select(&edus, &reference("a b"), 0, MetricKind::MeanR1R2).unwrap();
        assert_eq!(r.labels, vec![false, false]);
        assert!(r.selected_order.is_empty());
        assert_eq!(r.final_score, 0.0);
    }

    #[test]
    fn verbatim_edu_is_the_unique_pick() {
        let edus = [edu("x y"), edu("p q"), edu("the exact summary"), edu("z w")];
        let r = greedy_select(
            &edus,
            &reference("the exact summary"),
            1,
            MetricKind::MeanR1R2,
        )
        .unwrap();
        assert_eq!(r.selected_order, vec![2]);
        assert_eq!(r.labels, vec![false, false, true, false]);
        assert_eq!(r.final_score, 1.0);
    }

    #[test]
    fn stops_when_no_gain_is_positive() {
        // Second pick would only dilute precision: greedy stops early.
        let edus = [edu("the summary"), edu("junk junk junk junk junk junk")];
        let r = greedy_select(&edus, &reference("the summary"), 2, MetricKind::R1).unwrap();
        assert_eq!(r.selected_order, vec![0]);
        assert_eq!(r.final_score, 1.0);
    }

    #[test]
    fn empty_reference_is_an_error() {
        let edus = [edu("a")];
        assert_eq!(
            greedy_select(&edus, &[], 1, MetricKind::R1),
            Err(OracleError::EmptyReference)
        );
    }

    #[test]
    fn gain_monotonicity_along_the_pick_sequence() {
        let edus = [
            edu("alpha beta"),
            edu("gamma delta"),
            edu("epsilon zeta"),
            edu("unrelated words here"),
        ];
        let refr = reference("alpha beta gamma delta epsilon zeta");
        let r = greedy_select(&edus, &refr, 4, MetricKind::MeanR1R2).unwrap();
        // Rescore each prefix of the pick sequence; scores must strictly
        // increase (that is the stopping rule).
        let mut labels = vec![false; edus.len()];
        let mut prev = 0.0;
        for &pick in &r.selected_order {
            labels[pick] = true;
            let cand = concat_selected(&edus, &labels);
            let refs: Vec<&String> = refr.iter().collect();
            let score = MetricKind::MeanR1R2.score(&cand, &refs);
            assert!(score > prev);
            prev = score;
        }
        assert_eq!(prev, r.final_score);
    }

    #[test]
    fn metric_kinds_parse_and_score() {
        assert_eq!("r1".parse::<MetricKind>().unwrap(), MetricKind::R1);
        assert_eq!("r2".parse::<MetricKind>().unwrap(), MetricKind::R2);
        assert_eq!("rl".parse::<MetricKind>().unwrap(), MetricKind::Rl);
        assert_eq!(
            "mean-r1r2".parse::<MetricKind>().unwrap(),
            MetricKind::MeanR1R2
        );
        assert!("rouge-w".parse::<MetricKind>().is_err());

        // "a b c d" vs "a c d b": R-1 F1 = 1, LCS = 3 so R-L F1 = 3/4,
        // bigram overlap {c d} of 3 each so R-2 F1 = 1/3.
        let cand = edu("a b c d");
        let refr = reference("a c d b");
        assert_eq!(MetricKind::R1.score(&cand, &refr), 1.0);
        assert!((MetricKind::Rl.score(&cand, &refr) - 0.75).abs() < 1e-12);
        assert!((MetricKind::R2.score(&cand, &refr) - 1.0 / 3.0).abs() < 1e-12);
        let mean = MetricKind::MeanR1R2.score(&cand, &refr);
        assert!((mean - (1.0 + 1.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_under_rouge_l_prefers_ordered_overlap() {
        // Both EDUs share the reference vocabulary, but only one keeps
        // its order; ROUGE-L must pick the ordered one.
        let edus = [edu("c b a"), edu("a b c")];
        let r = greedy_select(&edus, &reference("a b c"), 1, MetricKind::Rl).unwrap();
        assert_eq!(r.selected_order, vec![1]);
        assert_eq!(r.final_score, 1.0);
    }

    #[test]
    fn brute_force_guard_rails() {
        let edus: Vec<Vec<String>> = (0..16).map(|_| edu("a")).collect();
        assert!(matches!(
            brute_force_select(&edus, &reference("a"), 2, MetricKind::R1),
            Err(OracleError::TooLargeForExhaustive { .. })
        ));
        let edus: Vec<Vec<String>> = (0..10).map(|_| edu("a")).collect();
        assert!(matches!(
            brute_force_select(&edus, &reference("a"), 6, MetricKind::R1),
            Err(OracleError::TooLargeForExhaustive { .. })
        ));
        // Budget above the EDU count is fine when few EDUs exist.
        let edus = [edu("a"), edu("b")];
        assert!(brute_force_select(&edus, &reference("a"), 10, MetricKind::R1).is_ok());
    }

    #[test]
    fn single_edu_selected_iff_it_scores() {
        let edus = [edu("summary words")];
        let hit =
            brute_force_select(&edus, &reference("summary words"), 1, MetricKind::R1).unwrap();
        assert_eq!(hit.labels, vec![true]);

        let miss =
            brute_force_select(&edus, &reference("different things"), 1, MetricKind::R1).unwrap();
        assert_eq!(miss.labels, vec![false]);
        assert_eq!(miss.final_score, 0.0);
    }

    #[test]
    fn brute_force_dominates_greedy() {
        // Deterministic pseudo-random instances; exhaustive is optimal.
        let vocab = ["ax", "by", "cz", "dw", "ev", "fu", "gt", "hs"];
        let mut state = 9u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..30 {
            let edus: Vec<Vec<String>> = (0..8)
                .map(|_| {
                    (0..(1 + next() % 3))
                        .map(|_| vocab[next() % vocab.len()].to_string())
                        .collect()
                })
                .collect();
            let refr: Vec<String> = (0..4)
                .map(|_| vocab[next() % vocab.len()].to_string())
                .collect();
            let g = greedy_select(&edus, &refr, 3, MetricKind::MeanR1R2).unwrap();
            let b = brute_force_select(&edus, &refr, 3, MetricKind::MeanR1R2).unwrap();
            assert!(
                b.final_score >= g.final_score,
                "exhaustive {} < greedy {}",
                b.final_score,
                g.final_score
            );
        }
    }

    fn doc_with(tokens: &[(&str, usize)], summary: Option<&str>) -> Document {
        let toks: Vec<Token> = tokens
            .iter()
            .enumerate()
            .map(|(i, (w, e))| Token::edu_word(0, i, w, *e))
            .collect();
        Document::new("d", toks, summary.map(ToString::to_string)).unwrap()
    }

    #[test]
    fn corpus_with_no_positive_gain_counts_empty_labels() {
        // The reference shares no vocabulary with the document, so the
        // oracle selects nothing: one empty label set.
        let doc = doc_with(&[("aa", 0), ("bb", 1)], Some("zz yy"));
        let (labeled, stats) = label_corpus([(&doc, None)], 2, MetricKind::MeanR1R2);
        assert_eq!(labeled.len(), 1);
        assert_eq!(labeled[0].labels.num_selected(), 0);
        assert_eq!(stats.empty_oracle_labels, 1);
        assert_eq!(stats.empty_rst_graphs, 1);
        assert_eq!(stats.both_empty, 1);
    }

    #[test]
    fn empty_corpus_zeroes_the_stats() {
        let (labeled, stats) = label_corpus([], 2, MetricKind::MeanR1R2);
        assert!(labeled.is_empty());
        assert_eq!(stats, CorpusStats::default());
    }

    #[test]
    fn missing_references_are_skipped_and_counted() {
        let with = doc_with(&[("aa", 0)], Some("aa"));
        let without = doc_with(&[("bb", 0)], None);
        let (labeled, stats) = label_corpus([(&with, None), (&without, None)], 1, MetricKind::R1);
        assert_eq!(labeled.len(), 1);
        assert_eq!(stats.total_records, 2);
        assert_eq!(stats.labeled, 1);
        assert_eq!(stats.skipped_missing_reference, 1);
    }

    #[test]
    fn averages_match_an_independent_recount() {
        // 20 synthetic docs: doc i has (i % 4) + 1 EDUs and a summary of
        // (i % 3) + 1 words. Expected averages computed independently.
        let mut docs = Vec::new();
        for i in 0..20usize {
            let n_edus = i % 4 + 1;
            let tokens: Vec<(String, usize)> = (0..n_edus)
                .map(|e| (alloc::format!("w{i}e{e}"), e))
                .collect();
            let summary = vec!["s"; i % 3 + 1].join(" ");
            let toks: Vec<Token> = tokens
                .iter()
                .enumerate()
                .map(|(k, (w, e))| Token::edu_word(0, k, w, *e))
                .collect();
            docs.push(Document::new(&alloc::format!("d{i}"), toks, Some(summary)).unwrap());
        }
        let items: Vec<(&Document, Option<&RstGraph>)> = docs.iter().map(|d| (d, None)).collect();
        let (_, stats) = label_corpus(items, 2, MetricKind::R1);

        let expected_edus: usize = (0..20).map(|i| i % 4 + 1).sum();
        let expected_words: usize = (0..20).map(|i| i % 3 + 1).sum();
        assert_eq!(stats.total_records, 20);
        assert!((stats.average_edus - expected_edus as f64 / 20.0).abs() < 1e-12);
        assert!((stats.average_summary_words - expected_words as f64 / 20.0).abs() < 1e-12);
    }
}
