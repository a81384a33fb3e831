//! ROUGE-1/2/L, selection precision/recall/F1, and novel n-gram
//! proportions.
//!
//! Scoring convention: metrics operate on caller-supplied token slices
//! and never normalize. The canonical normalization for this toolkit is
//! [`tokenize`] — lowercased, punctuation retained as single-character
//! tokens, no stemming, no stopword removal — so golden numbers are
//! stable and reproducible.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    /// n-gram order must be at least 1.
    InvalidN,
    /// Bootstrap needs at least one per-document score.
    EmptySample,
    /// Bootstrap needs at least one replicate.
    InvalidReplicates,
    /// Confidence must lie strictly between 0 and 1.
    InvalidConfidence,
    LengthMismatch {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::InvalidN => write!(f, "n-gram order must be >= 1"),
            MetricError::EmptySample => write!(f, "empty score sample"),
            MetricError::InvalidReplicates => write!(f, "bootstrap needs >= 1 replicate"),
            MetricError::InvalidConfidence => write!(f, "confidence must be in (0, 1)"),
            MetricError::LengthMismatch { expected, found } => {
                write!(f, "label vectors differ in length: {expected} vs {found}")
            }
        }
    }
}

/// Precision/recall/F1 triple; `f1` is 0 whenever `precision + recall`
/// is 0, otherwise the harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn zero() -> Self {
        RougeScore {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        }
    }

    fn new(precision: f64, recall: f64) -> Self {
        RougeScore {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Lowercase a text into scoring tokens: alphanumeric runs become one
/// token each, every other non-whitespace character becomes its own
/// single-character token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            word.extend(ch.to_lowercase());
        } else {
            if !word.is_empty() {
                out.push(core::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                let mut punct = String::new();
                punct.push(ch);
                out.push(punct);
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// The multiset of n-grams of a token sequence, keyed by the underlying
/// token windows. Sequences shorter than `n` yield an empty multiset.
pub fn ngrams<T: Ord>(tokens: &[T], n: usize) -> Result<BTreeMap<&[T], usize>, MetricError> {
    if n == 0 {
        return Err(MetricError::InvalidN);
    }
    let mut counts: BTreeMap<&[T], usize> = BTreeMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// ROUGE-N: clipped n-gram overlap. Recall divides by the reference's
/// n-gram count, precision by the candidate's; empty denominators give
/// zeros rather than NaN.
pub fn rouge_n<T: Ord>(
    candidate: &[T],
    reference: &[T],
    n: usize,
) -> Result<RougeScore, MetricError> {
    let cand = ngrams(candidate, n)?;
    let refr = ngrams(reference, n)?;
    let cand_total: usize = cand.values().sum();
    let ref_total: usize = refr.values().sum();
    let overlap: usize = cand
        .iter()
        .map(|(gram, c)| refr.get(gram).map_or(0, |r| (*c).min(*r)))
        .sum();
    Ok(RougeScore::new(
        ratio(overlap, cand_total),
        ratio(overlap, ref_total),
    ))
}

/// ROUGE-L over the whole sequences: longest common subsequence divided
/// by candidate length (precision) and reference length (recall).
pub fn rouge_l<T: PartialEq>(candidate: &[T], reference: &[T]) -> RougeScore {
    let lcs = lcs_length(candidate, reference);
    RougeScore::new(ratio(lcs, candidate.len()), ratio(lcs, reference.len()))
}

/// Classic two-row LCS dynamic program.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = alloc::vec![0usize; b.len() + 1];
    let mut cur = alloc::vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Binary selection precision/recall/F1 on the positive class; all three
/// are 0 when their denominators are (no positives predicted or present).
pub fn selection_prf(predicted: &[bool], oracle: &[bool]) -> Result<(f64, f64, f64), MetricError> {
    if predicted.len() != oracle.len() {
        return Err(MetricError::LengthMismatch {
            expected: oracle.len(),
            found: predicted.len(),
        });
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&p, &o) in predicted.iter().zip(oracle) {
        match (p, o) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Ok((precision, recall, f1(precision, recall)))
}

/// Fraction of the summary's distinct n-grams that never occur in the
/// source. A summary with no n-grams of order `n` scores 0.
pub fn novel_ngram_proportion<T: Ord>(summary: &[T], source: &[T], n: usize) -> f64 {
    if n == 0 || summary.len() < n {
        return 0.0;
    }
    let distinct: BTreeSet<&[T]> = summary.windows(n).collect();
    let source_grams: BTreeSet<&[T]> = if source.len() >= n {
        source.windows(n).collect()
    } else {
        BTreeSet::new()
    };
    let novel = distinct
        .iter()
        .filter(|gram| !source_grams.contains(**gram))
        .count();
    novel as f64 / distinct.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn tokenize_lowercases_and_splits_punctuation() {
        assert_eq!(
            tokenize("The cat, sat."),
            vec!["the", "cat", ",", "sat", "."]
        );
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("  A-1  "), vec!["a", "-", "1"]);
    }

    #[test]
    fn ngrams_multiset_semantics() {
        let t = toks("a b c");
        let bi = ngrams(&t, 2).unwrap();
        assert_eq!(bi.len(), 2);
        assert_eq!(bi[&["a", "b"][..]], 1);
        assert_eq!(bi[&["b", "c"][..]], 1);

        let t = toks("a a a");
        let uni = ngrams(&t, 1).unwrap();
        assert_eq!(uni[&["a"][..]], 3);

        assert!(ngrams(&t, 4).unwrap().is_empty());
        assert_eq!(ngrams(&t, 0), Err(MetricError::InvalidN));
    }

    #[test]
    fn rouge_n_identical_and_disjoint() {
        let a = toks("the cat sat");
        let same = rouge_n(&a, &a, 1).unwrap();
        assert_eq!((same.precision, same.recall, same.f1), (1.0, 1.0, 1.0));

        let b = toks("dogs bark loudly");
        let none = rouge_n(&a, &b, 1).unwrap();
        assert_eq!(none, RougeScore::zero());
    }

    #[test]
    fn rouge_1_hand_count() {
        // Candidate "the cat sat" vs reference "the cat ran fast":
        // overlap {the, cat} = 2, P = 2/3, R = 2/4, F1 = 4/7.
        let s = rouge_n(&toks("the cat sat"), &toks("the cat ran fast"), 1).unwrap();
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 0.5).abs() < 1e-12);
        assert!((s.f1 - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_n_clips_repeated_grams() {
        // Candidate has "a" x3, reference "a" x1: overlap clipped to 1.
        let s = rouge_n(&toks("a a a"), &toks("a b"), 1).unwrap();
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rouge_n_degenerate_inputs_are_zero() {
        let empty: [&str; 0] = [];
        assert_eq!(rouge_n(&empty, &toks("a"), 1).unwrap(), RougeScore::zero());
        assert_eq!(rouge_n(&toks("a"), &empty, 1).unwrap(), RougeScore::zero());
    }

    #[test]
    fn rouge_l_reordered_sequence() {
        // "a b c d" vs "a c d b": LCS "a c d", length 3.
        let s = rouge_l(&toks("a b c d"), &toks("a c d b"));
        assert!((s.precision - 0.75).abs() < 1e-12);
        assert!((s.recall - 0.75).abs() < 1e-12);

        let same = rouge_l(&toks("x y"), &toks("x y"));
        assert_eq!((same.precision, same.recall, same.f1), (1.0, 1.0, 1.0));

        let empty: [&str; 0] = [];
        assert_eq!(rouge_l(&empty, &toks("x")), RougeScore::zero());
    }

    #[test]
    fn selection_prf_hand_counts() {
        let one = [true, false];
        assert_eq!(selection_prf(&one, &one).unwrap(), (1.0, 1.0, 1.0));

        // All-negative prediction against positives: everything zero.
        assert_eq!(
            selection_prf(&[false, false], &[true, false]).unwrap(),
            (0.0, 0.0, 0.0)
        );

        // pred [1,1,0,0] vs oracle [1,0,1,0]: tp=1 fp=1 fn=1.
        let (p, r, f) =
            selection_prf(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!((p, r, f), (0.5, 0.5, 0.5));

        assert_eq!(
            selection_prf(&[true], &[true, false]),
            Err(MetricError::LengthMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn novel_ngrams_zero_for_verbatim_subsets() {
        let source = toks("the cat sat on the mat today");
        let summary = toks("the cat sat");
        assert_eq!(novel_ngram_proportion(&summary, &source, 1), 0.0);
        assert_eq!(novel_ngram_proportion(&summary, &source, 2), 0.0);
    }

    #[test]
    fn novel_ngrams_one_for_fresh_vocabulary() {
        let source = toks("the cat sat");
        let summary = toks("dogs bark");
        assert_eq!(novel_ngram_proportion(&summary, &source, 1), 1.0);
    }

    #[test]
    fn concatenation_boundary_creates_novel_bigrams_only() {
        // Source sentences "the cat sat ." and "dogs bark loud"; the
        // extract drops the separator, so its unigrams are all known but
        // the boundary bigram (sat, dogs) is new: 1 of 5 distinct.
        let source = toks("the cat sat . dogs bark loud");
        let summary = toks("the cat sat dogs bark loud");
        assert_eq!(novel_ngram_proportion(&summary, &source, 1), 0.0);
        let p2 = novel_ngram_proportion(&summary, &source, 2);
        assert!((p2 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn short_summaries_score_zero() {
        let source = toks("a b c");
        let summary = toks("a");
        assert_eq!(novel_ngram_proportion(&summary, &source, 2), 0.0);
        let empty: [&str; 0] = [];
        assert_eq!(novel_ngram_proportion(&empty, &source, 1), 0.0);
    }
}
