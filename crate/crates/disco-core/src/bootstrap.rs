//! Percentile-bootstrap confidence intervals over per-document scores.
//!
//! Documents are resampled with replacement (paired resampling: one draw
//! picks a whole document's score), the mean is recomputed per replicate,
//! and the interval is read off the replicate quantiles. Each replicate's
//! RNG stream is derived deterministically from `(seed, replicate_index)`,
//! so results are reproducible and replicates could be computed in any
//! order or in parallel.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rouge::MetricError;

/// Replicate count matching the evaluation protocol.
pub const DEFAULT_REPLICATES: usize = 1000;
/// Confidence level matching the evaluation protocol.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// A percentile-bootstrap interval for the mean of a score sample.
///
/// `margin_of_error` is the half-width `(upper - lower) / 2`; the full
/// width is available as [`BootstrapResult::width`]. The interval is
/// widened to include the point estimate, which only ever matters for
/// degenerate replicate counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapResult {
    pub point_estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub margin_of_error: f64,
    pub replicates: usize,
    pub confidence: f64,
}

impl BootstrapResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Percentile bootstrap of the mean of `per_doc_scores`.
pub fn bootstrap_ci(
    per_doc_scores: &[f64],
    replicates: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapResult, MetricError> {
    if per_doc_scores.is_empty() {
        return Err(MetricError::EmptySample);
    }
    if replicates == 0 {
        return Err(MetricError::InvalidReplicates);
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(MetricError::InvalidConfidence);
    }

    let n = per_doc_scores.len();
    let point_estimate = mean(per_doc_scores);

    let mut replicate_means = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(seed, r as u64));
        let mut sum = 0.0;
        for _ in 0..n {
            sum += per_doc_scores[rng.random_range(0..n)];
        }
        replicate_means.push(sum / n as f64);
    }
    replicate_means.sort_by(|a, b| a.total_cmp(b));

    let alpha = 1.0 - confidence;
    let mut lower = quantile(&replicate_means, alpha / 2.0);
    let mut upper = quantile(&replicate_means, 1.0 - alpha / 2.0);
    lower = lower.min(point_estimate);
    upper = upper.max(point_estimate);

    Ok(BootstrapResult {
        point_estimate,
        lower,
        upper,
        margin_of_error: (upper - lower) / 2.0,
        replicates,
        confidence,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linear-interpolation quantile of an already-sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let pos = q * (m - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(m - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Per-replicate seed derivation: a SplitMix64 scramble of the base seed
/// and the replicate index.
fn replicate_seed(seed: u64, replicate: u64) -> u64 {
    splitmix64(seed ^ splitmix64(replicate.wrapping_add(1)))
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
