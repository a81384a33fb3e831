//! Bootstrap interval width against the normal-approximation oracle.

use disco_core::bootstrap::bootstrap_ci;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// z for a two-sided 95% interval.
const Z_95: f64 = 1.959963984540054;

#[test]
fn interval_width_matches_the_analytic_half_width() {
    // Approximately normal scores via a sum of 12 uniforms (Irwin-Hall,
    // variance 1 after centering), scaled to sigma = 0.1 around 0.5.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100;
    let scores: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = (0..12).map(|_| rng.random_range(0.0..1.0)).sum::<f64>() - 6.0;
            0.5 + 0.1 * z
        })
        .collect();

    let result = bootstrap_ci(&scores, 10_000, 0.95, 99).unwrap();

    // The bootstrap half-width should approximate z * s / sqrt(n) with
    // s the sample standard deviation.
    let mean = scores.iter().sum::<f64>() / n as f64;
    let var = scores.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    let analytic = Z_95 * var.sqrt() / (n as f64).sqrt();

    let rel = (result.margin_of_error - analytic).abs() / analytic;
    assert!(
        rel < 0.15,
        "bootstrap half-width {} vs analytic {} (rel {rel:.3})",
        result.margin_of_error,
        analytic
    );
    assert!((result.point_estimate - mean).abs() < 1e-12);
}

#[test]
fn protocol_settings_are_bit_reproducible() {
    let scores: Vec<f64> = (0..80).map(|i| ((i * 13 % 40) as f64) / 40.0).collect();
    let a = bootstrap_ci(&scores, 1000, 0.95, 7).unwrap();
    let b = bootstrap_ci(&scores, 1000, 0.95, 7).unwrap();
    assert_eq!(a.lower.to_bits(), b.lower.to_bits());
    assert_eq!(a.upper.to_bits(), b.upper.to_bits());
    assert_eq!(a.margin_of_error.to_bits(), b.margin_of_error.to_bits());
}
