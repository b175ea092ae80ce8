//! Shared fixtures: a reproducible random source corpus and an independent
//! second-order oracle for λ₀₀.
#![allow(dead_code)]

use hillstab::PeriodicFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x5eed_0001;
pub const CORPUS_SIZE: usize = 20;

/// Random band-limited sources with nonpositive mean and guaranteed
/// non-constant content, period 2π (κ = 1). Deterministic across runs.
pub fn random_corpus() -> Vec<PeriodicFunction<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|_| {
            let mean = rng.gen_range(-2.0..-0.1);
            let n_harmonics = rng.gen_range(1..=4usize);
            let mut terms: Vec<(f64, f64, f64)> = (1..=n_harmonics)
                .map(|k| {
                    let amp = 1.2 / k as f64;
                    (
                        k as f64,
                        rng.gen_range(-amp..amp),
                        rng.gen_range(-amp..amp),
                    )
                })
                .collect();
            if terms.iter().map(|t| t.1.abs() + t.2.abs()).sum::<f64>() < 0.05 {
                terms[0].1 += 0.5;
            }
            PeriodicFunction::from_fn(
                move |x| {
                    let mut v = mean;
                    for &(k, a, b) in &terms {
                        v += a * (k * x).cos() + b * (k * x).sin();
                    }
                    v
                },
                2.0 * std::f64::consts::PI,
                256,
            )
            .expect("corpus sources are finite on a valid grid")
        })
        .collect()
}

/// Second-order perturbative estimate of λ₀₀, derived independently of the
/// eigensolver: λ₀₀ ≈ −ŝ₀ − Σ_{k≠0} |ŝ_k|² / (κk)². Accurate for weak
/// fluctuations, and an upper-bound-flavored sanity anchor otherwise.
pub fn lambda00_second_order(s: &PeriodicFunction<f64>) -> f64 {
    let kappa = s.kappa();
    let mut value = -s.coeff(0).re;
    for k in 1..=(s.len() as i64) / 2 {
        let c = s.coeff(k);
        value -= 2.0 * c.norm_sqr() / (kappa * k as f64).powi(2);
    }
    value
}
