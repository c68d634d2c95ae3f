//! Seeded sampling primitives used throughout the simulation protocol.
//!
//! The generator is ChaCha8 seeded from a 64-bit value, so a seed pins the
//! entire draw sequence on every platform. Per-mixture substreams derive
//! their seed as `splitmix64(base + (index + 1) * GOLDEN)`, which lets a
//! dataset be generated in parallel while staying byte-reproducible.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::params::{SelectionMode, SimParams};
use crate::timeline::TransitionType;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; maps a counter to a well-mixed 64-bit value.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic pseudorandom stream.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Seed of the `index`-th substream of `base_seed`.
    pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
        splitmix64(base_seed.wrapping_add((index.wrapping_add(1)).wrapping_mul(GOLDEN)))
    }

    /// Independent stream for one unit of parallel work.
    pub fn substream(base_seed: u64, index: u64) -> Self {
        Self::from_seed(Self::derive_seed(base_seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Unbiased uniform index in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
    }
}

/// Inverse CDF of the exponential distribution with mean `beta`.
pub fn exp_inverse_cdf(beta: f64, u: f64) -> f64 {
    -beta * (-u).ln_1p()
}

/// Inverse CDF of the exponential distribution restricted to `[lo, hi]`.
pub fn truncated_exp_inverse_cdf(beta: f64, lo: f64, hi: f64, u: f64) -> f64 {
    // F(x) = -expm1(-x/beta); map u onto [F(lo), F(hi)] before inverting.
    let f_lo = -(-lo / beta).exp_m1();
    let f_hi = -(-hi / beta).exp_m1();
    let v = f_lo + u * (f_hi - f_lo);
    (-beta * (-v).ln_1p()).clamp(lo, hi)
}

/// Draws a silence duration from Exp(beta) via the inverse CDF.
pub fn sample_exponential(beta: f64, rng: &mut Rng) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "exponential beta must be positive, got {beta}"
        )));
    }
    Ok(exp_inverse_cdf(beta, rng.uniform()))
}

/// Draws an overlap ratio from the exponential distribution truncated to
/// `[epsilon, 1 - epsilon]`.
pub fn sample_truncated_exponential(beta: f64, epsilon: f64, rng: &mut Rng) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "truncated exponential beta must be positive, got {beta}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParams(format!(
            "epsilon must be in (0, 0.5), got {epsilon}"
        )));
    }
    Ok(truncated_exp_inverse_cdf(
        beta,
        epsilon,
        1.0 - epsilon,
        rng.uniform(),
    ))
}

/// Draws an exponential value restricted to `[lo, hi]` seconds.
pub fn sample_exponential_in(beta: f64, lo: f64, hi: f64, rng: &mut Rng) -> Result<f64> {
    if !(beta > 0.0) || !(lo >= 0.0) || !(hi > lo) {
        return Err(Error::InvalidParams(format!(
            "invalid truncated range beta={beta} lo={lo} hi={hi}"
        )));
    }
    Ok(truncated_exp_inverse_cdf(beta, lo, hi, rng.uniform()))
}

/// Standard normal draw via Box-Muller; consumes two uniforms.
pub fn sample_standard_normal(rng: &mut Rng) -> f64 {
    let u1 = loop {
        let u = rng.uniform();
        if u > 0.0 {
            break u;
        }
    };
    let u2 = rng.uniform();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Inverse-CDF categorical draw: returns the smallest index whose cumulative
/// probability exceeds the uniform variate.
pub fn sample_categorical(probs: &[f64], rng: &mut Rng) -> Result<usize> {
    if probs.is_empty() || probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidParams(
            "categorical probabilities must be non-negative and finite".to_string(),
        ));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "categorical probabilities sum to {sum}"
        )));
    }
    let u = rng.uniform();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if cum > u {
            return Ok(i);
        }
    }
    // Cumulative sum fell short of u by rounding; take the last supported index.
    Ok(probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("probabilities sum to 1, so some entry is positive"))
}

/// Chooses the next transition type.
///
/// Random mode ignores the previous type. Markov mode conditions on it; the
/// first transition of a mixture (no previous type) falls back to `p_ind`.
pub fn next_transition(
    mode: SelectionMode,
    prev: Option<TransitionType>,
    params: &SimParams,
    rng: &mut Rng,
) -> Result<TransitionType> {
    let probs = match (mode, prev) {
        (SelectionMode::Random, _) | (SelectionMode::Markov, None) => params.p_ind,
        (SelectionMode::Markov, Some(current)) => params.markov_column(current).ok_or_else(|| {
            Error::InvalidParams("p_markov is required in markov mode".to_string())
        })?,
    };
    let idx = sample_categorical(&probs, rng)?;
    Ok(TransitionType::from_index(idx).expect("index < 4"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SimParams;

    #[test]
    fn same_seed_reproduces_stream() {
        let mut a = Rng::from_seed(123);
        let mut b = Rng::from_seed(123);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_differ() {
        let mut a = Rng::substream(7, 0);
        let mut b = Rng::substream(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn exp_inverse_cdf_at_half_is_ln2_times_beta() {
        let beta = 0.57;
        let expected = std::f64::consts::LN_2 * beta;
        assert!((exp_inverse_cdf(beta, 0.5) - expected).abs() < 1e-12);
    }

    #[test]
    fn exp_inverse_cdf_at_zero_is_zero() {
        assert_eq!(exp_inverse_cdf(2.0, 0.0), 0.0);
    }

    #[test]
    fn exponential_mean_matches_beta() {
        // Expected-value window from the turn-hold duration estimate.
        let mut rng = Rng::from_seed(42);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_exponential(0.57, &mut rng).unwrap();
        }
        let mean = sum / n as f64;
        assert!((0.555..=0.585).contains(&mean), "mean {mean}");
    }

    #[test]
    fn exponential_rejects_nonpositive_beta() {
        let mut rng = Rng::from_seed(0);
        assert!(sample_exponential(0.0, &mut rng).is_err());
        assert!(sample_exponential(-1.0, &mut rng).is_err());
    }

    #[test]
    fn truncated_exponential_support() {
        let mut rng = Rng::from_seed(9);
        for _ in 0..100_000 {
            let rho = sample_truncated_exponential(0.44, 0.03, &mut rng).unwrap();
            assert!((0.03..=0.97).contains(&rho), "rho {rho}");
        }
    }

    #[test]
    fn truncated_exponential_mean_matches_quadrature() {
        // Simpson quadrature of the truncated density gives 0.129922232945
        // for beta = 0.10, epsilon = 0.03.
        let mut rng = Rng::from_seed(5);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_truncated_exponential(0.10, 0.03, &mut rng).unwrap();
        }
        let mean = sum / n as f64;
        let expected = 0.129922232945;
        assert!(
            (mean - expected).abs() / expected < 0.02,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn truncated_exponential_flat_limit() {
        // Huge beta flattens the density; the mean approaches 0.5.
        let mut rng = Rng::from_seed(11);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_truncated_exponential(1e6, 0.03, &mut rng).unwrap();
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn categorical_degenerate_vector() {
        let mut rng = Rng::from_seed(1);
        for _ in 0..1000 {
            assert_eq!(sample_categorical(&[1.0, 0.0, 0.0, 0.0], &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn categorical_frequencies_match_p_ind() {
        let p = [0.15, 0.31, 0.44, 0.10];
        let mut rng = Rng::from_seed(3);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_categorical(&p, &mut rng).unwrap()] += 1;
        }
        for i in 0..4 {
            let freq = counts[i] as f64 / n as f64;
            assert!((freq - p[i]).abs() < 0.01, "entry {i}: {freq} vs {}", p[i]);
        }
    }

    #[test]
    fn categorical_rejects_bad_vectors() {
        let mut rng = Rng::from_seed(0);
        assert!(sample_categorical(&[0.5, 0.6], &mut rng).is_err());
        assert!(sample_categorical(&[-0.1, 1.1], &mut rng).is_err());
    }

    #[test]
    fn markov_column_conditional_frequencies() {
        let params = SimParams::callhome();
        let mut rng = Rng::from_seed(17);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let t = next_transition(
                SelectionMode::Markov,
                Some(TransitionType::TurnSwitch),
                &params,
                &mut rng,
            )
            .unwrap();
            counts[t.index()] += 1;
        }
        let expected = [0.11, 0.38, 0.45, 0.06];
        for i in 0..4 {
            let freq = counts[i] as f64 / n as f64;
            assert!(
                (freq - expected[i]).abs() < 0.01,
                "entry {i}: {freq} vs {}",
                expected[i]
            );
        }
    }

    #[test]
    fn random_mode_ignores_previous_type() {
        let params = SimParams::callhome();
        let n = 100_000;
        let mut freq = [[0.0f64; 4]; 2];
        for (k, prev) in [TransitionType::TurnHold, TransitionType::Backchannel]
            .into_iter()
            .enumerate()
        {
            let mut rng = Rng::from_seed(23);
            for _ in 0..n {
                let t = next_transition(SelectionMode::Random, Some(prev), &params, &mut rng)
                    .unwrap();
                freq[k][t.index()] += 1.0 / n as f64;
            }
        }
        for i in 0..4 {
            assert!((freq[0][i] - freq[1][i]).abs() < 0.01);
        }
    }

    #[test]
    fn markov_without_previous_uses_p_ind() {
        let params = SimParams::callhome();
        let mut rng = Rng::from_seed(29);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let t = next_transition(SelectionMode::Markov, None, &params, &mut rng).unwrap();
            counts[t.index()] += 1;
        }
        for i in 0..4 {
            let freq = counts[i] as f64 / n as f64;
            assert!((freq - params.p_ind[i]).abs() < 0.01);
        }
    }

    #[test]
    fn markov_chain_bigrams_converge_to_matrix() {
        let params = SimParams::callhome();
        let m = params.p_markov.unwrap();
        let mut rng = Rng::from_seed(31);
        let mut prev: Option<TransitionType> = None;
        let mut bigrams = [[0usize; 4]; 4];
        for _ in 0..100_000 {
            let t = next_transition(SelectionMode::Markov, prev, &params, &mut rng).unwrap();
            if let Some(p) = prev {
                bigrams[t.index()][p.index()] += 1;
            }
            prev = Some(t);
        }
        for j in 0..4 {
            let col_total: usize = (0..4).map(|i| bigrams[i][j]).sum();
            for i in 0..4 {
                let freq = bigrams[i][j] as f64 / col_total as f64;
                assert!(
                    (freq - m[i][j]).abs() < 0.01,
                    "[{i}][{j}]: {freq} vs {}",
                    m[i][j]
                );
            }
        }
    }
}
