//! EOS-logit temperature scaling and the sampling primitives needed to
//! exercise it.
//!
//! Scaling divides only the end-of-sequence coordinate by `T`, leaving the
//! rest of the vocabulary untouched. `T < 1` raises the stopping hazard when
//! the EOS logit is positive (and suppresses it when negative); `T > 1`
//! does the reverse, which is what delimiter-suppression tricks rely on.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaled logits are clamped to this magnitude so extreme temperatures can
/// never propagate non-finite values into the softmax.
pub const LOGIT_CLAMP: f64 = 1e30;

/// Per-step scores over a vocabulary with a designated EOS index and an
/// optional end-of-thinking index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitVector {
    scores: Vec<f64>,
    eos_index: usize,
    end_think_index: Option<usize>,
}

impl LogitVector {
    pub fn new(scores: Vec<f64>, eos_index: usize, end_think_index: Option<usize>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Validation("logit vector is empty".into()));
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::Validation(format!("non-finite logit {bad}")));
        }
        if eos_index >= scores.len() {
            return Err(Error::Validation(format!(
                "eos_index {eos_index} out of range for vocab of {}",
                scores.len()
            )));
        }
        if let Some(et) = end_think_index {
            if et >= scores.len() {
                return Err(Error::Validation(format!(
                    "end_think_index {et} out of range for vocab of {}",
                    scores.len()
                )));
            }
            if et == eos_index {
                return Err(Error::Validation(
                    "eos_index and end_think_index must differ".into(),
                ));
            }
        }
        Ok(Self {
            scores,
            eos_index,
            end_think_index,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn vocab_size(&self) -> usize {
        self.scores.len()
    }

    pub fn eos_index(&self) -> usize {
        self.eos_index
    }

    pub fn end_think_index(&self) -> Option<usize> {
        self.end_think_index
    }

    pub fn eos_score(&self) -> f64 {
        self.scores[self.eos_index]
    }
}

/// Temperature applied to the EOS logit only. Always positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosTemperature(f64);

impl EosTemperature {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("EOS temperature must be > 0, got {t}")));
        }
        Ok(Self(t))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Returns a copy of `logits` with only the EOS coordinate divided by the
/// temperature. The input is untouched; the result is clamped to
/// ±[`LOGIT_CLAMP`] so it is always finite.
pub fn scale_eos(logits: &LogitVector, temp: EosTemperature) -> LogitVector {
    let mut out = logits.clone();
    let scaled = out.scores[out.eos_index] / temp.get();
    out.scores[out.eos_index] = scaled.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
    out
}

/// Numerically stable softmax (max-subtraction). Outputs sum to 1 within
/// 1e-12 for finite input.
pub fn softmax(logits: &LogitVector) -> Vec<f64> {
    softmax_scores(logits.scores())
}

pub(crate) fn softmax_scores(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Samples an index by inverse CDF over the vector order. Deterministic
/// given the caller's seeded generator.
pub fn sample_token<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::Validation("empty probability vector".into()));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Validation("probabilities must be finite and >= 0".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::Validation(format!(
            "probabilities sum to {sum}, not 1"
        )));
    }
    let u: f64 = rng.random::<f64>() * sum;
    let mut cum = 0.0;
    let mut last_nonzero = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = i;
        }
        cum += p;
        if u < cum {
            return Ok(i);
        }
    }
    // Float accumulation can leave u just above the final cumulative sum.
    Ok(last_nonzero)
}

/// 1-based rank of the EOS score within the whole vocabulary (1 = largest).
/// Diagnostic for how close the model is to stopping at a given step.
pub fn eos_rank(logits: &LogitVector) -> usize {
    let eos = logits.eos_score();
    1 + logits.scores().iter().filter(|s| **s > eos).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lv(scores: Vec<f64>, eos: usize) -> LogitVector {
        LogitVector::new(scores, eos, None).unwrap()
    }

    #[test]
    fn scale_divides_only_eos() {
        let v = lv(vec![1.0, 2.0, 3.0], 1);
        let out = scale_eos(&v, EosTemperature::new(0.5).unwrap());
        assert_eq!(out.scores(), &[1.0, 4.0, 3.0]);
        assert_eq!(v.scores(), &[1.0, 2.0, 3.0]); // input unmodified
    }

    #[test]
    fn scale_identity_at_t1() {
        let v = lv(vec![-0.5, 0.25, 7.0], 2);
        let out = scale_eos(&v, EosTemperature::new(1.0).unwrap());
        assert_eq!(out, v);
    }

    #[test]
    fn scaled_eos_probability_matches_closed_form() {
        // vocab {a: 1.0, b: 1.0, eos: 1.0}, T = 0.5 -> P(eos) = e^2/(e^2+2e)
        let v = lv(vec![1.0, 1.0, 1.0], 2);
        let probs = softmax(&scale_eos(&v, EosTemperature::new(0.5).unwrap()));
        let expected = 2.0f64.exp() / (2.0f64.exp() + 2.0 * 1.0f64.exp());
        assert!((probs[2] - expected).abs() < 1e-15, "{} vs {expected}", probs[2]);
        // frozen from a 50-digit evaluation of e^2/(e^2+2e)
        assert!((expected - 0.576_116_884_765_829_1).abs() < 1e-15);
    }

    #[test]
    fn scale_clamps_extreme_results() {
        let v = lv(vec![1e300, 0.0], 0);
        let out = scale_eos(&v, EosTemperature::new(1e-300).unwrap());
        assert_eq!(out.scores()[0], LOGIT_CLAMP);
        assert!(softmax(&out).iter().all(|p| p.is_finite()));
    }

    #[test]
    fn softmax_symmetry_and_shift_stability() {
        let p = softmax(&lv(vec![0.0, 0.0], 0));
        assert_eq!(p, vec![0.5, 0.5]);
        let p = softmax(&lv(vec![1000.0, 1000.0], 0));
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_matches_high_precision_oracle() {
        // frozen from a 50-digit evaluation of softmax([1, 2, 3])
        let expected = [
            0.090_030_573_170_380_46,
            0.244_728_471_054_797_65,
            0.665_240_955_774_821_9,
        ];
        let p = softmax(&lv(vec![1.0, 2.0, 3.0], 0));
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sample_one_hot_is_deterministic() {
        let probs = [0.0, 0.0, 0.0, 1.0];
        for seed in [0u64, 1, 99] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(sample_token(&probs, &mut rng).unwrap(), 3);
        }
    }

    #[test]
    fn sample_same_seed_same_index() {
        let probs = [0.25; 4];
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(
                sample_token(&probs, &mut a).unwrap(),
                sample_token(&probs, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn sample_frequency_law_of_large_numbers() {
        let probs = [0.5, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_token(&probs, &mut rng).unwrap() == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq), "freq {freq}");
    }

    #[test]
    fn sample_rejects_bad_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_token(&[0.5, 0.2], &mut rng).is_err());
        assert!(sample_token(&[], &mut rng).is_err());
        assert!(sample_token(&[1.5, -0.5], &mut rng).is_err());
    }

    #[test]
    fn eos_rank_counts_strictly_greater() {
        let v = lv(vec![3.0, 1.0, 2.0], 1);
        assert_eq!(eos_rank(&v), 3);
        let v = lv(vec![0.0, 5.0, 2.0], 1);
        assert_eq!(eos_rank(&v), 1);
    }

    #[test]
    fn invalid_vectors_rejected() {
        assert!(LogitVector::new(vec![], 0, None).is_err());
        assert!(LogitVector::new(vec![f64::NAN], 0, None).is_err());
        assert!(LogitVector::new(vec![0.0, 1.0], 5, None).is_err());
        assert!(LogitVector::new(vec![0.0, 1.0], 0, Some(0)).is_err());
        assert!(EosTemperature::new(0.0).is_err());
        assert!(EosTemperature::new(-1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // scale_eos changes exactly one coordinate; non-EOS argmax invariant
            #[test]
            fn scale_touches_one_coordinate(
                scores in proptest::collection::vec(-50.0f64..50.0, 2..20),
                eos in 0usize..20,
                t in 0.01f64..10.0,
            ) {
                let eos = eos % scores.len();
                let v = LogitVector::new(scores, eos, None).unwrap();
                let out = scale_eos(&v, EosTemperature::new(t).unwrap());
                for i in 0..v.vocab_size() {
                    if i != eos {
                        prop_assert_eq!(out.scores()[i], v.scores()[i]);
                    }
                }
            }

            // P(eos) strictly decreasing in T on (0, 1] for positive EOS logits,
            // strictly increasing for negative ones
            #[test]
            fn sign_conditioned_monotonicity(eos_logit in 0.1f64..5.0) {
                let temps = [0.2, 0.4, 0.6, 0.8, 1.0];
                for sign in [1.0, -1.0] {
                    let v = LogitVector::new(vec![sign * eos_logit, 0.0, 0.0], 0, None).unwrap();
                    let ps: Vec<f64> = temps
                        .iter()
                        .map(|&t| softmax(&scale_eos(&v, EosTemperature::new(t).unwrap()))[0])
                        .collect();
                    for w in ps.windows(2) {
                        if sign > 0.0 {
                            prop_assert!(w[0] > w[1], "expected decreasing in T: {ps:?}");
                        } else {
                            prop_assert!(w[0] < w[1], "expected increasing in T: {ps:?}");
                        }
                    }
                }
            }

            #[test]
            fn softmax_sums_to_one(scores in proptest::collection::vec(-200.0f64..200.0, 1..32)) {
                let v = LogitVector::new(scores, 0, None).unwrap();
                let sum: f64 = softmax(&v).iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }
}
