// SPDX-License-Identifier: MIT OR Apache-2.0

//! Blocky expected signals, noisy observations and jump-sign patterns.
//!
//! Positions are 1-based in every public type that talks about a signal
//! (`Block`, jump positions), matching the CSV formats. Dense vectors are
//! ordinary 0-based slices; position `p` lives at slice index `p - 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FusedError, Result};

/// Zero tolerance used when extracting signs from fitted (floating point) vectors.
pub const DEFAULT_ESTIMATE_TOL: f64 = 1e-9;

/// One constant block `[lower, upper]` (1-based, inclusive) at `level`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    #[serde(rename = "L")]
    pub lower: usize,
    #[serde(rename = "U")]
    pub upper: usize,
    pub level: f64,
}

impl Block {
    pub fn new(lower: usize, upper: usize, level: f64) -> Self {
        Self {
            lower,
            upper,
            level,
        }
    }

    pub fn len(&self) -> usize {
        self.upper + 1 - self.lower
    }

    pub fn is_empty(&self) -> bool {
        self.upper < self.lower
    }
}

/// Piecewise-constant expected signal stored as a partition of `1..=n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepwiseSignal {
    blocks: Vec<Block>,
    n: usize,
}

impl StepwiseSignal {
    /// Validates and builds a signal from its blocks.
    ///
    /// The blocks must start at 1, be contiguous, be non-empty, and
    /// neighbouring blocks must carry different levels.
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| FusedError::InvalidPartition("no blocks".into()))?;
        if first.lower != 1 {
            return Err(FusedError::InvalidPartition(format!(
                "first block starts at {}, expected 1",
                first.lower
            )));
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(FusedError::InvalidPartition(format!(
                    "block {} is empty ({}..{})",
                    k + 1,
                    b.lower,
                    b.upper
                )));
            }
            if !b.level.is_finite() {
                return Err(FusedError::InvalidPartition(format!(
                    "block {} has non-finite level",
                    k + 1
                )));
            }
        }
        for (k, pair) in blocks.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            if b.lower != a.upper + 1 {
                return Err(FusedError::InvalidPartition(format!(
                    "block {} ends at {} but block {} starts at {}",
                    k + 1,
                    a.upper,
                    k + 2,
                    b.lower
                )));
            }
            if a.level == b.level {
                return Err(FusedError::InvalidPartition(format!(
                    "blocks {} and {} share level {}",
                    k + 1,
                    k + 2,
                    a.level
                )));
            }
        }
        let n = blocks.last().map(|b| b.upper).unwrap_or(0);
        Ok(Self { blocks, n })
    }

    /// Builds a signal from `(L, U, level)` triples.
    pub fn from_triples(triples: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            triples
                .iter()
                .map(|&(l, u, v)| Block::new(l, u, v))
                .collect(),
        )
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Dense expected vector μ*.
    pub fn expected(&self) -> Vec<f64> {
        let mut mu = Vec::with_capacity(self.n);
        for b in &self.blocks {
            mu.extend(std::iter::repeat_n(b.level, b.len()));
        }
        mu
    }

    /// 1-based positions `p` with μ*_p ≠ μ*_{p-1}, i.e. the lower ends of blocks 2..J.
    pub fn jump_positions(&self) -> Vec<usize> {
        self.blocks.iter().skip(1).map(|b| b.lower).collect()
    }

    /// Direction (+1 / -1) of every jump, aligned with [`Self::jump_positions`].
    pub fn jump_signs(&self) -> Vec<i8> {
        self.blocks
            .windows(2)
            .map(|p| if p[1].level > p[0].level { 1 } else { -1 })
            .collect()
    }

    /// Jump sizes ν_{j+1} − ν_j.
    pub fn jump_sizes(&self) -> Vec<f64> {
        self.blocks
            .windows(2)
            .map(|p| p[1].level - p[0].level)
            .collect()
    }

    /// Smallest absolute jump, `None` for a single-block signal.
    pub fn min_jump(&self) -> Option<f64> {
        self.jump_sizes()
            .into_iter()
            .map(f64::abs)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Exact jump pattern of μ* (tolerance 0), built from the blocks.
    pub fn pattern(&self) -> JumpPattern {
        let mut signs = vec![0i8; self.n.saturating_sub(1)];
        for (pos, sign) in self.jump_positions().into_iter().zip(self.jump_signs()) {
            signs[pos - 2] = sign;
        }
        JumpPattern { signs }
    }
}

/// The seven-block benchmark signal of length 430 with three spikes.
pub fn benchmark_signal() -> StepwiseSignal {
    StepwiseSignal::from_triples(&[
        (1, 100, 0.0),
        (101, 110, -2.0),
        (111, 210, -0.1),
        (211, 220, 2.0),
        (221, 320, 0.1),
        (321, 330, -2.0),
        (331, 430, 0.0),
    ])
    .expect("benchmark signal is a valid partition")
}

/// Observed sequence `y = μ* + ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisySequence {
    pub values: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
}

/// Draws `y_i = μ*_i + σ·z_i` with i.i.d. standard normal `z`, seeded by `seed`.
pub fn sample_noisy(signal: &StepwiseSignal, sigma: f64, seed: u64) -> Result<NoisySequence> {
    sample_noisy_stream(signal, sigma, seed, 0)
}

/// Like [`sample_noisy`] but on an independent ChaCha stream, so that
/// replicate `r` depends only on `(seed, stream)`.
pub fn sample_noisy_stream(
    signal: &StepwiseSignal,
    sigma: f64,
    seed: u64,
    stream: u64,
) -> Result<NoisySequence> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(FusedError::param(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    let mut values = signal.expected();
    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        for v in values.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * z;
        }
    }
    Ok(NoisySequence {
        values,
        sigma,
        seed,
    })
}

/// Signs of successive differences, entries in {-1, 0, +1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JumpPattern {
    pub signs: Vec<i8>,
}

impl JumpPattern {
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Number of positions where the two patterns differ.
    pub fn disagreements(&self, other: &JumpPattern) -> Result<usize> {
        if self.len() != other.len() {
            return Err(FusedError::input(format!(
                "pattern lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .signs
            .iter()
            .zip(&other.signs)
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Number of nonzero entries.
    pub fn jump_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s != 0).count()
    }
}

pub(crate) fn sign_with_tol(x: f64, tol: f64) -> i8 {
    if x.abs() <= tol {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// `signs_i = sign(v_{i+1} − v_i)`, zero when the difference is within `tol`.
pub fn jump_pattern(v: &[f64], tol: f64) -> Result<JumpPattern> {
    if v.len() < 2 {
        return Err(FusedError::input(format!(
            "jump pattern needs at least 2 values, got {}",
            v.len()
        )));
    }
    crate::error::check_nonnegative("tol", tol)?;
    Ok(JumpPattern {
        signs: v
            .windows(2)
            .map(|w| sign_with_tol(w[1] - w[0], tol))
            .collect(),
    })
}

/// Pattern loss: count of positions where the difference signs of
/// `estimate` and `truth` disagree. Zero iff the pattern is recovered.
pub fn pattern_loss(estimate: &[f64], truth: &[f64], tol: f64) -> Result<usize> {
    if estimate.len() != truth.len() {
        return Err(FusedError::input(format!(
            "length mismatch: estimate {} vs truth {}",
            estimate.len(),
            truth.len()
        )));
    }
    jump_pattern(estimate, tol)?.disagreements(&jump_pattern(truth, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn make_stepwise_examples() {
        let s = StepwiseSignal::from_triples(&[(1, 2, 0.0), (3, 4, 5.0)]).unwrap();
        assert_eq!(s.expected(), vec![0.0, 0.0, 5.0, 5.0]);
        let s = StepwiseSignal::from_triples(&[(1, 3, 1.0)]).unwrap();
        assert_eq!(s.expected(), vec![1.0; 3]);
        let err = StepwiseSignal::from_triples(&[(1, 2, 0.0), (3, 3, 0.0)]);
        assert!(matches!(err, Err(FusedError::InvalidPartition(_))));
    }

    #[test]
    fn partition_errors() {
        for bad in [
            vec![],
            vec![(2, 3, 1.0)],
            vec![(1, 2, 0.0), (4, 5, 1.0)],
            vec![(1, 2, 0.0), (2, 5, 1.0)],
            vec![(1, 0, 0.0)],
        ] {
            assert!(
                matches!(
                    StepwiseSignal::from_triples(&bad),
                    Err(FusedError::InvalidPartition(_))
                ),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn benchmark_signal_layout() {
        let s = benchmark_signal();
        let mu = s.expected();
        assert_eq!(s.len(), 430);
        assert_eq!(mu[99], 0.0);
        assert_eq!(mu[100], -2.0);
        assert_eq!(mu[214], 2.0);
        assert_eq!(s.jump_positions(), vec![101, 111, 211, 221, 321, 331]);
    }

    #[test]
    fn benchmark_pattern_by_enumeration() {
        let mu = benchmark_signal().expected();
        let p = jump_pattern(&mu, 0.0).unwrap();
        assert_eq!(p.jump_count(), 6);
        let nonzero: Vec<(usize, i8)> = p
            .signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(i, &s)| (i + 2, s))
            .collect();
        assert_eq!(
            nonzero,
            vec![
                (101, -1),
                (111, 1),
                (211, 1),
                (221, -1),
                (321, -1),
                (331, 1)
            ]
        );
        assert_eq!(p, benchmark_signal().pattern());
    }

    #[test]
    fn noiseless_and_seeded_sampling() {
        let s = benchmark_signal();
        assert_eq!(sample_noisy(&s, 0.0, 9).unwrap().values, s.expected());
        let a = sample_noisy(&s, 0.25, 42).unwrap();
        let b = sample_noisy(&s, 0.25, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_noisy(&s, 0.25, 43).unwrap();
        assert_ne!(a.values, c.values);
        assert!(matches!(
            sample_noisy(&s, -1.0, 0),
            Err(FusedError::InvalidParameter(_))
        ));
    }

    #[test]
    fn noise_mean_is_zero_over_many_draws() {
        let s = StepwiseSignal::from_triples(&[(1, 1, 3.0)]).unwrap();
        let sigma = 0.5;
        let draws = 100_000u64;
        let mean = (0..draws)
            .map(|seed| sample_noisy(&s, sigma, seed).unwrap().values[0] - 3.0)
            .sum::<f64>()
            / draws as f64;
        assert!(mean.abs() <= 4.0 * sigma / (draws as f64).sqrt(), "{mean}");
    }

    #[test]
    fn jump_pattern_examples() {
        assert_eq!(
            jump_pattern(&[1.0, 1.0, 3.0], 0.0).unwrap().signs,
            vec![0, 1]
        );
        assert_eq!(
            jump_pattern(&[0.5, 0.5 + 1e-12], 1e-9).unwrap().signs,
            vec![0]
        );
        assert!(jump_pattern(&[1.0], 0.0).is_err());
    }

    #[test]
    fn pattern_loss_examples() {
        let mu = benchmark_signal().expected();
        assert_eq!(pattern_loss(&mu, &mu, 0.0).unwrap(), 0);
        assert_eq!(pattern_loss(&vec![0.3; 430], &mu, 0.0).unwrap(), 6);
        let neg: Vec<f64> = mu.iter().map(|v| -v).collect();
        // brute force: each flipped jump disagrees, zeros agree
        let brute = (0..429)
            .filter(|&i| (mu[i + 1] - mu[i]).signum() * (neg[i + 1] - neg[i]).signum() < 0.0)
            .count();
        assert_eq!(brute, 6);
        assert_eq!(pattern_loss(&neg, &mu, 0.0).unwrap(), brute);
        assert!(pattern_loss(&[1.0, 2.0], &[1.0, 2.0, 3.0], 0.0).is_err());
    }

    fn arb_blocks() -> impl Strategy<Value = Vec<(usize, f64)>> {
        prop::collection::vec((1usize..6, -3i32..4), 1..8)
            .prop_map(|v| v.into_iter().map(|(l, lev)| (l, lev as f64)).collect())
    }

    fn build(layout: &[(usize, f64)]) -> Option<StepwiseSignal> {
        let mut triples = Vec::new();
        let mut start = 1;
        let mut last: Option<f64> = None;
        for &(len, level) in layout {
            if last == Some(level) {
                let t: &mut (usize, usize, f64) = triples.last_mut().unwrap();
                t.1 += len;
            } else {
                triples.push((start, start + len - 1, level));
            }
            start += len;
            last = Some(level);
        }
        StepwiseSignal::from_triples(&triples).ok()
    }

    proptest! {
        #[test]
        fn loss_is_reflexive_and_symmetric(
            a in prop::collection::vec(-5.0f64..5.0, 2..40),
            shift in prop::collection::vec(-1.0f64..1.0, 40),
            tol in 0.0f64..0.5,
        ) {
            let b: Vec<f64> = a.iter().zip(&shift).map(|(x, d)| x + d).collect();
            prop_assert_eq!(pattern_loss(&a, &a, tol).unwrap(), 0);
            prop_assert_eq!(pattern_loss(&a, &b, tol).unwrap(), pattern_loss(&b, &a, tol).unwrap());
        }

        #[test]
        fn stepwise_jumps_sit_at_block_starts(layout in arb_blocks()) {
            if let Some(s) = build(&layout) {
                if s.len() >= 2 {
                    let p = jump_pattern(&s.expected(), 0.0).unwrap();
                    let nonzero: Vec<usize> = p.signs.iter().enumerate()
                        .filter(|(_, &x)| x != 0).map(|(i, _)| i + 2).collect();
                    prop_assert_eq!(nonzero, s.jump_positions());
                    prop_assert_eq!(p, s.pattern());
                }
                prop_assert_eq!(sample_noisy(&s, 0.0, 1).unwrap().values, s.expected());
            }
        }
    }
}
