// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo harness: recovery probabilities, noise sweeps, method
//! comparison and the sign-recovery experiments behind the two bounds.
//!
//! Replicate `r` at noise index `k` draws from ChaCha stream
//! `(k << 32) | r` of the base seed, so results do not depend on how
//! replicates are scheduled across threads.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design_transform::{centered_design_dense, differences, CenteredData};
use crate::error::{FusedError, Result};
use crate::flsa_solver::{flsa_path, FusionPath};
use crate::ic_checker::{ic_magnitudes, JumpSet, SignRecoveryCheck};
use crate::puffer_lasso::ThresholdPath;
use crate::signal_model::{
    jump_pattern, sample_noisy_stream, JumpPattern, StepwiseSignal, DEFAULT_ESTIMATE_TOL,
};

/// Estimator whose solution path is searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Fusion path of the signal approximator in λ₂ (λ₁ = 0).
    Flsa,
    /// Soft-threshold path of the preconditioned lasso.
    Preconditioned,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Flsa => "flsa",
            Method::Preconditioned => "preconditioned",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = FusedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flsa" => Ok(Method::Flsa),
            "preconditioned" => Ok(Method::Preconditioned),
            other => Err(FusedError::param(format!("unknown method {other:?}"))),
        }
    }
}

/// Design of a recovery-probability experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub signal: StepwiseSignal,
    pub sigmas: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub method: Method,
    /// Zero tolerance when reading signs off fitted vectors.
    pub tol: f64,
}

impl ExperimentConfig {
    pub fn new(
        signal: StepwiseSignal,
        sigmas: Vec<f64>,
        replicates: usize,
        seed: u64,
        method: Method,
    ) -> Result<Self> {
        let config = Self {
            signal,
            sigmas,
            replicates,
            seed,
            method,
            tol: DEFAULT_ESTIMATE_TOL,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(FusedError::param("replicates must be >= 1"));
        }
        if self.sigmas.is_empty() {
            return Err(FusedError::param("sigma grid is empty"));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(FusedError::param(format!("sigma must be > 0, got {s}")));
        }
        if self.signal.len() < 2 {
            return Err(FusedError::param("signal must have length >= 2"));
        }
        crate::error::check_nonnegative("tol", self.tol)?;
        if self.replicates as u64 > u32::MAX as u64 || self.sigmas.len() as u64 > u32::MAX as u64 {
            return Err(FusedError::param("too many replicates or noise levels"));
        }
        Ok(())
    }
}

/// RNG stream of replicate `rep` at noise index `sigma_index`.
pub fn replicate_stream(sigma_index: usize, rep: usize) -> u64 {
    ((sigma_index as u64) << 32) | rep as u64
}

/// Binomial proportion with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub stderr: f64,
}

impl Proportion {
    pub fn new(successes: usize, trials: usize) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        Self {
            successes,
            trials,
            estimate: p,
            stderr,
        }
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        Self::new(flags.iter().filter(|&&f| f).count(), flags.len())
    }
}

/// Outcome at a single noise level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaResult {
    pub sigma: f64,
    pub probability: f64,
    pub stderr: f64,
    pub successes: usize,
    pub flags: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub config: ExperimentConfig,
    pub results: Vec<SigmaResult>,
    pub wall_clock_secs: f64,
}

/// One row of a noise sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub probability: f64,
    pub stderr: f64,
}

impl RecoveryResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.results
            .iter()
            .map(|r| SweepRow {
                sigma: r.sigma,
                probability: r.probability,
                stderr: r.stderr,
            })
            .collect()
    }
}

/// Smallest pattern loss along the soft-threshold path and a λ attaining it.
///
/// Sweeps λ downward; each score enters the fit as λ crosses `|w_i|`, so
/// the loss changes only at breakpoints and is tracked incrementally.
pub fn threshold_path_min_loss(path: &ThresholdPath, truth: &JumpPattern) -> Result<(usize, f64)> {
    if path.scores.len() != truth.len() {
        return Err(FusedError::input(format!(
            "path has {} scores, truth pattern has {} entries",
            path.scores.len(),
            truth.len()
        )));
    }
    let mut order: Vec<usize> = (0..path.scores.len()).collect();
    order.sort_by(|&a, &b| path.scores[b].abs().total_cmp(&path.scores[a].abs()));
    let mut loss = truth.jump_count();
    let top = path.max_breakpoint();
    let mut best = (loss, top + 1.0);
    let mut k = 0;
    while k < order.len() {
        let level = path.scores[order[k]].abs();
        if level == 0.0 {
            break;
        }
        while k < order.len() && path.scores[order[k]].abs() == level {
            let i = order[k];
            let s = if path.scores[i] > 0.0 { 1 } else { -1 };
            match truth.signs[i] {
                0 => loss += 1,
                t if t == s => loss -= 1,
                _ => {}
            }
            k += 1;
        }
        let below = if k < order.len() {
            path.scores[order[k]].abs()
        } else {
            0.0
        };
        if loss < best.0 {
            best = (loss, 0.5 * (level + below));
        }
    }
    Ok(best)
}

/// Smallest pattern loss over the linear pieces of a fusion path and the
/// midpoint of a piece attaining it.
pub fn fusion_path_min_loss(path: &FusionPath, truth: &JumpPattern) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, seg) in path.segments().iter().enumerate() {
        let loss = path.segment_pattern(k).disagreements(truth)?;
        if best.is_none_or(|(b, _)| loss < b) {
            best = Some((loss, piece_interior(seg.lambda_start, seg.lambda_end)));
        }
    }
    Ok(best.expect("a fusion path has at least one segment"))
}

fn piece_interior(lo: f64, hi: f64) -> f64 {
    if hi.is_finite() {
        0.5 * (lo + hi)
    } else {
        lo + 1.0
    }
}

fn replicate_success(method: Method, y: &[f64], truth: &JumpPattern) -> Result<bool> {
    let loss = match method {
        Method::Preconditioned => threshold_path_min_loss(&ThresholdPath::new(y)?, truth)?.0,
        Method::Flsa => fusion_path_min_loss(&flsa_path(y)?, truth)?.0,
    };
    Ok(loss == 0)
}

/// Fraction of replicates in which some λ on the method's path recovers
/// the pattern of the true signal exactly, at every configured noise level.
pub fn recovery_probability(config: &ExperimentConfig) -> Result<RecoveryResult> {
    config.validate()?;
    let started = Instant::now();
    let truth = config.signal.pattern();
    let mut results = Vec::with_capacity(config.sigmas.len());
    for (si, &sigma) in config.sigmas.iter().enumerate() {
        let flags = (0..config.replicates)
            .into_par_iter()
            .map(|r| {
                let y = sample_noisy_stream(
                    &config.signal,
                    sigma,
                    config.seed,
                    replicate_stream(si, r),
                )?;
                replicate_success(config.method, &y.values, &truth)
            })
            .collect::<Result<Vec<bool>>>()?;
        let p = Proportion::from_flags(&flags);
        results.push(SigmaResult {
            sigma,
            probability: p.estimate,
            stderr: p.stderr,
            successes: p.successes,
            flags,
        });
    }
    Ok(RecoveryResult {
        config: config.clone(),
        results,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

/// Recovery probability at each noise level of the configured grid.
pub fn sigma_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    Ok(recovery_probability(config)?.rows())
}

/// Per-method selection summary on one observed sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodComparison {
    pub method: Method,
    pub min_pattern_loss: usize,
    pub pattern_lambda: f64,
    pub pattern_fit: Vec<f64>,
    pub l2_lambda: f64,
    pub l2_error: f64,
    pub l2_pattern_loss: usize,
    pub l2_fit: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub methods: Vec<MethodComparison>,
}

/// Exact ℓ₂-optimal λ over a piecewise-affine fit path.
///
/// `pieces` lists `[lo, hi]` intervals on which `fit` is affine in λ.
fn l2_optimal<F>(pieces: &[(f64, f64)], fit: F, truth: &[f64]) -> (f64, f64)
where
    F: Fn(f64) -> Vec<f64>,
{
    let mut best = (f64::INFINITY, 0.0);
    for &(lo, hi) in pieces {
        let other = if hi.is_finite() { hi } else { lo + 1.0 };
        let a = fit(lo);
        let b_end = fit(other);
        let span = other - lo;
        // fit(lo + t) = a + t·slope on the piece
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..a.len() {
            let slope = (b_end[i] - a[i]) / span;
            num += slope * (a[i] - truth[i]);
            den += slope * slope;
        }
        let t = if den > 0.0 { -num / den } else { 0.0 };
        let upper = if hi.is_finite() {
            hi - lo
        } else {
            f64::INFINITY
        };
        let lam = lo + t.clamp(0.0, upper);
        let err = l2_distance(&fit(lam), truth);
        if err < best.0 {
            best = (err, lam);
        }
    }
    (best.1, best.0)
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Pattern-loss-optimal and ℓ₂-optimal selections on both paths.
pub fn compare_methods(y: &[f64], truth: &StepwiseSignal) -> Result<ComparisonReport> {
    if y.len() != truth.len() {
        return Err(FusedError::input(format!(
            "sequence has length {}, signal has length {}",
            y.len(),
            truth.len()
        )));
    }
    let mu_star = truth.expected();
    let truth_pattern = truth.pattern();
    let tol = DEFAULT_ESTIMATE_TOL;

    let fusion = flsa_path(y)?;
    let (loss, lam) = fusion_path_min_loss(&fusion, &truth_pattern)?;
    let pieces: Vec<(f64, f64)> = fusion
        .segments()
        .iter()
        .map(|s| (s.lambda_start, s.lambda_end))
        .collect();
    let flsa_at = |l: f64| fusion.evaluate_segment(fusion.segment_index(l), l);
    let (l2_lam, l2_err) = l2_optimal(&pieces, flsa_at, &mu_star);
    let l2_fit = flsa_at(l2_lam);
    let flsa_report = MethodComparison {
        method: Method::Flsa,
        min_pattern_loss: loss,
        pattern_lambda: lam,
        pattern_fit: flsa_at(lam),
        l2_lambda: l2_lam,
        l2_error: l2_err,
        l2_pattern_loss: jump_pattern(&l2_fit, tol)?.disagreements(&truth_pattern)?,
        l2_fit,
    };

    let threshold = ThresholdPath::new(y)?;
    let (loss, lam) = threshold_path_min_loss(&threshold, &truth_pattern)?;
    let mut bps = threshold.distinct_breakpoints();
    bps.reverse();
    let mut pieces = Vec::with_capacity(bps.len() + 1);
    let mut lo = 0.0;
    for &b in &bps {
        pieces.push((lo, b));
        lo = b;
    }
    pieces.push((lo, f64::INFINITY));
    let centered = CenteredData::new(y)?;
    let basis = crate::design_transform::DifferenceBasis::new(y.len())?;
    let pre_at = |l: f64| {
        let theta = threshold.theta_at(l);
        let level = centered.y_bar - basis.mean_dot(&theta).expect("length checked");
        let mut mu = basis.apply_x(&theta).expect("length checked");
        mu.iter_mut().for_each(|m| *m += level);
        mu
    };
    let (l2_lam, l2_err) = l2_optimal(&pieces, pre_at, &mu_star);
    let l2_fit = pre_at(l2_lam);
    let pre_report = MethodComparison {
        method: Method::Preconditioned,
        min_pattern_loss: loss,
        pattern_lambda: lam,
        pattern_fit: pre_at(lam),
        l2_lambda: l2_lam,
        l2_error: l2_err,
        l2_pattern_loss: jump_pattern(&l2_fit, tol)?.disagreements(&truth_pattern)?,
        l2_fit,
    };

    Ok(ComparisonReport {
        methods: vec![flsa_report, pre_report],
    })
}

/// Empirical frequency of an event at one λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaFrequency {
    pub lambda: f64,
    pub frequency: f64,
    pub stderr: f64,
}

fn frequencies(lambdas: &[f64], hits: &[Vec<bool>]) -> Vec<LambdaFrequency> {
    lambdas
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let count = hits.iter().filter(|h| h[j]).count();
            let p = Proportion::new(count, hits.len());
            LambdaFrequency {
                lambda,
                frequency: p.estimate,
                stderr: p.stderr,
            }
        })
        .collect()
}

/// Fixed-λ sign-recovery frequency of the preconditioned estimator,
/// paired with the corresponding lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lambda: f64,
    pub sigma: f64,
    pub frequency: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `min |jump| ≥ 2λ`
    pub valid: bool,
}

/// For every λ, the share of replicates whose preconditioned fit at that
/// λ has exactly the true jump signs.
pub fn preconditioned_sign_frequency(
    signal: &StepwiseSignal,
    sigma: f64,
    lambdas: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<BoundCheck>> {
    let config = ExperimentConfig::new(
        signal.clone(),
        vec![sigma],
        replicates,
        seed,
        Method::Preconditioned,
    )?;
    for &l in lambdas {
        crate::error::check_nonnegative("lambda", l)?;
    }
    let truth = signal.pattern();
    let hits = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let y = sample_noisy_stream(signal, sigma, seed, replicate_stream(0, r))?;
            let w = differences(&y.values);
            Ok(lambdas
                .iter()
                .map(|&lam| {
                    w.iter().zip(&truth.signs).all(|(&wi, &t)| {
                        let s = crate::puffer_lasso::shrink(wi, lam);
                        crate::signal_model::sign_with_tol(s, 0.0) == t
                    })
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<bool>>>>()?;
    frequencies(lambdas, &hits)
        .into_iter()
        .map(|f| {
            let b =
                crate::puffer_lasso::preconditioned_recovery_bound_for(signal, f.lambda, sigma)?;
            Ok(BoundCheck {
                lambda: f.lambda,
                sigma,
                frequency: f.frequency,
                stderr: f.stderr,
                bound: b.value,
                valid: b.valid,
            })
        })
        .collect()
}

/// Sign-recovery frequencies of the lasso on the centred difference design
/// when the condition fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityResult {
    pub jumps: JumpSet,
    pub jump_size: f64,
    pub sigma: f64,
    pub replicates: usize,
    pub seed: u64,
    pub max_signed: f64,
    pub per_lambda: Vec<LambdaFrequency>,
    /// Share of draws recovered by at least one grid λ.
    pub path_wide: Proportion,
}

/// Geometric λ grid spanning `[0.05, 5]·σ·√n`.
pub fn default_lambda_grid(sigma: f64, n: usize, points: usize) -> Vec<f64> {
    let scale = sigma * (n as f64).sqrt();
    let (lo, hi) = (0.05 * scale, 5.0 * scale);
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64))
        .collect()
}

/// Draws `y = μ* + ε` for a signal with the given jumps (all of size
/// `jump_size`), centres it, and records at each λ whether the lasso on the
/// centred design recovers the signs of the differences exactly.
///
/// Refuses jump sets for which the condition holds.
pub fn ic_necessity_experiment(
    jumps: &JumpSet,
    jump_size: f64,
    sigma: f64,
    lambdas: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<NecessityResult> {
    if !(jump_size.is_finite() && jump_size > 0.0) {
        return Err(FusedError::param(format!(
            "jump size must be > 0, got {jump_size}"
        )));
    }
    if lambdas.is_empty() {
        return Err(FusedError::param("lambda grid is empty"));
    }
    for &l in lambdas {
        crate::error::check_nonnegative("lambda", l)?;
    }
    let report = ic_magnitudes(jumps)?;
    if report.max_signed < 1.0 - crate::ic_checker::IC_STRICT_MARGIN {
        return Err(FusedError::InvalidSetup(format!(
            "condition holds (max signed magnitude {:.6})",
            report.max_signed
        )));
    }
    let signal = jumps.to_signal(jump_size)?;
    let config =
        ExperimentConfig::new(signal.clone(), vec![sigma], replicates, seed, Method::Flsa)?;
    let design: DMatrix<f64> = centered_design_dense(jumps.n)?;
    let theta_star = differences(&signal.expected());
    let checker = SignRecoveryCheck::new(&design, &theta_star)?;
    let hits = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let y = sample_noisy_stream(&signal, sigma, seed, replicate_stream(0, r))?;
            let centered = CenteredData::new(&y.values)?;
            let eps = checker.noise(&centered.y_tilde)?;
            Ok(checker.check_noise(&eps, lambdas))
        })
        .collect::<Result<Vec<Vec<bool>>>>()?;
    let path_wide = hits.iter().filter(|h| h.iter().any(|&x| x)).count();
    Ok(NecessityResult {
        jumps: jumps.clone(),
        jump_size,
        sigma,
        replicates,
        seed,
        max_signed: report.max_signed,
        per_lambda: frequencies(lambdas, &hits),
        path_wide: Proportion::new(path_wide, replicates),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{benchmark_signal, sample_noisy};
    use proptest::prelude::*;

    fn small_signal() -> StepwiseSignal {
        StepwiseSignal::from_triples(&[(1, 4, 0.0), (5, 8, 2.0), (9, 12, -1.0)]).unwrap()
    }

    #[test]
    fn config_validation() {
        let s = small_signal();
        assert!(ExperimentConfig::new(s.clone(), vec![0.1], 0, 1, Method::Flsa).is_err());
        assert!(ExperimentConfig::new(s.clone(), vec![], 10, 1, Method::Flsa).is_err());
        assert!(ExperimentConfig::new(s.clone(), vec![0.0], 10, 1, Method::Flsa).is_err());
        assert!(ExperimentConfig::new(s, vec![0.1], 10, 1, Method::Flsa).is_ok());
        assert_eq!("flsa".parse::<Method>().unwrap(), Method::Flsa);
        assert!("lars".parse::<Method>().is_err());
    }

    #[test]
    fn low_noise_always_recovers() {
        let cfg = ExperimentConfig::new(
            benchmark_signal(),
            vec![0.01],
            50,
            3,
            Method::Preconditioned,
        )
        .unwrap();
        let r = recovery_probability(&cfg).unwrap();
        assert_eq!(r.results[0].probability, 1.0);
        assert_eq!(r.results[0].flags.len(), 50);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = ExperimentConfig::new(
            benchmark_signal(),
            vec![0.25, 0.3],
            40,
            11,
            Method::Preconditioned,
        )
        .unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| recovery_probability(&cfg)).unwrap();
        let b = four.install(|| recovery_probability(&cfg)).unwrap();
        assert_eq!(a.results, b.results);
    }

    #[test]
    fn single_point_sweep_matches_probability() {
        let cfg = ExperimentConfig::new(small_signal(), vec![0.4], 60, 2, Method::Flsa).unwrap();
        let rows = sigma_sweep(&cfg).unwrap();
        let r = recovery_probability(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].probability, r.results[0].probability);
    }

    #[test]
    fn comparison_on_truth_is_exact() {
        let s = small_signal();
        let report = compare_methods(&s.expected(), &s).unwrap();
        for m in &report.methods {
            assert_eq!(m.min_pattern_loss, 0, "{}", m.method);
            assert!(m.l2_error < 1e-10, "{}: {}", m.method, m.l2_error);
            assert_eq!(m.l2_pattern_loss, 0);
        }
        assert!(compare_methods(&[0.0; 3], &s).is_err());
    }

    #[test]
    fn l2_selection_beats_grid() {
        let s = benchmark_signal();
        let y = sample_noisy(&s, 0.25, 9).unwrap().values;
        let report = compare_methods(&y, &s).unwrap();
        let mu = s.expected();
        let flsa = flsa_path(&y).unwrap();
        let pre = &report.methods[1];
        for k in 0..400 {
            let lam = 0.01 * k as f64;
            let f = crate::flsa_solver::flsa_fit(&flsa, lam).unwrap();
            assert!(report.methods[0].l2_error <= l2_distance(&f, &mu) + 1e-9);
            let p = crate::puffer_lasso::preconditioned_fit(&y, lam).unwrap();
            assert!(pre.l2_error <= l2_distance(&p.mu_hat, &mu) + 1e-9);
        }
    }

    #[test]
    fn necessity_gate() {
        let ok = JumpSet::new(20, vec![5, 10], vec![1, -1]).unwrap();
        let grid = default_lambda_grid(0.5, 20, 5);
        assert!(matches!(
            ic_necessity_experiment(&ok, 1.0, 0.5, &grid, 10, 1),
            Err(FusedError::InvalidSetup(_))
        ));
        let bad = JumpSet::new(20, vec![5, 10], vec![1, 1]).unwrap();
        let r = ic_necessity_experiment(&bad, 1.0, 0.5, &grid, 50, 1).unwrap();
        assert_eq!(r.per_lambda.len(), 5);
        assert!(r.max_signed >= 1.0 - 1e-9);
    }

    // brute force: evaluate the pattern on a dense λ grid
    fn dense_grid_success(path: &ThresholdPath, truth: &JumpPattern) -> bool {
        let top = path.max_breakpoint() + 1.0;
        (0..=4000).any(|k| {
            let lam = top * k as f64 / 4000.0;
            let theta = path.theta_at(lam);
            theta
                .iter()
                .zip(&truth.signs)
                .all(|(t, &s)| crate::signal_model::sign_with_tol(*t, 0.0) == s)
        })
    }

    fn candidate_success(path: &ThresholdPath, truth: &JumpPattern) -> bool {
        path.candidate_lambdas().iter().any(|&lam| {
            path.theta_at(lam)
                .iter()
                .zip(&truth.signs)
                .all(|(t, &s)| crate::signal_model::sign_with_tol(*t, 0.0) == s)
        })
    }

    proptest! {
        #[test]
        fn path_search_is_exact(seed in 0u64..10_000, sigma in 0.05f64..1.0) {
            let s = small_signal();
            let y = sample_noisy(&s, sigma, seed).unwrap().values;
            let truth = s.pattern();
            let path = ThresholdPath::new(&y).unwrap();
            let (loss, lam) = threshold_path_min_loss(&path, &truth).unwrap();
            prop_assert_eq!(loss == 0, candidate_success(&path, &truth));
            if dense_grid_success(&path, &truth) {
                prop_assert_eq!(loss, 0);
            }
            let fit = path.theta_at(lam);
            let signs: Vec<i8> = fit.iter().map(|t| crate::signal_model::sign_with_tol(*t, 0.0)).collect();
            prop_assert_eq!(JumpPattern { signs }.disagreements(&truth).unwrap(), loss);

            let fusion = flsa_path(&y).unwrap();
            let (floss, flam) = fusion_path_min_loss(&fusion, &truth).unwrap();
            let fit = crate::flsa_solver::flsa_fit(&fusion, flam).unwrap();
            prop_assert_eq!(jump_pattern(&fit, 1e-9).unwrap().disagreements(&truth).unwrap(), floss);
            for k in 0..200 {
                let l = fusion.final_lambda() * 1.1 * k as f64 / 200.0;
                let f = crate::flsa_solver::flsa_fit(&fusion, l).unwrap();
                prop_assert!(jump_pattern(&f, 1e-9).unwrap().disagreements(&truth).unwrap() >= floss);
            }
        }
    }
}
