// SPDX-License-Identifier: MIT OR Apache-2.0

//! Preconditioned fused lasso.
//!
//! Writing the centred design as `X̃ = U·diag(D)·Vᵀ`, the preconditioner
//! `F = U·diag(D)⁻¹·Uᵀ` maps it to `Z = FX̃ = UVᵀ`, whose columns are
//! orthonormal. The lasso on `(Z, a = FỸ)` is then solved exactly by
//! soft-thresholding the scores `w = Zᵀa`.
//!
//! `Ỹ` always lies in the column space of `X̃` (both span the mean-zero
//! vectors), so `w` is the exact least-squares fit of `Ỹ` on `X̃`, which is
//! the vector of successive differences of `y`. [`precondition_scores`]
//! uses that O(n) identity; [`PufferDecomposition::scores`] computes the
//! same vector through the SVD and serves as its check.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design_transform::{centered_design_dense, differences, reconstruct_mu, CenteredData};
use crate::error::{check_nonnegative, FusedError, Result};
use crate::signal_model::StepwiseSignal;

/// SVD factors of the centred design `X̃` for one sequence length.
#[derive(Clone, Debug)]
pub struct PufferDecomposition {
    n: usize,
    u: DMatrix<f64>,
    d: Vec<f64>,
    v: DMatrix<f64>,
}

impl PufferDecomposition {
    /// Decomposes `X̃` for length `n`.
    ///
    /// Singular values come out in descending order. Each right singular
    /// vector is flipped so that its largest-magnitude entry is nonnegative
    /// (the matching left vector is flipped with it).
    pub fn new(n: usize) -> Result<Self> {
        let xc = centered_design_dense(n)?;
        let mut svd = nalgebra::SVD::new(xc, true, true);
        svd.sort_by_singular_values();
        let mut u = svd
            .u
            .ok_or_else(|| FusedError::Singular("svd did not return U".into()))?;
        let mut v = svd
            .v_t
            .ok_or_else(|| FusedError::Singular("svd did not return Vᵀ".into()))?
            .transpose();
        let d: Vec<f64> = svd.singular_values.iter().copied().collect();
        if let Some(&smallest) = d.last() {
            if smallest <= 0.0 {
                return Err(FusedError::RankDeficient(format!(
                    "centred design for n={n} has a zero singular value"
                )));
            }
        }
        for k in 0..d.len() {
            let col = v.column(k);
            let pivot = col
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(0.0);
            if pivot < 0.0 {
                v.column_mut(k).neg_mut();
                u.column_mut(k).neg_mut();
            }
        }
        Ok(Self { n, u, d, v })
    }

    /// Shared decomposition for `n`, computed at most once per process.
    pub fn cached(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<PufferDecomposition>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(hit) = cache.read().expect("decomposition cache poisoned").get(&n) {
            return Ok(Arc::clone(hit));
        }
        let fresh = Arc::new(Self::new(n)?);
        let mut guard = cache.write().expect("decomposition cache poisoned");
        Ok(Arc::clone(guard.entry(n).or_insert(fresh)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Left singular vectors, `n × (n−1)`.
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.d
    }

    /// Right singular vectors, `(n−1) × (n−1)`.
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn min_singular_value(&self) -> f64 {
        self.d.last().copied().unwrap_or(f64::NAN)
    }

    /// `U·diag(D)·Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&DVector::from_column_slice(&self.d)) * self.v.transpose()
    }

    /// The preconditioner `F = U·diag(D)⁻¹·Uᵀ`.
    pub fn puffer_matrix(&self) -> DMatrix<f64> {
        let inv = DVector::from_iterator(self.d.len(), self.d.iter().map(|s| 1.0 / s));
        &self.u * DMatrix::from_diagonal(&inv) * self.u.transpose()
    }

    /// Preconditioned design `Z = FX̃`, formed as `F` times the dense design.
    pub fn preconditioned_design(&self) -> Result<DMatrix<f64>> {
        Ok(self.puffer_matrix() * centered_design_dense(self.n)?)
    }

    /// Scores `w = Zᵀa` with `a = FỸ`, through the factors: `w = V·D⁻¹·UᵀỸ`.
    pub fn scores(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n {
            return Err(FusedError::input(format!(
                "response has length {}, decomposition is for n={}",
                y.len(),
                self.n
            )));
        }
        let centred = CenteredData::new(y)?;
        let mut proj = self.u.transpose() * DVector::from_column_slice(&centred.y_tilde);
        for (p, s) in proj.iter_mut().zip(&self.d) {
            *p /= s;
        }
        Ok((&self.v * proj).iter().copied().collect())
    }
}

/// Decomposition of `X̃` for length `n`.
pub fn svd_centered_design(n: usize) -> Result<PufferDecomposition> {
    PufferDecomposition::new(n)
}

pub(crate) fn shrink(x: f64, lam: f64) -> f64 {
    if x > lam {
        x - lam
    } else if x < -lam {
        x + lam
    } else {
        0.0
    }
}

/// Soft threshold `SH_λ(x)`.
pub fn soft_threshold(x: f64, lam: f64) -> Result<f64> {
    check_nonnegative("lambda", lam)?;
    Ok(shrink(x, lam))
}

/// Scores `w = Zᵀa` of the preconditioned problem, via the O(n)
/// successive-differences identity.
pub fn precondition_scores(y: &[f64]) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(FusedError::input(format!(
            "need at least 2 observations, got {}",
            y.len()
        )));
    }
    Ok(differences(y))
}

/// Soft-threshold solution path of the preconditioned problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPath {
    pub scores: Vec<f64>,
    /// `|w|` sorted descending; the fit is linear in λ between consecutive entries.
    pub breakpoints: Vec<f64>,
}

impl ThresholdPath {
    pub fn new(y: &[f64]) -> Result<Self> {
        Ok(Self::from_scores(precondition_scores(y)?))
    }

    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut breakpoints: Vec<f64> = scores.iter().map(|w| w.abs()).collect();
        breakpoints.sort_by(|a, b| b.total_cmp(a));
        Self {
            scores,
            breakpoints,
        }
    }

    /// `θ̃(λ) = SH_λ(w)` entrywise.
    pub fn theta_at(&self, lam: f64) -> Vec<f64> {
        self.scores.iter().map(|&w| shrink(w, lam)).collect()
    }

    pub fn max_breakpoint(&self) -> f64 {
        self.breakpoints.first().copied().unwrap_or(0.0)
    }

    /// Distinct breakpoints, descending, ignoring zero.
    pub fn distinct_breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &b in &self.breakpoints {
            if b > 0.0 && out.last() != Some(&b) {
                out.push(b);
            }
        }
        out
    }

    /// One λ inside every linear piece: above the largest breakpoint, the
    /// midpoints between consecutive distinct breakpoints, and half the
    /// smallest nonzero breakpoint.
    pub fn candidate_lambdas(&self) -> Vec<f64> {
        let bps = self.distinct_breakpoints();
        let Some(&top) = bps.first() else {
            return vec![0.0];
        };
        let mut out = Vec::with_capacity(bps.len() + 1);
        out.push(top + 1.0);
        out.extend(bps.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        out.push(0.5 * bps[bps.len() - 1]);
        out
    }

    /// Interval `[lo, hi]` of the linear piece containing `lam`.
    pub fn piece_bounds(&self, lam: f64) -> (f64, f64) {
        let bps = self.distinct_breakpoints();
        let mut hi = f64::INFINITY;
        for &b in &bps {
            if b <= lam {
                return (b, hi);
            }
            hi = b;
        }
        (0.0, hi)
    }
}

/// Output of [`preconditioned_fit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreconditionedFit {
    pub lambda: f64,
    pub theta_tilde: Vec<f64>,
    pub mu_hat: Vec<f64>,
    pub breakpoints: Vec<f64>,
}

/// Preconditioned fused lasso at a single λ.
pub fn preconditioned_fit(y: &[f64], lam: f64) -> Result<PreconditionedFit> {
    check_nonnegative("lambda", lam)?;
    let path = ThresholdPath::new(y)?;
    let theta_tilde = path.theta_at(lam);
    let mu_hat = reconstruct_mu(&theta_tilde, y)?;
    Ok(PreconditionedFit {
        lambda: lam,
        theta_tilde,
        mu_hat,
        breakpoints: path.breakpoints,
    })
}

/// Lower bound `1 − 2n·exp(−λ² / (8σ²))` on the probability that the
/// preconditioned fit at λ has the true jump signs. Not clamped; values
/// at or below zero mean the bound says nothing.
pub fn preconditioned_recovery_bound(lam: f64, sigma: f64, n: usize) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(FusedError::param(format!("sigma must be > 0, got {sigma}")));
    }
    check_nonnegative("lambda", lam)?;
    Ok(1.0 - 2.0 * n as f64 * (-(lam * lam) / (8.0 * sigma * sigma)).exp())
}

/// Bound value plus whether its jump-size hypothesis holds for a signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryBound {
    pub value: f64,
    /// `min |jump| ≥ 2λ` (vacuously true without jumps).
    pub valid: bool,
}

pub fn preconditioned_recovery_bound_for(
    signal: &StepwiseSignal,
    lam: f64,
    sigma: f64,
) -> Result<RecoveryBound> {
    let value = preconditioned_recovery_bound(lam, sigma, signal.len())?;
    let valid = signal.min_jump().is_none_or(|m| m >= 2.0 * lam);
    Ok(RecoveryBound { value, valid })
}
