// SPDX-License-Identifier: MIT OR Apache-2.0

//! Irrepresentable-condition diagnostics for the difference design.
//!
//! For the centred design `X̃`, the condition at a non-jump column `j`
//! reduces to the coefficients `b̂_j` of regressing `X_j` on an intercept
//! and the jump columns `X_S`. The normal matrix `Z_SᵀZ_S` of that
//! regression has entries `n − max(c_{k−1}, c_{l−1})` (with `c_0 = 0`, `c`
//! the column indices of the jumps), i.e. the "max-index" structure whose
//! inverse is tridiagonal in closed form ([`tridiag_inverse`]). No
//! numerical factorisation is needed.
//!
//! Jump sets are given in 1-based signal positions `p` (μ*_p ≠ μ*_{p−1}).
//! The design column carrying that jump has 1-based index `p − 1`.
//! In positions the closed forms read:
//!
//! * `p < p_1`: `‖b̂‖₁ = (p − 1)/(p_1 − 1)`
//! * `p > p_s`: `‖b̂‖₁ = (n − p + 1)/(n − p_s + 1)`
//! * `p_k < p < p_{k+1}`: `b̂` has `c = (p_{k+1} − p)/(p_{k+1} − p_k)` on jump
//!   `k` and `1 − c` on jump `k + 1`, so `‖b̂‖₁ = 1` and the signed value is
//!   `|c·s_k + (1 − c)·s_{k+1}|`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FusedError, Result};
use crate::signal_model::StepwiseSignal;

/// Margin separating "< 1" from "= 1" in condition verdicts.
pub const IC_STRICT_MARGIN: f64 = 1e-9;

/// Relative eigenvalue floor below which `X_SᵀX_S` counts as singular.
const RANK_TOL: f64 = 1e-12;

/// Jump positions and directions of a blocky signal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpSet {
    pub n: usize,
    /// 1-based positions in `2..=n`, strictly increasing.
    #[serde(rename = "S")]
    pub positions: Vec<usize>,
    pub signs: Vec<i8>,
}

impl JumpSet {
    pub fn new(n: usize, positions: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if positions.len() != signs.len() {
            return Err(FusedError::input(format!(
                "{} positions but {} signs",
                positions.len(),
                signs.len()
            )));
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(FusedError::input(format!("jump sign must be ±1, got {s}")));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FusedError::input(
                "jump positions must be strictly increasing",
            ));
        }
        if let (Some(&first), Some(&last)) = (positions.first(), positions.last()) {
            if first < 2 || last > n {
                return Err(FusedError::input(format!(
                    "jump positions must lie in 2..={n}"
                )));
            }
        }
        Ok(Self {
            n,
            positions,
            signs,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Signed difference vector θ̃* up to scale: ±1 at jumps, 0 elsewhere (length n−1).
    pub fn sign_vector(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n.saturating_sub(1)];
        for (&p, &s) in self.positions.iter().zip(&self.signs) {
            v[p - 2] = s as f64;
        }
        v
    }

    /// Same positions as a stepwise signal whose jumps all have size `size`.
    pub fn to_signal(&self, size: f64) -> Result<StepwiseSignal> {
        let mut triples = Vec::with_capacity(self.len() + 1);
        let mut level = 0.0;
        let mut start = 1;
        for (&p, &s) in self.positions.iter().zip(&self.signs) {
            triples.push((start, p - 1, level));
            level += s as f64 * size;
            start = p;
        }
        triples.push((start, self.n, level));
        StepwiseSignal::from_triples(&triples)
    }
}

/// Jump set of a stepwise signal (empty for a single block).
pub fn support_from_signal(signal: &StepwiseSignal) -> JumpSet {
    JumpSet {
        n: signal.len(),
        positions: signal.jump_positions(),
        signs: signal.jump_signs(),
    }
}

/// Closed-form inverse of a "max-index" matrix `A_ij = a_{max(i,j)}`.
///
/// The inverse is symmetric tridiagonal; `off[i]` holds entry `(i, i+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalInverse {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl TridiagonalInverse {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn superdiag(&self) -> &[f64] {
        &self.off
    }

    pub fn subdiag(&self) -> &[f64] {
        &self.off
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let k = self.dim();
        (0..k)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < k {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let k = self.dim();
        DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                0.0
            }
        })
    }
}

/// Dense max-index matrix `A_ij = a_{max(i,j)}`.
pub fn max_index_matrix(a: &[f64]) -> DMatrix<f64> {
    let k = a.len();
    DMatrix::from_fn(k, k, |i, j| a[i.max(j)])
}

/// Inverts `A_ij = a_{max(i,j)}` in closed form.
///
/// Needs neighbouring entries of `a` to differ and the last entry to be nonzero.
pub fn tridiag_inverse(a: &[f64]) -> Result<TridiagonalInverse> {
    let k = a.len();
    if k == 0 {
        return Err(FusedError::input("empty coefficient vector"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(FusedError::input("non-finite coefficient"));
    }
    if a[k - 1] == 0.0 {
        return Err(FusedError::Singular("last coefficient is zero".into()));
    }
    if let Some(i) = a.windows(2).position(|w| w[0] == w[1]) {
        return Err(FusedError::Singular(format!(
            "coefficients {} and {} are equal",
            i + 1,
            i + 2
        )));
    }
    if k == 1 {
        return Ok(TridiagonalInverse {
            diag: vec![1.0 / a[0]],
            off: vec![],
        });
    }
    // gaps[i] = a_i − a_{i+1}
    let gaps: Vec<f64> = a.windows(2).map(|w| w[0] - w[1]).collect();
    let mut diag = vec![0.0; k];
    diag[0] = 1.0 / gaps[0];
    for j in 1..k - 1 {
        diag[j] = (a[j - 1] - a[j + 1]) / (gaps[j - 1] * gaps[j]);
    }
    diag[k - 1] = a[k - 2] / (gaps[k - 2] * a[k - 1]);
    let off = gaps.iter().map(|g| -1.0 / g).collect();
    Ok(TridiagonalInverse { diag, off })
}

/// Regression coefficients `b̂_j` (intercept dropped) for the column that
/// carries position `position`, computed through the closed-form inverse.
pub fn regression_coefficients(jumps: &JumpSet, position: usize) -> Result<Vec<f64>> {
    let inv = normal_inverse(jumps)?;
    Ok(coefficients_with(&inv, jumps, position))
}

fn normal_inverse(jumps: &JumpSet) -> Result<TridiagonalInverse> {
    if jumps.is_empty() {
        return Err(FusedError::input("jump set is empty"));
    }
    let n = jumps.n as f64;
    let mut a = Vec::with_capacity(jumps.len() + 1);
    a.push(n);
    a.extend(jumps.positions.iter().map(|&p| n - (p - 1) as f64));
    tridiag_inverse(&a)
}

fn coefficients_with(inv: &TridiagonalInverse, jumps: &JumpSet, position: usize) -> Vec<f64> {
    let n = jumps.n as f64;
    let col = position - 1;
    let mut rhs = Vec::with_capacity(jumps.len() + 1);
    rhs.push(n - col as f64);
    rhs.extend(jumps.positions.iter().map(|&p| n - col.max(p - 1) as f64));
    let mut v = inv.mul_vec(&rhs);
    v.remove(0);
    v
}

/// Per-column condition magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ICEntry {
    /// 1-based signal position of the non-jump column.
    pub position: usize,
    /// `|b̂_jᵀ sign(θ̃*_S)|`
    pub signed: f64,
    /// `‖b̂_j‖₁`
    pub l1: f64,
}

/// Irrepresentable-condition summary for one jump set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ICReport {
    pub n: usize,
    #[serde(rename = "S")]
    pub positions: Vec<usize>,
    pub signs: Vec<i8>,
    pub max_signed: f64,
    pub max_l1: f64,
    pub eta: f64,
    pub holds: bool,
    pub strong_holds: bool,
    pub entries: Vec<ICEntry>,
}

impl ICReport {
    pub fn entry(&self, position: usize) -> Option<&ICEntry> {
        self.entries.iter().find(|e| e.position == position)
    }
}

/// Evaluates the condition and its sign-free version at every non-jump column.
pub fn ic_magnitudes(jumps: &JumpSet) -> Result<ICReport> {
    if jumps.n < 3 {
        return Err(FusedError::input(format!("need n >= 3, got {}", jumps.n)));
    }
    let inv = normal_inverse(jumps)?;
    let mut entries = Vec::with_capacity(jumps.n - 1 - jumps.len());
    let mut next_jump = jumps.positions.iter().peekable();
    for position in 2..=jumps.n {
        if next_jump.peek() == Some(&&position) {
            next_jump.next();
            continue;
        }
        let b = coefficients_with(&inv, jumps, position);
        let signed = b
            .iter()
            .zip(&jumps.signs)
            .map(|(x, &s)| x * s as f64)
            .sum::<f64>()
            .abs();
        let l1 = b.iter().map(|x| x.abs()).sum();
        entries.push(ICEntry {
            position,
            signed,
            l1,
        });
    }
    let max_signed = entries.iter().map(|e| e.signed).fold(0.0, f64::max);
    let max_l1 = entries.iter().map(|e| e.l1).fold(0.0, f64::max);
    Ok(ICReport {
        n: jumps.n,
        positions: jumps.positions.clone(),
        signs: jumps.signs.clone(),
        max_signed,
        max_l1,
        eta: 1.0 - max_signed,
        holds: max_signed < 1.0 - IC_STRICT_MARGIN,
        strong_holds: max_l1 < 1.0 - IC_STRICT_MARGIN,
        entries,
    })
}

/// Closed-form `(signed, l1)` magnitudes at a non-jump position.
pub fn closed_form_magnitudes(jumps: &JumpSet, position: usize) -> Result<(f64, f64)> {
    if jumps.is_empty() {
        return Err(FusedError::input("jump set is empty"));
    }
    if jumps.positions.contains(&position) || position < 2 || position > jumps.n {
        return Err(FusedError::input(format!(
            "position {position} is not a non-jump column"
        )));
    }
    let n = jumps.n as f64;
    let p = position as f64;
    let first = jumps.positions[0] as f64;
    let last = *jumps.positions.last().unwrap() as f64;
    if p < first {
        let v = (p - 1.0) / (first - 1.0);
        return Ok((v, v));
    }
    if p > last {
        let v = (n - p + 1.0) / (n - last + 1.0);
        return Ok((v, v));
    }
    let k = jumps.positions.partition_point(|&q| q < position) - 1;
    let (lo, hi) = (jumps.positions[k] as f64, jumps.positions[k + 1] as f64);
    let c = (hi - p) / (hi - lo);
    let signed = (c * jumps.signs[k] as f64 + (1.0 - c) * jumps.signs[k + 1] as f64).abs();
    Ok((signed, 1.0))
}

/// Verdicts read off the jump geometry alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralVerdict {
    pub strong_holds: bool,
    pub ic_holds: bool,
}

/// Structural characterisation: the sign-free condition holds iff all jumps
/// are consecutive; the condition itself holds iff, in addition, every
/// plateau of length ≥ 2 between two jumps is entered and left in opposite
/// directions.
pub fn structural_ic(jumps: &JumpSet) -> Result<StructuralVerdict> {
    if jumps.is_empty() {
        return Err(FusedError::input("jump set is empty"));
    }
    let consecutive = jumps.positions.windows(2).all(|w| w[1] - w[0] == 1);
    let opposite_across_plateaus = jumps
        .positions
        .windows(2)
        .zip(jumps.signs.windows(2))
        .all(|(p, s)| p[1] - p[0] < 2 || s[0] != s[1]);
    Ok(StructuralVerdict {
        strong_holds: consecutive,
        ic_holds: consecutive || opposite_across_plateaus,
    })
}

/// Precomputed sign-recovery test for a fixed design and true coefficient vector.
#[derive(Clone, Debug)]
pub struct SignRecoveryCheck {
    support: Vec<usize>,
    off_support: Vec<usize>,
    support_signs: DVector<f64>,
    beta_support: DVector<f64>,
    gram_inv: DMatrix<f64>,
    cross: DMatrix<f64>,
    x_support: DMatrix<f64>,
    x_off: DMatrix<f64>,
    design: DMatrix<f64>,
    beta: DVector<f64>,
}

impl SignRecoveryCheck {
    pub fn new(x: &DMatrix<f64>, beta_star: &[f64]) -> Result<Self> {
        if x.ncols() != beta_star.len() {
            return Err(FusedError::input(format!(
                "design has {} columns, coefficient vector has {}",
                x.ncols(),
                beta_star.len()
            )));
        }
        let support: Vec<usize> = (0..beta_star.len())
            .filter(|&j| beta_star[j] != 0.0)
            .collect();
        let off_support: Vec<usize> = (0..beta_star.len())
            .filter(|&j| beta_star[j] == 0.0)
            .collect();
        let x_support = x.select_columns(&support);
        let x_off = x.select_columns(&off_support);
        let gram = x_support.transpose() * &x_support;
        let gram_inv = if support.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            let eig = gram.clone().symmetric_eigenvalues();
            if eig.min() <= RANK_TOL * eig.max().max(1.0) {
                return Err(FusedError::RankDeficient(format!(
                    "smallest eigenvalue of X_SᵀX_S is {:e}",
                    eig.min()
                )));
            }
            gram.cholesky()
                .ok_or_else(|| FusedError::RankDeficient("X_SᵀX_S is not invertible".into()))?
                .inverse()
        };
        let cross = x_off.transpose() * &x_support * &gram_inv;
        let support_signs = DVector::from_iterator(
            support.len(),
            support.iter().map(|&j| beta_star[j].signum()),
        );
        let beta_support =
            DVector::from_iterator(support.len(), support.iter().map(|&j| beta_star[j]));
        Ok(Self {
            support,
            off_support,
            support_signs,
            beta_support,
            gram_inv,
            cross,
            x_support,
            x_off,
            design: x.clone(),
            beta: DVector::from_column_slice(beta_star),
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn off_support(&self) -> &[usize] {
        &self.off_support
    }

    /// Noise `ε = y − Xβ*` implied by a response.
    pub fn noise(&self, y: &[f64]) -> Result<DVector<f64>> {
        if y.len() != self.design.nrows() {
            return Err(FusedError::input(format!(
                "response has length {}, design has {} rows",
                y.len(),
                self.design.nrows()
            )));
        }
        Ok(DVector::from_column_slice(y) - &self.design * &self.beta)
    }

    /// Sign recovery verdict at each λ for a single noise vector.
    pub fn check_noise(&self, eps: &DVector<f64>, lams: &[f64]) -> Vec<bool> {
        let xs_eps = self.x_support.transpose() * eps;
        let xoff_eps = self.x_off.transpose() * eps;
        lams.iter()
            .map(|&lam| {
                let w = &xs_eps - &self.support_signs * lam;
                let r1 = &self.cross * &w - &xoff_eps;
                if r1.iter().any(|v| v.abs() > lam) {
                    return false;
                }
                let fitted = &self.beta_support + &self.gram_inv * &w;
                fitted
                    .iter()
                    .zip(self.support_signs.iter())
                    .all(|(f, s)| f.signum() == *s && *f != 0.0)
            })
            .collect()
    }

    pub fn check(&self, y: &[f64], lam: f64) -> Result<bool> {
        let eps = self.noise(y)?;
        Ok(self.check_noise(&eps, &[lam])[0])
    }
}

/// True iff a lasso solution at `lam` with the signs of `beta_star` exists,
/// tested through the two KKT conditions on the realised noise.
pub fn kkt_sign_recovery(x: &DMatrix<f64>, y: &[f64], beta_star: &[f64], lam: f64) -> Result<bool> {
    crate::error::check_nonnegative("lambda", lam)?;
    SignRecoveryCheck::new(x, beta_star)?.check(y, lam)
}

/// Outcome of the general lasso sign-recovery bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoBound {
    pub psi: f64,
    /// `min_{j∈S} |β*_j|`
    pub min_signal: f64,
    pub condition_ok: bool,
    /// `1 − 2p·exp(−λ²η² / (2·Λ_max·max_{j∉S}‖X_j‖²))`, unclamped.
    pub probability: f64,
}

/// General lasso sign-recovery bound for a design satisfying the
/// condition with margin `eta` and noise covariance whose largest
/// eigenvalue is `noise_max_eig`.
///
/// Without off-support columns the column-norm maximum runs over all columns.
pub fn lasso_recovery_bound(
    x: &DMatrix<f64>,
    beta_star: &[f64],
    lam: f64,
    noise_max_eig: f64,
    eta: f64,
) -> Result<LassoBound> {
    crate::error::check_nonnegative("lambda", lam)?;
    crate::error::check_nonnegative("noise eigenvalue", noise_max_eig)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(FusedError::param(format!(
            "eta must lie in (0, 1], got {eta}"
        )));
    }
    let check = SignRecoveryCheck::new(x, beta_star)?;
    if check.support.is_empty() {
        return Err(FusedError::input("coefficient vector has empty support"));
    }
    let gram = check.x_support.transpose() * &check.x_support;
    let c_min = gram.symmetric_eigenvalues().min();
    let pool = if check.off_support.is_empty() {
        x.clone()
    } else {
        check.x_off.clone()
    };
    let max_norm = pool.column_iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let inv_sign = (&check.gram_inv * &check.support_signs).amax();
    let psi = lam * (eta / (c_min.sqrt() * max_norm) + inv_sign);
    let min_signal = check
        .beta_support
        .iter()
        .map(|b| b.abs())
        .fold(f64::INFINITY, f64::min);
    let p = x.ncols() as f64;
    let denom = 2.0 * noise_max_eig * max_norm * max_norm;
    let probability = 1.0 - 2.0 * p * (-(lam * lam * eta * eta) / denom).exp();
    Ok(LassoBound {
        psi,
        min_signal,
        condition_ok: min_signal > psi,
        probability,
    })
}
