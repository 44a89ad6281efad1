// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change of variables between a sequence `μ` and its differences `θ`.
//!
//! With `θ_1 = μ_1` and `θ_i = μ_i − μ_{i−1}` we have `μ = Aθ` for the
//! lower-triangular all-ones matrix `A`. Dropping the first column of `A`
//! gives the `n × (n−1)` design `X` with `x_ij = 1` iff `i > j`; its
//! column-centred version `X̃` turns the total-variation problem into a
//! plain lasso without intercept.
//!
//! Indexing: entry `i` (0-based) of a difference vector `θ̃` is the jump
//! between slice positions `i` and `i + 1` of `μ`. In 1-based signal
//! positions that is the jump *into* position `i + 2`.
//!
//! Every product with `A`, `X` or `X̃` here runs in O(n) with running sums.
//! [`centered_design_dense`] materialises `X̃` for the SVD and for
//! generic dense checks only.

use nalgebra::DMatrix;

use crate::error::{FusedError, Result};

/// `θ` from `μ`: first entry kept, then successive differences.
pub fn theta_from_mu(mu: &[f64]) -> Result<Vec<f64>> {
    let first = *mu
        .first()
        .ok_or_else(|| FusedError::input("empty vector"))?;
    let mut theta = Vec::with_capacity(mu.len());
    theta.push(first);
    theta.extend(mu.windows(2).map(|w| w[1] - w[0]));
    Ok(theta)
}

/// `μ = Aθ`, the running sum of `θ`.
pub fn mu_from_theta(theta: &[f64]) -> Result<Vec<f64>> {
    if theta.is_empty() {
        return Err(FusedError::input("empty vector"));
    }
    let mut acc = 0.0;
    Ok(theta
        .iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect())
}

/// Successive differences `v_{i+1} − v_i` (the `θ̃` part of [`theta_from_mu`]).
pub fn differences(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Matrix-free view of the cumulative-sum design for a sequence of length `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DifferenceBasis {
    n: usize,
}

impl DifferenceBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(FusedError::input(format!("design needs n >= 2, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns, `n − 1`.
    pub fn columns(&self) -> usize {
        self.n - 1
    }

    /// Column means `X̄_j = (n − j) / n` for 1-based column `j`.
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n as f64;
        (1..self.n).map(|j| (self.n - j) as f64 / n).collect()
    }

    fn check_len(&self, v: &[f64], want: usize) -> Result<()> {
        if v.len() != want {
            return Err(FusedError::input(format!(
                "expected vector of length {want}, got {}",
                v.len()
            )));
        }
        Ok(())
    }

    /// `Xv`: entry `i` is the sum of `v` over columns strictly before row `i`.
    pub fn apply_x(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v, self.n - 1)?;
        let mut out = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        out.push(0.0);
        for x in v {
            acc += x;
            out.push(acc);
        }
        Ok(out)
    }

    /// `X̄ᵀv`.
    pub fn mean_dot(&self, v: &[f64]) -> Result<f64> {
        self.check_len(v, self.n - 1)?;
        let n = self.n as f64;
        Ok(v.iter()
            .enumerate()
            .map(|(k, x)| (self.n - 1 - k) as f64 * x)
            .sum::<f64>()
            / n)
    }

    /// `X̃v` for `v` of length `n − 1`.
    pub fn apply_centered(&self, v: &[f64]) -> Result<Vec<f64>> {
        let shift = self.mean_dot(v)?;
        let mut out = self.apply_x(v)?;
        out.iter_mut().for_each(|x| *x -= shift);
        Ok(out)
    }

    /// `X̃ᵀu` for `u` of length `n`: suffix sums minus `(n − j)·ū`.
    pub fn apply_centered_t(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u, self.n)?;
        let mean = u.iter().sum::<f64>() / self.n as f64;
        let mut out = vec![0.0; self.n - 1];
        let mut suffix = 0.0;
        for j in (1..self.n).rev() {
            suffix += u[j];
            out[j - 1] = suffix - (self.n - j) as f64 * mean;
        }
        Ok(out)
    }
}

/// `X̃v` (or `X̃ᵀv` when `transpose`) for the length-`n` design.
pub fn centered_design_apply(n: usize, v: &[f64], transpose: bool) -> Result<Vec<f64>> {
    let basis = DifferenceBasis::new(n)?;
    if transpose {
        basis.apply_centered_t(v)
    } else {
        basis.apply_centered(v)
    }
}

/// Dense `n × (n−1)` centred design.
pub fn centered_design_dense(n: usize) -> Result<DMatrix<f64>> {
    let basis = DifferenceBasis::new(n)?;
    let means = basis.column_means();
    Ok(DMatrix::from_fn(n, n - 1, |i, j| {
        let x = if i > j { 1.0 } else { 0.0 };
        x - means[j]
    }))
}

/// Centred response `Ỹ = Y − Ȳ` together with `Ȳ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteredData {
    pub y_tilde: Vec<f64>,
    pub y_bar: f64,
}

impl CenteredData {
    pub fn new(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(FusedError::input("empty response"));
        }
        let y_bar = y.iter().sum::<f64>() / y.len() as f64;
        Ok(Self {
            y_tilde: y.iter().map(|v| v - y_bar).collect(),
            y_bar,
        })
    }
}

/// Rebuilds `μ̂` from a fitted difference vector:
/// `θ̂_1 = Ȳ − X̄ᵀθ̃`, then `μ̂ = θ̂_1·1 + Xθ̃`.
pub fn reconstruct_mu(theta_tilde: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let basis = DifferenceBasis::new(y.len())?;
    if theta_tilde.len() != y.len() - 1 {
        return Err(FusedError::input(format!(
            "difference vector has length {}, expected {}",
            theta_tilde.len(),
            y.len() - 1
        )));
    }
    let y_bar = y.iter().sum::<f64>() / y.len() as f64;
    let intercept = y_bar - basis.mean_dot(theta_tilde)?;
    let mut mu = basis.apply_x(theta_tilde)?;
    mu.iter_mut().for_each(|m| *m += intercept);
    Ok(mu)
}
