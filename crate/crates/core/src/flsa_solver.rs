// SPDX-License-Identifier: MIT OR Apache-2.0

//! Fused lasso signal approximator
//!
//! ```text
//! minimize  ½‖y − μ‖² + λ₁‖μ‖₁ + λ₂ Σ|μ_{i+1} − μ_i|
//! ```
//!
//! At `λ₁ = 0` the solution as a function of `λ₂` is piecewise linear and
//! neighbouring coordinates only ever fuse, never split. [`flsa_path`]
//! tracks the fused groups: a group `g` of size `n_g` and data sum `S_g`
//! takes the value `(S_g − λ₂·c_g) / n_g`, where `c_g` collects the signs
//! of the group's differences to its neighbours. Those signs are fixed by
//! the data at `λ₂ = 0` and survive until the boundary disappears, so the
//! whole path is determined by the order in which boundaries close.
//!
//! `λ₁ > 0` is handled by soft-thresholding the `λ₁ = 0` solution
//! ([`apply_lambda1`]). [`qp_oracle`] solves the full problem directly and
//! independently, and is what the path is checked against.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, FusedError, Result};
use crate::puffer_lasso::shrink;
use crate::signal_model::{sign_with_tol, JumpPattern};

/// Affine value `intercept + slope·λ` of one fused group `start..end` (0-based, end exclusive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupLine {
    pub start: usize,
    pub end: usize,
    pub intercept: f64,
    pub slope: f64,
}

impl GroupLine {
    pub fn value(&self, lam: f64) -> f64 {
        self.intercept + self.slope * lam
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// One linear piece of the path, valid for `lambda_start ≤ λ < lambda_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub lambda_start: f64,
    /// `f64::INFINITY` for the final, fully fused piece.
    pub lambda_end: f64,
    pub groups: Vec<GroupLine>,
}

/// Groups fused at one value of λ₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub lambda: f64,
    /// Resulting groups that absorbed a boundary, as 1-based inclusive ranges.
    pub merged: Vec<(usize, usize)>,
    /// 1-based positions `p` whose boundary to `p − 1` closed at this event.
    pub closed: Vec<usize>,
}

/// Partition of `1..=n` into fused groups with one fitted value each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusedGroups {
    /// 1-based inclusive ranges.
    pub ranges: Vec<(usize, usize)>,
    pub values: Vec<f64>,
}

/// Full fuse-only path of the FLSA in λ₂ at λ₁ = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionPath {
    n: usize,
    data_signs: Vec<i8>,
    merge_events: Vec<MergeEvent>,
    segments: Vec<PathSegment>,
}

#[derive(Clone, Copy, Debug)]
struct Group {
    start: usize,
    end: usize,
    sum: f64,
}

impl Group {
    fn len(&self) -> f64 {
        (self.end - self.start) as f64
    }
}

fn tie_window(lam: f64) -> f64 {
    1e-10 * lam.abs().max(1.0)
}

/// Computes the complete fusion path of `y`.
pub fn flsa_path(y: &[f64]) -> Result<FusionPath> {
    if y.is_empty() {
        return Err(FusedError::input("empty sequence"));
    }
    if let Some(bad) = y.iter().position(|v| !v.is_finite()) {
        return Err(FusedError::input(format!(
            "non-finite value at index {}",
            bad + 1
        )));
    }
    let n = y.len();
    let data_signs: Vec<i8> = y
        .windows(2)
        .map(|w| sign_with_tol(w[1] - w[0], 0.0))
        .collect();

    // runs of exactly equal values start out fused
    let mut groups: Vec<Group> = Vec::new();
    for (i, &v) in y.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if data_signs[i - 1] == 0 => {
                g.end = i + 1;
                g.sum += v;
            }
            _ => groups.push(Group {
                start: i,
                end: i + 1,
                sum: v,
            }),
        }
    }
    // boundary k sits between groups k and k+1; its sign is fixed for life
    let mut signs: Vec<i8> = groups
        .windows(2)
        .map(|w| data_signs[w[1].start - 1])
        .collect();

    let mut segments = Vec::new();
    let mut merge_events = Vec::new();
    let mut lam = 0.0;

    loop {
        let lines: Vec<GroupLine> = groups
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let left = if k > 0 { signs[k - 1] as f64 } else { 0.0 };
                let right = if k < signs.len() {
                    signs[k] as f64
                } else {
                    0.0
                };
                let tension = left - right;
                GroupLine {
                    start: g.start,
                    end: g.end,
                    intercept: g.sum / g.len(),
                    slope: -tension / g.len(),
                }
            })
            .collect();

        if groups.len() == 1 {
            segments.push(PathSegment {
                lambda_start: lam,
                lambda_end: f64::INFINITY,
                groups: lines,
            });
            break;
        }

        let hits: Vec<f64> = (0..signs.len())
            .map(|k| {
                let (a, b) = (&lines[k], &lines[k + 1]);
                let closing = a.slope - b.slope;
                // gap b − a has sign signs[k]; it shrinks iff the rate opposes it
                if closing * signs[k] as f64 > 0.0 {
                    ((b.intercept - a.intercept) / closing).max(lam)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let next = hits.iter().copied().fold(f64::INFINITY, f64::min);
        if !next.is_finite() {
            return Err(FusedError::NoConvergence {
                iterations: merge_events.len(),
                residual: f64::INFINITY,
            });
        }
        let window = tie_window(next);
        let closing: Vec<bool> = hits.iter().map(|&h| h <= next + window).collect();

        segments.push(PathSegment {
            lambda_start: lam,
            lambda_end: next,
            groups: lines,
        });

        let mut merged_groups = Vec::new();
        let mut merged_signs = Vec::new();
        let mut event = MergeEvent {
            lambda: next,
            merged: Vec::new(),
            closed: Vec::new(),
        };
        let mut current = groups[0];
        let mut absorbed = false;
        for k in 0..signs.len() {
            let right = groups[k + 1];
            if closing[k] {
                event.closed.push(right.start + 1);
                current.end = right.end;
                current.sum += right.sum;
                absorbed = true;
            } else {
                if absorbed {
                    event.merged.push((current.start + 1, current.end));
                }
                merged_groups.push(current);
                merged_signs.push(signs[k]);
                current = right;
                absorbed = false;
            }
        }
        if absorbed {
            event.merged.push((current.start + 1, current.end));
        }
        merged_groups.push(current);
        groups = merged_groups;
        signs = merged_signs;
        merge_events.push(event);
        lam = next;
    }

    Ok(FusionPath {
        n,
        data_signs,
        merge_events,
        segments,
    })
}

impl FusionPath {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn merge_events(&self) -> &[MergeEvent] {
        &self.merge_events
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    /// λ₂ beyond which the fit is constant (the last merge), 0 for constant input.
    pub fn final_lambda(&self) -> f64 {
        self.merge_events.last().map(|e| e.lambda).unwrap_or(0.0)
    }

    /// Index of the linear piece containing `lam`.
    pub fn segment_index(&self, lam: f64) -> usize {
        self.segments
            .partition_point(|s| s.lambda_end <= lam)
            .min(self.segments.len() - 1)
    }

    /// Dense fit of one segment at `lam`.
    pub fn evaluate_segment(&self, k: usize, lam: f64) -> Vec<f64> {
        let mut mu = vec![0.0; self.n];
        for g in &self.segments[k].groups {
            let v = g.value(lam);
            mu[g.start..g.end].iter_mut().for_each(|m| *m = v);
        }
        mu
    }

    /// Fused groups and their values at `lam`.
    pub fn groups_at(&self, lam: f64) -> FusedGroups {
        let seg = &self.segments[self.segment_index(lam)];
        FusedGroups {
            ranges: seg.groups.iter().map(|g| (g.start + 1, g.end)).collect(),
            values: seg.groups.iter().map(|g| g.value(lam)).collect(),
        }
    }

    /// Jump pattern of the fit anywhere inside segment `k`.
    ///
    /// A surviving boundary always carries the sign of the raw data
    /// difference there, so no evaluation is needed.
    pub fn segment_pattern(&self, k: usize) -> JumpPattern {
        let mut signs = vec![0i8; self.n.saturating_sub(1)];
        for g in self.segments[k].groups.iter().skip(1) {
            signs[g.start - 1] = self.data_signs[g.start - 1];
        }
        JumpPattern { signs }
    }

    /// 1-based position of the first boundary to open when λ₂ decreases
    /// from the fully fused state, i.e. the boundary closed by the last merge.
    pub fn first_split(&self) -> Option<Vec<usize>> {
        self.merge_events.last().map(|e| e.closed.clone())
    }

    /// True when every partition along the path refines the next one.
    pub fn is_nested(&self) -> bool {
        self.segments.windows(2).all(|w| {
            let coarse = &w[1].groups;
            w[0].groups
                .iter()
                .all(|g| coarse.iter().any(|c| c.start <= g.start && g.end <= c.end))
        })
    }
}

/// Fit of the stored path at `λ₂ = lam2`.
pub fn flsa_fit(path: &FusionPath, lam2: f64) -> Result<Vec<f64>> {
    check_nonnegative("lambda2", lam2)?;
    Ok(path.evaluate_segment(path.segment_index(lam2), lam2))
}

/// Applies the λ₁ penalty to a `λ₁ = 0` solution by soft-thresholding.
pub fn apply_lambda1(mu_hat: &[f64], lam1: f64) -> Result<Vec<f64>> {
    check_nonnegative("lambda1", lam1)?;
    Ok(mu_hat.iter().map(|&m| shrink(m, lam1)).collect())
}

/// FLSA at `(λ₁, λ₂)` via the path plus soft-thresholding.
pub fn flsa_solve(y: &[f64], lam1: f64, lam2: f64) -> Result<Vec<f64>> {
    let path = flsa_path(y)?;
    apply_lambda1(&flsa_fit(&path, lam2)?, lam1)
}

/// Sweep cap for [`qp_oracle`].
pub const ORACLE_MAX_SWEEPS: usize = 1_000_000;
/// Default certified accuracy for [`qp_oracle`].
pub const ORACLE_DEFAULT_TOL: f64 = 1e-8;

/// Result of the direct solver together with its optimality certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub mu: Vec<f64>,
    /// Certified bound on the objective excess `P(μ) − P(μ_opt)`: a duality
    /// gap, or `½‖g‖²` for a subgradient `g` at `μ`.
    pub gap: f64,
    /// `√(2·gap)`, an upper bound on `‖μ − μ_opt‖₂`.
    pub distance_bound: f64,
    pub sweeps: usize,
}

/// Objective `½‖y − μ‖² + λ₁‖μ‖₁ + λ₂·TV(μ)`.
pub fn flsa_objective(y: &[f64], mu: &[f64], lam1: f64, lam2: f64) -> f64 {
    let fit: f64 = y
        .iter()
        .zip(mu)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        * 0.5;
    let l1: f64 = mu.iter().map(|m| m.abs()).sum();
    let tv: f64 = mu.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    fit + lam1 * l1 + lam2 * tv
}

/// Direct FLSA solver, independent of the path.
///
/// Runs cyclic coordinate descent on the dual
/// `min ½‖y − Kᵀu‖²  s.t. ‖u‖∞ ≤ 1`, where `K` stacks `λ₂·D` (differences)
/// and `λ₁·I`. Plain coordinate descent converges slowly on long
/// sequences, so after a geometrically growing number of sweeps the
/// solver reads the active set off the dual (boundaries with `|u| = 1`),
/// solves the resulting equality-constrained problem exactly and builds a
/// matching dual point. Either candidate is accepted once its duality gap
///
/// `½‖μ − (y − Kᵀu)‖² + Σ_b (|r_b| − u_b·r_b)`,  `r = Kμ`
///
/// certifies `‖μ − μ_opt‖ ≤ √(2·gap) ≤ tol` (strong convexity). When the
/// polished point has zero-valued groups the dual point built for it can be
/// loose; its subgradient residual from [`kkt_residual`] is used instead.
pub fn qp_oracle_certified(y: &[f64], lam1: f64, lam2: f64, tol: f64) -> Result<OracleSolution> {
    if y.is_empty() {
        return Err(FusedError::input("empty sequence"));
    }
    check_nonnegative("lambda1", lam1)?;
    check_nonnegative("lambda2", lam2)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(FusedError::param(format!("tol must be > 0, got {tol}")));
    }
    let n = y.len();
    if lam2 == 0.0 || n == 1 {
        // separable: exact soft thresholding
        return Ok(OracleSolution {
            mu: y.iter().map(|&v| shrink(v, lam1)).collect(),
            gap: 0.0,
            distance_bound: 0.0,
            sweeps: 0,
        });
    }
    let dual = DualState { y, lam1, lam2 };
    let mut mu = y.to_vec();
    let mut u_diff = vec![0.0; n - 1];
    let mut u_abs = vec![0.0; n];
    let use_abs = lam1 > 0.0;

    let diff_curv = 2.0 * lam2 * lam2;
    let abs_curv = lam1 * lam1;
    let mut sweeps = 0;
    let mut next_polish = 8;
    loop {
        let g = dual.gap(&mu, &mu, &u_diff, &u_abs);
        let bound = (2.0 * g).sqrt();
        if bound <= tol {
            return Ok(OracleSolution {
                mu,
                gap: g,
                distance_bound: bound,
                sweeps,
            });
        }
        if sweeps >= next_polish {
            next_polish = next_polish * 3 / 2 + 1;
            let (pmu, pud, pua) = dual.polish(&u_diff);
            let pmu_u = dual.primal_of(&pud, &pua);
            let mut g = dual.gap(&pmu, &pmu_u, &pud, &pua);
            let mut bound = (2.0 * g).sqrt();
            if bound > tol {
                // zero-valued groups leave the dual underdetermined; fall back
                // to the exact subgradient check, whose residual r gives a
                // subgradient of norm ≤ √n·r
                let r = kkt_residual(y, &pmu, lam1, lam2, 0.0)?;
                let alt = (n as f64).sqrt() * r;
                if alt < bound {
                    bound = alt;
                    g = 0.5 * alt * alt;
                }
            }
            if bound <= tol {
                return Ok(OracleSolution {
                    mu: pmu,
                    gap: g,
                    distance_bound: bound,
                    sweeps,
                });
            }
        }
        if sweeps >= ORACLE_MAX_SWEEPS {
            return Err(FusedError::NoConvergence {
                iterations: sweeps,
                residual: bound,
            });
        }
        for i in 0..n - 1 {
            // row = λ₂(e_{i+1} − e_i); Kᵀu contributes −λ₂u to μ_{i+1}, +λ₂u to μ_i
            let grad = lam2 * (mu[i + 1] - mu[i]);
            let next = (u_diff[i] + grad / diff_curv).clamp(-1.0, 1.0);
            let delta = next - u_diff[i];
            if delta != 0.0 {
                u_diff[i] = next;
                mu[i + 1] -= lam2 * delta;
                mu[i] += lam2 * delta;
            }
        }
        if use_abs {
            for i in 0..n {
                let grad = lam1 * mu[i];
                let next = (u_abs[i] + grad / abs_curv).clamp(-1.0, 1.0);
                let delta = next - u_abs[i];
                if delta != 0.0 {
                    u_abs[i] = next;
                    mu[i] -= lam1 * delta;
                }
            }
        }
        sweeps += 1;
    }
}

struct DualState<'a> {
    y: &'a [f64],
    lam1: f64,
    lam2: f64,
}

impl DualState<'_> {
    /// `y − Kᵀu`
    fn primal_of(&self, u_diff: &[f64], u_abs: &[f64]) -> Vec<f64> {
        let n = self.y.len();
        (0..n)
            .map(|i| {
                let right = if i + 1 < n { u_diff[i] } else { 0.0 };
                let left = if i > 0 { u_diff[i - 1] } else { 0.0 };
                self.y[i] + self.lam2 * (right - left) - self.lam1 * u_abs[i]
            })
            .collect()
    }

    fn gap(&self, mu: &[f64], mu_u: &[f64], u_diff: &[f64], u_abs: &[f64]) -> f64 {
        let mut g = 0.5
            * mu.iter()
                .zip(mu_u)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        for (i, u) in u_diff.iter().enumerate() {
            let r = self.lam2 * (mu[i + 1] - mu[i]);
            g += r.abs() - u * r;
        }
        if self.lam1 > 0.0 {
            for (m, u) in mu.iter().zip(u_abs) {
                let r = self.lam1 * m;
                g += r.abs() - u * r;
            }
        }
        g.max(0.0)
    }

    /// Exact solve on the active set implied by saturated boundary duals.
    fn polish(&self, u_diff: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (y, lam1, lam2) = (self.y, self.lam1, self.lam2);
        let n = y.len();
        let mut mu = vec![0.0; n];
        let mut ud = u_diff.to_vec();
        let mut ua = vec![0.0; n];
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && u_diff[end - 1].abs() < 1.0 {
                end += 1;
            }
            let ul = if start == 0 { 0.0 } else { u_diff[start - 1] };
            let ur = if end == n { 0.0 } else { u_diff[end - 1] };
            let len = (end - start) as f64;
            let sum: f64 = y[start..end].iter().sum();
            let m = (sum + lam2 * (ur - ul)) / len;
            let v = shrink(m, lam1);
            let a = if v != 0.0 {
                v.signum()
            } else if lam1 > 0.0 {
                m / lam1
            } else {
                0.0
            };
            let mut u = ul;
            for i in start..end {
                mu[i] = v;
                ua[i] = a;
                if i + 1 < end {
                    u += (v - y[i] + lam1 * a) / lam2;
                    ud[i] = u.clamp(-1.0, 1.0);
                }
            }
            start = end;
        }
        (mu, ud, ua)
    }
}

/// Direct FLSA solution certified to within `tol` (Euclidean) of the optimum.
pub fn qp_oracle(y: &[f64], lam1: f64, lam2: f64, tol: f64) -> Result<Vec<f64>> {
    qp_oracle_certified(y, lam1, lam2, tol).map(|s| s.mu)
}

/// Largest violation of the FLSA subgradient conditions at `mu`.
///
/// Coordinates closer than `fuse_tol` are treated as fused and values
/// within `fuse_tol` of zero as zero. Stationarity reads
/// `μ_i − y_i + λ₁z_i + λ₂(t_{i−1} − t_i) = 0` with `t_0 = t_n = 0`; the
/// reachable range of each `t_i` is propagated left to right and any gap
/// to its admissible set (the boundary sign, or `[−1, 1]` when fused) is
/// reported in gradient units.
pub fn kkt_residual(y: &[f64], mu: &[f64], lam1: f64, lam2: f64, fuse_tol: f64) -> Result<f64> {
    if y.len() != mu.len() || y.is_empty() {
        return Err(FusedError::input(
            "y and mu must be nonempty and of equal length",
        ));
    }
    let n = y.len();
    let z_range = |m: f64| -> (f64, f64) {
        if m.abs() <= fuse_tol {
            (-1.0, 1.0)
        } else {
            let s = m.signum();
            (s, s)
        }
    };
    if lam2 == 0.0 || n == 1 {
        let worst = y
            .iter()
            .zip(mu)
            .map(|(&yi, &mi)| {
                let (zl, zh) = z_range(mi);
                let lo = mi - yi + lam1 * zl;
                let hi = mi - yi + lam1 * zh;
                if lo > 0.0 {
                    lo
                } else if hi < 0.0 {
                    -hi
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        return Ok(worst);
    }
    let mut worst: f64 = 0.0;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for i in 0..n {
        let (zl, zh) = z_range(mu[i]);
        let base = mu[i] - y[i];
        lo += (base + lam1 * zl) / lam2;
        hi += (base + lam1 * zh) / lam2;
        let (alo, ahi) = if i + 1 == n {
            (0.0, 0.0)
        } else {
            let d = mu[i + 1] - mu[i];
            if d.abs() <= fuse_tol {
                (-1.0, 1.0)
            } else {
                (d.signum(), d.signum())
            }
        };
        let new_lo = lo.max(alo);
        let new_hi = hi.min(ahi);
        if new_lo > new_hi {
            let miss = if hi < alo { alo - hi } else { lo - ahi };
            worst = worst.max(miss * lam2);
            let p = if hi < alo { alo } else { ahi };
            lo = p;
            hi = p;
        } else {
            lo = new_lo;
            hi = new_hi;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    // n = 2 closed form: fit (y1 + λ, y2 − λ) for y1 < y2 until they meet
    #[test]
    fn two_point_path() {
        let path = flsa_path(&[0.0, 2.0]).unwrap();
        assert_eq!(path.merge_events().len(), 1);
        assert_eq!(path.merge_events()[0].lambda, 1.0);
        assert_eq!(path.merge_events()[0].merged, vec![(1, 2)]);
        for lam in [0.0, 0.25, 0.5, 0.99] {
            assert!(close(
                &flsa_fit(&path, lam).unwrap(),
                &[lam, 2.0 - lam],
                1e-15
            ));
        }
        for lam in [1.0, 1.5, 100.0] {
            assert!(close(&flsa_fit(&path, lam).unwrap(), &[1.0, 1.0], 1e-15));
        }
    }

    #[test]
    fn constant_input_has_no_events() {
        let path = flsa_path(&[3.0; 5]).unwrap();
        assert!(path.merge_events().is_empty());
        assert_eq!(path.segments().len(), 1);
        for lam in [0.0, 2.0] {
            assert_eq!(flsa_fit(&path, lam).unwrap(), vec![3.0; 5]);
        }
        assert_eq!(flsa_path(&[7.0]).unwrap().segments().len(), 1);
    }

    #[test]
    fn input_errors() {
        assert!(flsa_path(&[]).is_err());
        assert!(flsa_path(&[1.0, f64::NAN]).is_err());
        let path = flsa_path(&[1.0, 2.0]).unwrap();
        assert!(flsa_fit(&path, -0.5).is_err());
        assert!(apply_lambda1(&[1.0], -1.0).is_err());
        assert!(qp_oracle(&[1.0], 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn endpoints() {
        let y = [0.3, -1.2, 4.0, 4.0, 2.5, -0.7];
        let path = flsa_path(&y).unwrap();
        assert_eq!(flsa_fit(&path, 0.0).unwrap(), y.to_vec());
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let late = flsa_fit(&path, path.final_lambda() + 1.0).unwrap();
        assert!(close(&late, &[mean; 6], 1e-12));
    }

    #[test]
    fn symmetric_ties_merge_in_one_event() {
        let path = flsa_path(&[0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let first = &path.merge_events()[0];
        assert!(first.closed.len() >= 2, "{first:?}");
        assert!(path.is_nested());
    }

    #[test]
    fn lambda1_examples() {
        assert_eq!(apply_lambda1(&[1.0, 1.0], 0.5).unwrap(), vec![0.5, 0.5]);
        assert_eq!(apply_lambda1(&[1.0, -2.0], 0.0).unwrap(), vec![1.0, -2.0]);
        let out = apply_lambda1(&[-0.3, 0.8], 0.5).unwrap();
        assert!(close(&out, &[0.0, 0.3], 1e-15));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            qp_oracle(&[1.0, -2.0], 0.0, 0.0, 1e-8).unwrap(),
            vec![1.0, -2.0]
        );
        let mu = qp_oracle(&[0.0, 2.0], 0.0, 0.5, 1e-10).unwrap();
        assert!(close(&mu, &[0.5, 1.5], 1e-9));
        let mu = qp_oracle(&[0.0, 2.0], 1.0, 1.0, 1e-10).unwrap();
        assert!(close(&mu, &[0.0, 0.0], 1e-9));
        assert!(close(
            &flsa_solve(&[0.0, 2.0], 1.0, 1.0).unwrap(),
            &mu,
            1e-9
        ));
    }

    #[test]
    fn oracle_is_certified() {
        let y = [1.0, 3.0, -2.0, 0.5, 0.4, 2.2, -1.0];
        let sol = qp_oracle_certified(&y, 0.3, 0.8, 1e-9).unwrap();
        assert!(sol.distance_bound <= 1e-9);
        let res = kkt_residual(&y, &sol.mu, 0.3, 0.8, 1e-7).unwrap();
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn kkt_rejects_wrong_fit() {
        let y = [0.0, 2.0];
        assert!(kkt_residual(&y, &[0.5, 1.5], 0.0, 0.5, 1e-9).unwrap() < 1e-12);
        assert!(kkt_residual(&y, &[0.4, 1.6], 0.0, 0.5, 1e-9).unwrap() > 0.05);
        assert!(kkt_residual(&y, &[1.0, 1.0], 0.0, 0.5, 1e-9).unwrap() > 0.4);
    }

    #[test]
    fn groups_and_patterns_agree_with_dense_fit() {
        let y = [0.0, 0.1, 3.0, 2.9, 3.2, -1.0, -1.1, 0.0];
        let path = flsa_path(&y).unwrap();
        for (k, seg) in path.segments().iter().enumerate() {
            let mid = if seg.lambda_end.is_finite() {
                0.5 * (seg.lambda_start + seg.lambda_end)
            } else {
                seg.lambda_start + 1.0
            };
            let dense = path.evaluate_segment(k, mid);
            let p = crate::signal_model::jump_pattern(&dense, 1e-12).unwrap();
            assert_eq!(p, path.segment_pattern(k));
            let groups = path.groups_at(mid);
            assert_eq!(groups.ranges.len(), seg.groups.len());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn path_matches_oracle(
            y in prop::collection::vec(-3.0f64..3.0, 1..20),
            lam in 0.0f64..4.0,
        ) {
            let path = flsa_path(&y).unwrap();
            let fit = flsa_fit(&path, lam).unwrap();
            let oracle = qp_oracle(&y, 0.0, lam, 1e-9).unwrap();
            prop_assert!(close(&fit, &oracle, 1e-7));
            prop_assert!(kkt_residual(&y, &fit, 0.0, lam, 1e-9).unwrap() < 1e-9);
            let total: f64 = y.iter().sum();
            prop_assert!((fit.iter().sum::<f64>() - total).abs() < 1e-9);
            prop_assert!(path.is_nested());
        }

        #[test]
        fn events_are_monotone(y in prop::collection::vec(-3.0f64..3.0, 1..40)) {
            let path = flsa_path(&y).unwrap();
            let lams: Vec<f64> = path.merge_events().iter().map(|e| e.lambda).collect();
            prop_assert!(lams.windows(2).all(|w| w[0] <= w[1]));
            let counts: Vec<usize> = path.segments().iter().map(|s| s.groups.len()).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] > w[1]));
            prop_assert_eq!(*counts.last().unwrap(), 1);
        }
    }
}
