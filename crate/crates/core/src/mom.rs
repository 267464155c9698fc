// SPDX-License-Identifier: MIT OR Apache-2.0

//! Median-of-means tests: dense, sparse, multiple change points, temporally
//! dependent noise and boundary-restricted variants.

use crate::decision::{Decision, GridKind, ScaleDiagnostic};
use crate::error::{Error, Result};
use crate::model::{dyadic_grid, lllog, mom_delta, pair_differences, upper_median, DataMatrix, PairedMatrix};
use crate::subweibull::{check_sparsity, split_cusum, Provenance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Grouping of `t` samples into `groups` contiguous blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingPlan {
    pub t: usize,
    pub groups: usize,
    pub group_size: usize,
}

impl GroupingPlan {
    /// Plan for `count` samples split into `groups` blocks; `groups` must divide `count`.
    pub fn new(t: usize, count: usize, groups: usize) -> Result<Self> {
        if groups == 0 || count == 0 || count % groups != 0 {
            return Err(Error::invalid(format!(
                "group count {groups} does not divide the {count} grouped samples at t={t}"
            )));
        }
        Ok(Self {
            t,
            groups,
            group_size: count / groups,
        })
    }
}

/// One scale of a MoM test: its group count and detection threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomScale {
    pub t: usize,
    pub groups: usize,
    pub r: f64,
}

/// Thresholds and grouping for the MoM tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomThresholds {
    pub scales: Vec<MomScale>,
    /// Selection threshold of the sparse test.
    pub a: f64,
    /// Selection threshold of the restricted tests.
    pub a_res: f64,
    /// Group count of the restricted selection step.
    pub g_res: usize,
    pub provenance: Provenance,
}

fn power(p: usize, alpha: f64) -> f64 {
    (p as f64).powf(0.5f64.max(2.0 / alpha))
}

fn check_alpha_polytail(alpha: f64) -> Result<()> {
    if !(alpha >= 2.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!(
            "polynomial-tail order must be >= 2; got {alpha}"
        )));
    }
    Ok(())
}

/// `Delta = 2^(3 + ceil(log2 llog))`, the group cap of the dense test.
pub fn dense_delta(n: usize) -> usize {
    mom_delta(3, lllog(n))
}

/// `Delta = 2^(4 + ceil(log2 llog))`, the group cap of the sparse test.
pub fn sparse_delta(n: usize) -> usize {
    mom_delta(4, lllog(n))
}

/// `Delta = 2^ceil(log2(C2 llog (log log log 16n)^2))`, floored at 1.
pub fn temporal_delta(n: usize, c2: f64) -> usize {
    let lll = (16.0 * n as f64).ln().ln().ln();
    crate::model::pow2_ceil(c2 * lllog(n) * lll * lll)
}

/// `G = 2^(1 + ceil(log2 log n))`, the fixed group count of the multi-change test.
pub fn multi_groups(n: usize) -> usize {
    mom_delta(1, (n as f64).ln())
}

/// The local-window grid `J = {(l, t)}` of the multi-change test.
pub fn multi_grid(n: usize) -> Result<Vec<(usize, usize)>> {
    let g = multi_groups(n);
    let top = if n >= 4 {
        1usize << ((usize::BITS - 1 - n.leading_zeros()) - 1)
    } else {
        0
    };
    let mut cells = Vec::new();
    let mut t = g;
    while t <= top {
        for ell in t..=n - t {
            cells.push((ell, t));
        }
        t *= 2;
    }
    if cells.is_empty() {
        return Err(Error::invalid(format!("multi-change grid is empty for n={n}")));
    }
    Ok(cells)
}

/// `t_res = 32 (log(e^2 p / s) + llog / s)`.
pub fn t_res_theory(p: usize, s: usize, n: usize) -> f64 {
    let (pf, sf) = (p as f64, s as f64);
    32.0 * ((std::f64::consts::E.powi(2) * pf / sf).ln() + lllog(n) / sf)
}

/// `G_res = 2^floor(log2(t_res / 2))`.
pub fn g_res(t_res: f64) -> Result<usize> {
    if !(t_res >= 2.0) || !t_res.is_finite() {
        return Err(Error::invalid(format!(
            "t_res must be a finite value >= 2; got {t_res}"
        )));
    }
    Ok(1usize << ((t_res / 2.0).log2().floor() as u32))
}

/// Dyadic scales within `[ceil((t_res+1)/2), n + 1 - ceil((t_res+1)/2)]`.
pub fn restricted_grid(n: usize, t_res: f64) -> Result<Vec<usize>> {
    if !(t_res >= 2.0) || !t_res.is_finite() {
        return Err(Error::invalid(format!(
            "t_res must be a finite value >= 2; got {t_res}"
        )));
    }
    let lo = ((t_res + 1.0) / 2.0).ceil() as usize;
    let hi = (n + 1).saturating_sub(lo);
    let grid: Vec<usize> = dyadic_grid(n)?
        .scales
        .into_iter()
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    if grid.is_empty() {
        return Err(Error::invalid(format!(
            "restricted grid is empty for n={n}, t_res={t_res}"
        )));
    }
    Ok(grid)
}

impl MomThresholds {
    fn with_scales(scales: Vec<MomScale>) -> Self {
        Self {
            scales,
            a: 0.0,
            a_res: 0.0,
            g_res: 1,
            provenance: Provenance::TheoryWithConstants,
        }
    }

    /// Dense MoM test: `G_t = t ^ Delta`, `r_t = C1 p^((1/2) v (2/alpha)) G_t`.
    pub fn dense_theory(p: usize, n: usize, alpha: f64, c1: f64) -> Result<Self> {
        check_alpha_polytail(alpha)?;
        let delta = dense_delta(n);
        let scales = dyadic_grid(n)?
            .scales
            .into_iter()
            .map(|t| {
                let g = t.min(delta);
                MomScale {
                    t,
                    groups: g,
                    r: c1 * power(p, alpha) * g as f64,
                }
            })
            .collect();
        Ok(Self::with_scales(scales))
    }

    /// Sparse MoM test: `a = C1((p/s)^(1/alpha) + s^(-1/2) llog^(1/2))`,
    /// `r_t = C2 (s (p/s)^(2/alpha) 1{t=1} + sqrt(s) G_t 1{t>1})`, `G_t = (t ^ Delta)/2`.
    pub fn sparse_theory(p: usize, n: usize, s: usize, alpha: f64, c: [f64; 2]) -> Result<Self> {
        Self::sparse_family(p, n, s, alpha, c, 0.5)
    }

    /// Per-level parameters of the adaptive test: the `t > 1` thresholds scale with `s^(3/4)`.
    pub fn adaptive_sparse_theory(p: usize, n: usize, s: usize, alpha: f64, c: [f64; 2]) -> Result<Self> {
        Self::sparse_family(p, n, s, alpha, c, 0.75)
    }

    fn sparse_family(p: usize, n: usize, s: usize, alpha: f64, c: [f64; 2], s_exp: f64) -> Result<Self> {
        check_sparsity(p, s)?;
        check_alpha_polytail(alpha)?;
        let (sf, ratio, l) = (s as f64, p as f64 / s as f64, lllog(n));
        let delta = sparse_delta(n);
        let scales = dyadic_grid(n)?
            .scales
            .into_iter()
            .map(|t| {
                if t == 1 {
                    MomScale {
                        t,
                        groups: 1,
                        r: c[1] * sf * ratio.powf(2.0 / alpha),
                    }
                } else {
                    let g = t.min(delta) / 2;
                    MomScale {
                        t,
                        groups: g,
                        r: c[1] * sf.powf(s_exp) * g as f64,
                    }
                }
            })
            .collect();
        Ok(Self {
            a: c[0] * (ratio.powf(1.0 / alpha) + (l / sf).sqrt()),
            ..Self::with_scales(scales)
        })
    }

    /// Multi-change test: fixed `G = 2^(1 + ceil(log2 log n))`, `r = C1 sqrt(p) G`.
    pub fn multi_theory(p: usize, n: usize, c1: f64) -> Result<Self> {
        let g = multi_groups(n);
        let mut ts: Vec<usize> = multi_grid(n)?.into_iter().map(|(_, t)| t).collect();
        ts.dedup();
        let r = c1 * (p as f64).sqrt() * g as f64;
        Ok(Self::with_scales(
            ts.into_iter().map(|t| MomScale { t, groups: g, r }).collect(),
        ))
    }

    /// Temporal test: `G_t = t ^ Delta`, `r_t = C1 sqrt(p) G_t`.
    pub fn temporal_theory(p: usize, n: usize, c1: f64, c2: f64) -> Result<Self> {
        let delta = temporal_delta(n, c2);
        let scales = dyadic_grid(n)?
            .scales
            .into_iter()
            .map(|t| {
                let g = t.min(delta);
                MomScale {
                    t,
                    groups: g,
                    r: c1 * (p as f64).sqrt() * g as f64,
                }
            })
            .collect();
        Ok(Self::with_scales(scales))
    }

    /// Restricted MoM test: `a_res = C1`, `r_t = C2 sqrt(s) G_t` on the restricted grid.
    pub fn restricted_p_theory(p: usize, n: usize, s: usize, t_res: f64, c: [f64; 2]) -> Result<Self> {
        check_sparsity(p, s)?;
        let delta = sparse_delta(n);
        let scales = restricted_grid(n, t_res)?
            .into_iter()
            .map(|t| {
                let g = t.min(delta) / 2;
                MomScale {
                    t,
                    groups: g,
                    r: c[1] * (s as f64).sqrt() * g as f64,
                }
            })
            .collect();
        Ok(Self {
            a_res: c[0],
            g_res: g_res(t_res)?,
            ..Self::with_scales(scales)
        })
    }

    /// Restricted CUSUM test: `a_res = C1`, `r = C2 (sqrt(s llog) + llog)` on the restricted grid.
    pub fn restricted_g_theory(p: usize, n: usize, s: usize, t_res: f64, c: [f64; 2]) -> Result<Self> {
        check_sparsity(p, s)?;
        let l = lllog(n);
        let r = c[1] * ((s as f64 * l).sqrt() + l);
        let scales = restricted_grid(n, t_res)?
            .into_iter()
            .map(|t| MomScale { t, groups: 1, r })
            .collect();
        Ok(Self {
            a_res: c[0],
            g_res: g_res(t_res)?,
            ..Self::with_scales(scales)
        })
    }

    /// Copy with every detection threshold multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for sc in &mut out.scales {
            sc.r *= factor;
        }
        out.provenance = Provenance::Calibrated;
        out
    }

    fn scale(&self, t: usize) -> Result<MomScale> {
        self.scales
            .iter()
            .copied()
            .find(|s| s.t == t)
            .ok_or_else(|| Error::invalid(format!("no threshold configured for scale t={t}")))
    }
}

/// Entry `g` is `sum_j (Zbar_{t,g}(j)^2 - centering)` over contiguous groups of `Z_1..Z_t`.
pub fn group_sums_centered(z: &PairedMatrix, t: usize, groups: usize, centering: f64) -> Result<Vec<f64>> {
    if t > z.m() {
        return Err(Error::invalid(format!(
            "scale t={t} exceeds the {} available pairs",
            z.m()
        )));
    }
    let plan = GroupingPlan::new(t, t, groups)?;
    let p = z.p();
    let b = plan.group_size as f64;
    let mut mean = vec![0.0; p];
    Ok((0..groups)
        .map(|g| {
            mean.iter_mut().for_each(|m| *m = 0.0);
            for i in g * plan.group_size..(g + 1) * plan.group_size {
                for (m, v) in mean.iter_mut().zip(z.column(i)) {
                    *m += v;
                }
            }
            mean.iter().map(|m| (m / b).powi(2) - centering).sum()
        })
        .collect())
}

/// `sum_j V_{t,g}(j)` with `V_{t,g}(j) = Zbar_{t,g}(j)^2 - G/t`.
pub fn group_sums(z: &PairedMatrix, t: usize, groups: usize) -> Result<Vec<f64>> {
    group_sums_centered(z, t, groups, groups as f64 / t as f64)
}

/// `t * upper_median(group_sums)` with an explicit group count.
pub fn stat_mom_dense_with(z: &PairedMatrix, t: usize, groups: usize) -> Result<f64> {
    Ok(t as f64 * upper_median(&group_sums(z, t, groups)?)?)
}

/// `A_t^MoM` with the dense-test grouping `G_t = t ^ Delta`.
pub fn stat_mom_dense(x: &DataMatrix, t: usize) -> Result<f64> {
    if !dyadic_grid(x.n())?.contains(t) {
        return Err(Error::invalid(format!(
            "scale t={t} is not in the dyadic grid for n={}",
            x.n()
        )));
    }
    stat_mom_dense_with(&pair_differences(x), t, t.min(dense_delta(x.n())))
}

/// Rejects iff `A_t^MoM > r_t` at some configured scale.
pub fn test_dense_p(x: &DataMatrix, thr: &MomThresholds) -> Result<Decision> {
    let z = pair_differences(x);
    let entries = thr
        .scales
        .iter()
        .map(|sc| {
            Ok(ScaleDiagnostic::new(
                sc.t,
                "dense",
                stat_mom_dense_with(&z, sc.t, sc.groups)?,
                sc.r,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decision::from_entries("dense-P", GridKind::Single, entries))
}

/// `Y_{t,2}(j) = sum_{even i <= t} Z_i(j) / sqrt(t/2)`.
fn even_cusum(z: &PairedMatrix, t: usize) -> Vec<f64> {
    let mut acc = vec![0.0; z.p()];
    for i in (1..t).step_by(2) {
        for (a, v) in acc.iter_mut().zip(z.column(i)) {
            *a += v;
        }
    }
    let norm = (t as f64 / 2.0).sqrt();
    acc.into_iter().map(|v| v / norm).collect()
}

/// MoM aggregation over the odd-indexed pairs restricted to `selected` coordinates.
fn odd_half_mom(z: &PairedMatrix, t: usize, groups: usize, selected: &[bool]) -> Result<f64> {
    let plan = GroupingPlan::new(t, t / 2, groups)?;
    let b = plan.group_size as f64;
    let centering = 2.0 * groups as f64 / t as f64;
    let sums: Vec<f64> = (0..groups)
        .map(|g| {
            let mut mean = vec![0.0; z.p()];
            for k in g * plan.group_size..(g + 1) * plan.group_size {
                for (m, v) in mean.iter_mut().zip(z.column(2 * k)) {
                    *m += v;
                }
            }
            mean.iter()
                .zip(selected)
                .filter(|(_, &sel)| sel)
                .map(|(m, _)| (m / b).powi(2) - centering)
                .sum()
        })
        .collect();
    Ok(t as f64 / 2.0 * upper_median(&sums)?)
}

/// `A_{t,a}^MoM` and its selected-coordinate count from paired data.
pub fn stat_mom_sparse_pairs(z: &PairedMatrix, t: usize, a: f64, groups: usize) -> Result<(f64, usize)> {
    if t > z.m() {
        return Err(Error::invalid(format!(
            "scale t={t} exceeds the {} available pairs",
            z.m()
        )));
    }
    if t == 1 {
        let z1 = z.column(0);
        let mut stat = 0.0;
        let mut count = 0;
        for v in z1 {
            if v.abs() >= a {
                stat += v * v - 1.0;
                count += 1;
            }
        }
        return Ok((stat, count));
    }
    if t % 2 != 0 {
        return Err(Error::invalid(format!("sparse MoM statistic requires even t; got {t}")));
    }
    let selected: Vec<bool> = even_cusum(z, t).iter().map(|y| y.abs() >= a).collect();
    let count = selected.iter().filter(|&&s| s).count();
    Ok((odd_half_mom(z, t, groups, &selected)?, count))
}

/// `A_{t,a}^MoM`: odd-indexed pairs aggregate, even-indexed pairs select.
pub fn stat_mom_sparse(x: &DataMatrix, t: usize, a: f64, groups: usize) -> Result<f64> {
    if !dyadic_grid(x.n())?.contains(t) {
        return Err(Error::invalid(format!(
            "scale t={t} is not in the dyadic grid for n={}",
            x.n()
        )));
    }
    Ok(stat_mom_sparse_pairs(&pair_differences(x), t, a, groups)?.0)
}

/// Rejects iff `A_{t,a}^MoM > r_t` at some scale.
pub fn test_sparse_p_mom(x: &DataMatrix, s: usize, thr: &MomThresholds) -> Result<Decision> {
    check_sparsity(x.p(), s)?;
    let z = pair_differences(x);
    let entries = thr
        .scales
        .iter()
        .map(|sc| {
            let (v, c) = stat_mom_sparse_pairs(&z, sc.t, thr.a, sc.groups)?;
            Ok(ScaleDiagnostic::new(sc.t, "mom", v, sc.r).with_selected(c).with_s(s))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut d = Decision::from_entries("sparse-P-MoM", GridKind::Single, entries);
    d.branch = Some("mom".into());
    Ok(d)
}

/// Local statistic `A_{l,t}^MoM` on the window `X_{l-t+1}..X_{l+t}` (1-based).
pub fn stat_multi_local(x: &DataMatrix, ell: usize, t: usize, groups: usize) -> Result<f64> {
    if ell < t || ell + t > x.n() {
        return Err(Error::invalid(format!("window (l={ell}, t={t}) exceeds n={}", x.n())));
    }
    let plan = GroupingPlan::new(t, t, groups)?;
    let p = x.p();
    let b = plan.group_size as f64;
    let centering = groups as f64 / t as f64;
    let mut mean = vec![0.0; p];
    let sums: Vec<f64> = (0..groups)
        .map(|g| {
            mean.iter_mut().for_each(|m| *m = 0.0);
            for i in g * plan.group_size + 1..=(g + 1) * plan.group_size {
                let head = x.column(ell - t + i - 1);
                let tail = x.column(ell + t - i);
                for ((m, h), tl) in mean.iter_mut().zip(head).zip(tail) {
                    *m += (h - tl) / std::f64::consts::SQRT_2;
                }
            }
            mean.iter().map(|m| (m / b).powi(2) - centering).sum()
        })
        .collect();
    Ok(t as f64 * upper_median(&sums)?)
}

/// Rejects iff some local statistic over `J` exceeds its threshold.
pub fn test_multi(x: &DataMatrix, thr: &MomThresholds) -> Result<Decision> {
    let cells = multi_grid(x.n())?;
    let entries = cells
        .into_iter()
        .map(|(ell, t)| {
            let sc = thr.scale(t)?;
            let v = stat_multi_local(x, ell, t, sc.groups)?;
            Ok(ScaleDiagnostic::new(t, "multi", v, sc.r).with_ell(ell))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut d = Decision::from_entries("multi", GridKind::Multi, entries);
    if x.n() < 50 {
        d.warnings
            .push(format!("n={} is below the recommended minimum of 50", x.n()));
    }
    Ok(d)
}

/// Lag-1 sample autocovariance averaged over coordinates, with per-coordinate centring.
pub fn estimate_lag1(h: &DataMatrix) -> Result<f64> {
    let (p, m) = (h.p(), h.n());
    if m < 2 {
        return Err(Error::invalid("estimate_lag1 requires at least 2 columns"));
    }
    let mut total = 0.0;
    for j in 0..p {
        let row = h.row(j);
        let mean = row.iter().sum::<f64>() / m as f64;
        total += row.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>();
    }
    Ok(total / ((m - 1) as f64 * p as f64))
}

/// How the second moment `E Zbar_{t,g}(j)^2` of a block mean is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SecondMomentModel {
    /// User-supplied values keyed by scale `t`.
    Known { values: BTreeMap<usize, f64> },
    /// MA(1) plug-in with an estimated lag-1 autocorrelation.
    Ma1Plugin { r1: f64 },
}

/// `(b + 2 (b - 1) r1) / b^2` with block size `b = t / G`.
pub fn ma1_centering(t: usize, groups: usize, r1: f64) -> f64 {
    let b = (t / groups) as f64;
    (b + 2.0 * (b - 1.0) * r1) / (b * b)
}

impl SecondMomentModel {
    pub fn centering(&self, t: usize, groups: usize) -> Result<f64> {
        match self {
            SecondMomentModel::Known { values } => values
                .get(&t)
                .copied()
                .ok_or_else(|| Error::invalid(format!("no known second moment supplied for t={t}"))),
            SecondMomentModel::Ma1Plugin { r1 } => Ok(ma1_centering(t, groups, *r1)),
        }
    }
}

/// MoM dense test with the group centring replaced by the supplied second-moment model.
pub fn test_temporal(x: &DataMatrix, thr: &MomThresholds, model: &SecondMomentModel) -> Result<Decision> {
    let z = pair_differences(x);
    let entries = thr
        .scales
        .iter()
        .map(|sc| {
            let c = model.centering(sc.t, sc.groups)?;
            let v = sc.t as f64 * upper_median(&group_sums_centered(&z, sc.t, sc.groups, c)?)?;
            Ok(ScaleDiagnostic::new(sc.t, "dense", v, sc.r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decision::from_entries("temporal", GridKind::Single, entries))
}

/// Median-based selection: `sqrt(t / (2 G_res)) |upper median of even-half group means| >= a_res`.
pub fn restricted_selection(z: &PairedMatrix, t: usize, g_res: usize, a_res: f64) -> Result<Vec<bool>> {
    if t < 2 || t % 2 != 0 || t > z.m() {
        return Err(Error::invalid(format!(
            "restricted selection requires even 2 <= t <= m; got t={t}"
        )));
    }
    let plan = GroupingPlan::new(t, t / 2, g_res)?;
    let b = plan.group_size as f64;
    let factor = (t as f64 / (2.0 * g_res as f64)).sqrt();
    let mut means = vec![vec![0.0; g_res]; z.p()];
    for g in 0..g_res {
        for k in g * plan.group_size..(g + 1) * plan.group_size {
            for (j, v) in z.column(2 * k + 1).iter().enumerate() {
                means[j][g] += v / b;
            }
        }
    }
    means
        .iter()
        .map(|m| Ok(factor * upper_median(m)?.abs() >= a_res))
        .collect()
}

/// Restricted MoM test over the trimmed grid.
pub fn test_restricted_p(x: &DataMatrix, s: usize, t_res: f64, thr: &MomThresholds) -> Result<Decision> {
    check_sparsity(x.p(), s)?;
    let z = pair_differences(x);
    let entries = restricted_grid(x.n(), t_res)?
        .into_iter()
        .map(|t| {
            let sc = thr.scale(t)?;
            let selected = restricted_selection(&z, t, thr.g_res, thr.a_res)?;
            let count = selected.iter().filter(|&&b| b).count();
            let v = odd_half_mom(&z, t, sc.groups, &selected)?;
            Ok(ScaleDiagnostic::new(t, "mom+res", v, sc.r)
                .with_selected(count)
                .with_s(s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decision::from_entries("restricted-P", GridKind::Restricted, entries))
}

/// Restricted CUSUM test: `sum_j (Y_{t,1}(j)^2 - 1)` over median-selected coordinates.
pub fn test_restricted_g(x: &DataMatrix, s: usize, t_res: f64, thr: &MomThresholds) -> Result<Decision> {
    check_sparsity(x.p(), s)?;
    let z = pair_differences(x);
    let entries = restricted_grid(x.n(), t_res)?
        .into_iter()
        .map(|t| {
            let sc = thr.scale(t)?;
            let selected = restricted_selection(&z, t, thr.g_res, thr.a_res)?;
            let y1 = split_cusum(x, t)?.y1;
            let mut v = 0.0;
            let mut count = 0;
            for (y, &sel) in y1.iter().zip(&selected) {
                if sel {
                    v += y * y - 1.0;
                    count += 1;
                }
            }
            Ok(ScaleDiagnostic::new(t, "res", v, sc.r).with_selected(count).with_s(s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decision::from_entries("restricted-G", GridKind::Restricted, entries))
}
