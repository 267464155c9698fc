// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo calibration of threshold constants, risk estimation and power curves.

use crate::advanced::{
    self, AdaptiveThresholds, CombinedThresholds, RsmSolver, RsmThresholds, WeakMomentThresholds, WEAK_MOMENT_C2,
};
use crate::decision::Decision;
use crate::error::{Error, Result};
use crate::generators::{gen_dataset_with, NoiseSpec, SignalSpec};
use crate::model::DataMatrix;
use crate::mom::{self, MomThresholds, SecondMomentModel};
use crate::rng::{stream, Purpose};
use crate::robust_mean::GeoMom;
use crate::subweibull::{self, SubweibullThresholds};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn default_eps() -> f64 {
    0.1
}

/// A test and its structural parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum TestSpec {
    #[serde(rename = "dense-G")]
    DenseG,
    #[serde(rename = "sparse-G")]
    SparseG { s: usize, alpha: f64 },
    #[serde(rename = "dense-P")]
    DenseP { alpha: f64 },
    #[serde(rename = "sparse-P-MoM")]
    SparsePMom { s: usize, alpha: f64 },
    #[serde(rename = "sparse-P-RSM")]
    SparsePRsm {
        s: usize,
        alpha: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    #[serde(rename = "sparse-P-combined")]
    SparsePCombined {
        s: usize,
        alpha: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    #[serde(rename = "adaptive")]
    Adaptive {
        alpha: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    #[serde(rename = "multi")]
    Multi,
    /// Temporal test with the MA(1) plug-in at a fixed lag-1 autocorrelation.
    #[serde(rename = "temporal")]
    Temporal {
        #[serde(default)]
        r1: f64,
    },
    /// `t_res` defaults to its theory value.
    #[serde(rename = "restricted-P")]
    RestrictedP {
        s: usize,
        #[serde(default)]
        t_res: Option<f64>,
    },
    #[serde(rename = "restricted-G")]
    RestrictedG {
        s: usize,
        #[serde(default)]
        t_res: Option<f64>,
    },
    #[serde(rename = "weak-moment")]
    WeakMoment {
        alpha: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

/// Threshold set of any test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestThresholds {
    Subweibull(SubweibullThresholds),
    Mom(MomThresholds),
    Rsm(RsmThresholds),
    Combined(CombinedThresholds),
    Adaptive(AdaptiveThresholds),
    WeakMoment(WeakMomentThresholds),
}

impl TestThresholds {
    /// Copy with every detection threshold multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            TestThresholds::Subweibull(t) => TestThresholds::Subweibull(t.scaled(factor)),
            TestThresholds::Mom(t) => TestThresholds::Mom(t.scaled(factor)),
            TestThresholds::Rsm(t) => TestThresholds::Rsm(t.scaled(factor)),
            TestThresholds::Combined(t) => TestThresholds::Combined(CombinedThresholds {
                alpha: t.alpha,
                rsm: t.rsm.as_ref().map(|r| r.scaled(factor)),
                mom: t.mom.as_ref().map(|m| m.scaled(factor)),
            }),
            TestThresholds::Adaptive(t) => TestThresholds::Adaptive(t.scaled(factor)),
            TestThresholds::WeakMoment(t) => TestThresholds::WeakMoment(t.scaled(factor)),
        }
    }

    /// Flat `(threshold_id, value)` listing.
    pub fn table(&self) -> Vec<(String, f64)> {
        fn mom_rows(prefix: &str, m: &MomThresholds, out: &mut Vec<(String, f64)>) {
            for sc in &m.scales {
                out.push((format!("{prefix}r[t={}]", sc.t), sc.r));
            }
            if m.a > 0.0 {
                out.push((format!("{prefix}a"), m.a));
            }
            if m.a_res > 0.0 {
                out.push((format!("{prefix}a_res"), m.a_res));
            }
        }
        fn regime_rows(prefix: &str, scales: &[advanced::RegimeScale], out: &mut Vec<(String, f64)>) {
            for sc in scales {
                out.push((format!("{prefix}r[t={}]", sc.t), sc.r));
            }
        }
        let mut out = Vec::new();
        match self {
            TestThresholds::Subweibull(t) => {
                out.push(("r".into(), t.r));
                out.push(("r1".into(), t.r1));
                if t.a > 0.0 {
                    out.push(("a".into(), t.a));
                }
            }
            TestThresholds::Mom(m) => mom_rows("", m, &mut out),
            TestThresholds::Rsm(r) => {
                regime_rows("", &r.scales, &mut out);
                out.push(("a".into(), r.a));
            }
            TestThresholds::Combined(c) => {
                if let Some(r) = &c.rsm {
                    regime_rows("rsm.", &r.scales, &mut out);
                    out.push(("rsm.a".into(), r.a));
                }
                if let Some(m) = &c.mom {
                    mom_rows("mom.", m, &mut out);
                }
            }
            TestThresholds::Adaptive(a) => {
                mom_rows("dense.", &a.dense, &mut out);
                for level in &a.levels {
                    let prefix = format!("s={}.", level.s());
                    match level {
                        advanced::AdaptiveLevel::Mom { thresholds, .. } => mom_rows(&prefix, thresholds, &mut out),
                        advanced::AdaptiveLevel::Rsm { thresholds, .. } => {
                            regime_rows(&prefix, &thresholds.scales, &mut out);
                            out.push((format!("{prefix}a"), thresholds.a));
                        }
                    }
                }
            }
            TestThresholds::WeakMoment(w) => regime_rows("", &w.scales, &mut out),
        }
        out
    }
}

fn mismatch(id: &str) -> Error {
    Error::invalid(format!("thresholds do not match test {id}"))
}

impl TestSpec {
    pub fn id(&self) -> &'static str {
        match self {
            TestSpec::DenseG => "dense-G",
            TestSpec::SparseG { .. } => "sparse-G",
            TestSpec::DenseP { .. } => "dense-P",
            TestSpec::SparsePMom { .. } => "sparse-P-MoM",
            TestSpec::SparsePRsm { .. } => "sparse-P-RSM",
            TestSpec::SparsePCombined { .. } => "sparse-P-combined",
            TestSpec::Adaptive { .. } => "adaptive",
            TestSpec::Multi => "multi",
            TestSpec::Temporal { .. } => "temporal",
            TestSpec::RestrictedP { .. } => "restricted-P",
            TestSpec::RestrictedG { .. } => "restricted-G",
            TestSpec::WeakMoment { .. } => "weak-moment",
        }
    }

    /// True for tests that compare one statistic family against one scalar threshold.
    pub fn single_threshold(&self) -> bool {
        matches!(self, TestSpec::DenseG | TestSpec::Multi | TestSpec::RestrictedG { .. })
    }

    fn t_res(&self, p: usize, n: usize) -> Option<f64> {
        match self {
            TestSpec::RestrictedP { s, t_res } | TestSpec::RestrictedG { s, t_res } => {
                Some(t_res.unwrap_or_else(|| mom::t_res_theory(p, *s, n)))
            }
            _ => None,
        }
    }

    /// Theory-shaped threshold profile: every constant set to 1.
    pub fn profile(&self, p: usize, n: usize) -> Result<TestThresholds> {
        Ok(match self {
            TestSpec::DenseG => TestThresholds::Subweibull(SubweibullThresholds::dense_theory(p, n, 1.0)),
            TestSpec::SparseG { s, alpha } => {
                TestThresholds::Subweibull(SubweibullThresholds::sparse_theory(p, n, *s, *alpha, [1.0; 3])?)
            }
            TestSpec::DenseP { alpha } => TestThresholds::Mom(MomThresholds::dense_theory(p, n, *alpha, 1.0)?),
            TestSpec::SparsePMom { s, alpha } => {
                TestThresholds::Mom(MomThresholds::sparse_theory(p, n, *s, *alpha, [1.0; 2])?)
            }
            TestSpec::SparsePRsm { s, alpha, eps } => {
                TestThresholds::Rsm(RsmThresholds::theory(p, n, *s, *alpha, *eps, [1.0; 4])?)
            }
            TestSpec::SparsePCombined { s, alpha, eps } => {
                TestThresholds::Combined(CombinedThresholds::theory(p, n, *s, *alpha, *eps, [1.0; 4], [1.0; 2])?)
            }
            TestSpec::Adaptive { alpha, eps } => {
                TestThresholds::Adaptive(AdaptiveThresholds::theory(p, n, *alpha, *eps, [1.0; 7])?)
            }
            TestSpec::Multi => TestThresholds::Mom(MomThresholds::multi_theory(p, n, 1.0)?),
            TestSpec::Temporal { .. } => TestThresholds::Mom(MomThresholds::temporal_theory(p, n, 1.0, 1.0)?),
            TestSpec::RestrictedP { s, .. } => {
                let t_res = self.t_res(p, n).expect("restricted test");
                TestThresholds::Mom(MomThresholds::restricted_p_theory(p, n, *s, t_res, [1.0; 2])?)
            }
            TestSpec::RestrictedG { s, .. } => {
                let t_res = self.t_res(p, n).expect("restricted test");
                TestThresholds::Mom(MomThresholds::restricted_g_theory(p, n, *s, t_res, [1.0; 2])?)
            }
            TestSpec::WeakMoment { alpha, eps } => TestThresholds::WeakMoment(WeakMomentThresholds::theory(
                p,
                n,
                *alpha,
                *eps,
                [1.0, WEAK_MOMENT_C2, 1.0],
            )?),
        })
    }

    /// Runs the test on `x` against `thr`.
    pub fn run(&self, x: &DataMatrix, thr: &TestThresholds) -> Result<Decision> {
        let solver = RsmSolver::default();
        let id = self.id();
        match (self, thr) {
            (TestSpec::DenseG, TestThresholds::Subweibull(t)) => subweibull::test_dense_g(x, t),
            (TestSpec::SparseG { s, .. }, TestThresholds::Subweibull(t)) => subweibull::test_sparse_g(x, *s, t),
            (TestSpec::DenseP { .. }, TestThresholds::Mom(t)) => mom::test_dense_p(x, t),
            (TestSpec::SparsePMom { s, .. }, TestThresholds::Mom(t)) => mom::test_sparse_p_mom(x, *s, t),
            (TestSpec::SparsePRsm { s, .. }, TestThresholds::Rsm(t)) => advanced::test_sparse_p_rsm(x, *s, t, &solver),
            (TestSpec::SparsePCombined { s, .. }, TestThresholds::Combined(t)) => {
                advanced::test_sparse_p_combined(x, *s, t, &solver)
            }
            (TestSpec::Adaptive { .. }, TestThresholds::Adaptive(t)) => advanced::test_adaptive(x, t, &solver),
            (TestSpec::Multi, TestThresholds::Mom(t)) => mom::test_multi(x, t),
            (TestSpec::Temporal { r1 }, TestThresholds::Mom(t)) => {
                mom::test_temporal(x, t, &SecondMomentModel::Ma1Plugin { r1: *r1 })
            }
            (TestSpec::RestrictedP { s, .. }, TestThresholds::Mom(t)) => {
                mom::test_restricted_p(x, *s, self.t_res(x.p(), x.n()).expect("restricted test"), t)
            }
            (TestSpec::RestrictedG { s, .. }, TestThresholds::Mom(t)) => {
                mom::test_restricted_g(x, *s, self.t_res(x.p(), x.n()).expect("restricted test"), t)
            }
            (TestSpec::WeakMoment { .. }, TestThresholds::WeakMoment(t)) => advanced::test_weakmoment(x, t, &GeoMom),
            _ => Err(mismatch(id)),
        }
    }

    /// `M(X) = max_b stat_b / threshold_b` against the profile.
    pub fn scalar(&self, x: &DataMatrix, profile: &TestThresholds) -> Result<f64> {
        let d = self.run(x, profile)?;
        d.entries.iter().try_fold(f64::NEG_INFINITY, |m, e| {
            if !(e.threshold > 0.0) {
                return Err(Error::CalibrationFailure(format!(
                    "profile threshold at t={} of {} is not positive",
                    e.t,
                    self.id()
                )));
            }
            Ok(m.max(e.stat / e.threshold))
        })
    }
}

/// Outcome of a threshold calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub test: TestSpec,
    pub null: NoiseSpec,
    pub p: usize,
    pub n: usize,
    pub eps: f64,
    pub reps: usize,
    pub seed: u64,
    /// Multiplier applied to the profile.
    pub multiplier: f64,
    pub thresholds: TestThresholds,
    /// In-sample null rejection rate at the calibrated thresholds.
    pub achieved: f64,
    pub achieved_se: f64,
}

fn binomial_se(q: f64, reps: usize) -> f64 {
    (q * (1.0 - q) / reps as f64).sqrt()
}

fn par_reps<T: Send>(reps: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..reps as u64).into_par_iter().map(f).collect()
}

/// Null values of `M(X)` over `reps` replicates, in replicate order.
pub fn null_scalars(
    test: &TestSpec,
    null: &NoiseSpec,
    p: usize,
    n: usize,
    reps: usize,
    seed: u64,
    purpose: Purpose,
) -> Result<Vec<f64>> {
    let profile = test.profile(p, n)?;
    let signal = SignalSpec::Null { p, n, base: None };
    par_reps(reps, |i| {
        let mut rng = stream(seed, i, purpose);
        let x = gen_dataset_with(&signal, null, &mut rng)?;
        test.scalar(&x, &profile)
    })
}

/// `ceil((1 - eps) R)`-th order statistic (1-based) of `values`.
pub fn order_statistic_threshold(values: &[f64], eps: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = (((1.0 - eps) * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

/// Smallest sample value `c` whose exceedance rate `#{M > c} / R` is at most `eps`, by bisection.
pub fn bisect_multiplier(values: &[f64], eps: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let r = v.len();
    let exceed = |k: usize| r - v.partition_point(|&m| m <= v[k]);
    let (mut lo, mut hi) = (0usize, r - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if exceed(mid) as f64 <= eps * r as f64 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    v[lo]
}

fn check_level(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1); got {eps}")));
    }
    Ok(())
}

/// Calibrates the single free multiplier of `test` to null level `eps`.
pub fn calibrate(
    test: &TestSpec,
    null: &NoiseSpec,
    p: usize,
    n: usize,
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<CalibrationResult> {
    check_level(eps)?;
    if reps < 200 {
        return Err(Error::invalid(format!(
            "calibration needs at least 200 replicates; got {reps}"
        )));
    }
    let m = null_scalars(test, null, p, n, reps, seed, Purpose::Calibration)?;
    calibrate_from_scalars(test, null, p, n, eps, seed, &m)
}

/// Calibration from precomputed null scalars.
pub fn calibrate_from_scalars(
    test: &TestSpec,
    null: &NoiseSpec,
    p: usize,
    n: usize,
    eps: f64,
    seed: u64,
    m: &[f64],
) -> Result<CalibrationResult> {
    check_level(eps)?;
    if m.is_empty() {
        return Err(Error::invalid("calibration needs at least one replicate"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::CalibrationFailure(format!(
            "{} produced a non-finite null statistic",
            test.id()
        )));
    }
    if m.iter().all(|&v| v == m[0]) {
        return Err(Error::CalibrationFailure(format!(
            "{} has a degenerate null distribution (all {} replicates equal {})",
            test.id(),
            m.len(),
            m[0]
        )));
    }
    let multiplier = if test.single_threshold() {
        order_statistic_threshold(m, eps)
    } else {
        bisect_multiplier(m, eps)
    };
    let achieved = m.iter().filter(|&&v| v > multiplier).count() as f64 / m.len() as f64;
    Ok(CalibrationResult {
        test: test.clone(),
        null: null.clone(),
        p,
        n,
        eps,
        reps: m.len(),
        seed,
        multiplier,
        thresholds: test.profile(p, n)?.scaled(multiplier),
        achieved,
        achieved_se: binomial_se(achieved, m.len()),
    })
}

/// Signal and noise of one hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub signal: SignalSpec,
    pub noise: NoiseSpec,
}

/// Empirical risk of a test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub type1: f64,
    pub type2: f64,
    pub total: f64,
    pub se1: f64,
    pub se2: f64,
    #[serde(rename = "R")]
    pub reps: usize,
}

/// Rejection rate of `test` on `reps` datasets from `scenario`.
pub fn rejection_rate(
    test: &TestSpec,
    thr: &TestThresholds,
    scenario: &Scenario,
    reps: usize,
    seed: u64,
    purpose: Purpose,
) -> Result<f64> {
    if reps == 0 {
        return Err(Error::invalid("at least one replicate is required"));
    }
    let hits = par_reps(reps, |i| {
        let mut rng = stream(seed, i, purpose);
        let x = gen_dataset_with(&scenario.signal, &scenario.noise, &mut rng)?;
        Ok(test.run(&x, thr)?.reject)
    })?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / reps as f64)
}

/// `E[phi]` under the null plus `E[1 - phi]` under the alternative.
pub fn estimate_risk(
    test: &TestSpec,
    thr: &TestThresholds,
    null: &Scenario,
    alt: &Scenario,
    reps: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    if null.signal.dims() != alt.signal.dims() {
        return Err(Error::invalid(format!(
            "null and alternative dimensions differ: {:?} vs {:?}",
            null.signal.dims(),
            alt.signal.dims()
        )));
    }
    let type1 = rejection_rate(test, thr, null, reps, seed, Purpose::NullNoise)?;
    let type2 = 1.0 - rejection_rate(test, thr, alt, reps, seed, Purpose::AltNoise)?;
    Ok(RiskEstimate {
        type1,
        type2,
        total: type1 + type2,
        se1: binomial_se(type1, reps),
        se2: binomial_se(type2, reps),
        reps,
    })
}

/// Single-change alternatives indexed by `rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerDesign {
    pub p: usize,
    pub n: usize,
    pub t0: usize,
    /// Number of leading coordinates carrying the change, with equal weight.
    pub s: usize,
    pub noise: NoiseSpec,
}

impl PowerDesign {
    /// Change vector with `t0 (n - t0) / n ||delta||^2 = rho^2`.
    pub fn signal(&self, rho: f64) -> Result<SignalSpec> {
        if self.s == 0 || self.s > self.p {
            return Err(Error::invalid(format!(
                "design sparsity must satisfy 1 <= s <= p; got {}",
                self.s
            )));
        }
        if self.t0 == 0 || self.t0 >= self.n {
            return Err(Error::invalid(format!("t0 must lie in [1, n-1]; got {}", self.t0)));
        }
        let (n, t0) = (self.n as f64, self.t0 as f64);
        let size = rho / (t0 * (n - t0) / n).sqrt() / (self.s as f64).sqrt();
        let delta = (0..self.p).map(|j| if j < self.s { size } else { 0.0 }).collect();
        Ok(SignalSpec::SingleChange {
            p: self.p,
            n: self.n,
            t0: self.t0,
            delta,
            base: None,
            s: self.s,
        })
    }
}

/// One point of a power curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub rho: f64,
    pub power: f64,
    pub se: f64,
}

/// Power estimates over a `rho` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub rows: Vec<PowerRow>,
    pub reps: usize,
}

impl PowerCurve {
    /// Smallest grid `rho` with power at least `beta`.
    pub fn rho_star(&self, beta: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.power >= beta).map(|r| r.rho)
    }

    /// Largest change made by isotonic smoothing, in units of the point's SE
    /// (floored at `1/R` so that points at 0 or 1 keep a nonzero scale).
    pub fn max_isotonic_deviation(&self) -> f64 {
        let powers: Vec<f64> = self.rows.iter().map(|r| r.power).collect();
        let fitted = isotonic_fit(&powers, &vec![1.0; powers.len()]);
        let floor = 1.0 / self.reps as f64;
        self.rows
            .iter()
            .zip(&fitted)
            .map(|(r, f)| (r.power - f).abs() / r.se.max(floor))
            .fold(0.0, f64::max)
    }
}

/// Weighted least-squares nondecreasing fit (pool adjacent violators).
pub fn isotonic_fit(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (v2, w2, c2) = blocks.pop().expect("two blocks");
            let (v1, w1, c1) = blocks.pop().expect("two blocks");
            blocks.push(((v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, c1 + c2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, _, c)| std::iter::repeat_n(v, c))
        .collect()
}

/// Power at each `rho`; replicate `i` reuses the same noise draw at every grid point.
pub fn power_curve(
    test: &TestSpec,
    thr: &TestThresholds,
    design: &PowerDesign,
    rhos: &[f64],
    reps: usize,
    seed: u64,
) -> Result<PowerCurve> {
    if rhos.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("rho grid must be strictly increasing"));
    }
    let rows = rhos
        .iter()
        .map(|&rho| {
            let scenario = Scenario {
                signal: design.signal(rho)?,
                noise: design.noise.clone(),
            };
            let power = rejection_rate(test, thr, &scenario, reps, seed, Purpose::AltNoise)?;
            Ok(PowerRow {
                rho,
                power,
                se: binomial_se(power, reps),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve { rows, reps })
}

/// Evenly spaced grid of `count` points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
