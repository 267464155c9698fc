// SPDX-License-Identifier: MIT OR Apache-2.0

//! Tests built on robust mean estimators: the RSM sparse test, the combined
//! sparse test, the sparsity-adaptive test and the weak-moment test.

use crate::decision::{Decision, GridKind, ScaleDiagnostic};
use crate::error::{Error, Result};
use crate::model::{dyadic_grid, lllog, pair_differences, sparsity_grid, DataMatrix, PairedMatrix};
use crate::mom::{self, MomThresholds};
use crate::robust_mean::{CoverOptions, RobustMeanEstimator, RsmMode, RsmProblem, EXACT_BUDGET};
use crate::subweibull::{check_sparsity, sparse_g_at, Provenance};
use serde::{Deserialize, Serialize};
use std::f64::consts::E;

/// Scale cutoffs of a two-regime test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSchedule {
    /// Scales `t <= delta1` use the non-robust statistic.
    pub delta1: f64,
    /// Scales are capped at `delta2` inside `eta_t` and the robust thresholds.
    pub delta2: f64,
}

/// Which statistic a scale of a two-regime test uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Plain,
    Robust,
}

/// One scale of a two-regime test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeScale {
    pub t: usize,
    pub regime: Regime,
    pub r: f64,
    /// Failure probability handed to the robust estimator.
    pub eta: f64,
}

/// Thresholds of the RSM sparse test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsmThresholds {
    pub schedule: RegimeSchedule,
    pub a: f64,
    pub scales: Vec<RegimeScale>,
    pub provenance: Provenance,
}

/// Constants of one RSM parameter family.
struct RsmFamily {
    delta1: f64,
    delta2: f64,
    c_a: f64,
    c_small: f64,
    small_exp: f64,
    c_eta: f64,
    c_rsm: f64,
}

fn slog(p: usize, s: usize) -> f64 {
    s as f64 * (E * p as f64 / s as f64).ln()
}

fn clamp_eta(eta: f64) -> f64 {
    eta.clamp(f64::MIN_POSITIVE, 1.0 - 1e-12)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1); got {eps}")));
    }
    Ok(())
}

impl RsmThresholds {
    fn build(p: usize, n: usize, s: usize, alpha: f64, f: RsmFamily) -> Result<Self> {
        check_sparsity(p, s)?;
        if !(alpha >= 2.0) {
            return Err(Error::invalid(format!(
                "polynomial-tail order must be >= 2; got {alpha}"
            )));
        }
        let (sf, ratio) = (s as f64, p as f64 / s as f64);
        let ll1 = f.delta1.ln().max(0.0);
        let a = f.c_a * (ratio.powf(1.0 / alpha) + (ll1.ln().max(0.0) / sf).sqrt());
        let scales = dyadic_grid(n)?
            .scales
            .into_iter()
            .map(|t| {
                let capped = (t as f64).min(f.delta2);
                let eta = clamp_eta((slog(p, s) - capped / f.c_eta).exp());
                if (t as f64) <= f.delta1 {
                    let head = if t == 1 { sf * ratio.powf(2.0 / alpha) } else { 0.0 };
                    let r = f.c_small * (head + sf.powf(f.small_exp) * ll1.sqrt());
                    RegimeScale {
                        t,
                        regime: Regime::Plain,
                        r,
                        eta,
                    }
                } else {
                    RegimeScale {
                        t,
                        regime: Regime::Robust,
                        r: f.c_rsm * capped,
                        eta,
                    }
                }
            })
            .collect();
        Ok(Self {
            schedule: RegimeSchedule {
                delta1: f.delta1,
                delta2: f.delta2,
            },
            a,
            scales,
            provenance: Provenance::TheoryWithConstants,
        })
    }

    /// Single-level RSM test with constants `[C1, C2, C3, C4]`.
    pub fn theory(p: usize, n: usize, s: usize, alpha: f64, eps: f64, c: [f64; 4]) -> Result<Self> {
        check_eps(eps)?;
        let base = slog(p, s);
        let delta1 = c[2] * (base + (16.0 / eps).ln());
        let delta2 = c[2] * (base + (16.0 * (2.0 * n as f64).ln() / eps).ln());
        Self::build(
            p,
            n,
            s,
            alpha,
            RsmFamily {
                delta1,
                delta2,
                c_a: c[0],
                c_small: c[1],
                small_exp: 0.5,
                c_eta: c[2],
                c_rsm: c[3],
            },
        )
    }

    /// Per-level RSM parameters of the adaptive test with constants `[C4, C5, C6, C7]`.
    pub fn adaptive_theory(p: usize, n: usize, s: usize, alpha: f64, eps: f64, c: [f64; 4]) -> Result<Self> {
        check_eps(eps)?;
        let base = slog(p, s);
        let sf = s as f64;
        let delta1 = c[2] * (base + (80.0 * sf / eps).ln());
        let delta2 = c[2] * (base + (80.0 * sf * (2.0 * n as f64).ln() / eps).ln());
        Self::build(
            p,
            n,
            s,
            alpha,
            RsmFamily {
                delta1,
                delta2,
                c_a: c[0],
                c_small: c[1],
                small_exp: 0.75,
                c_eta: c[2],
                c_rsm: c[3],
            },
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scales.iter_mut().for_each(|sc| sc.r *= factor);
        out.provenance = Provenance::Calibrated;
        out
    }
}

/// Optimiser settings of the RSM test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsmSolver {
    pub mode: RsmMode,
    pub cover: CoverOptions,
    pub exact_budget: usize,
}

impl Default for RsmSolver {
    fn default() -> Self {
        Self {
            mode: RsmMode::Subgradient,
            cover: CoverOptions::default(),
            exact_budget: EXACT_BUDGET,
        }
    }
}

/// `A_t^RSM = t ||mu_hat(Z_1..Z_t; eta)||^2`.
pub fn stat_rsm(z: &PairedMatrix, t: usize, s: usize, eta: f64, solver: &RsmSolver) -> Result<f64> {
    let problem = RsmProblem::new(&z.prefix_vectors(t), s, eta, &solver.cover)?;
    let sol = match solver.mode {
        RsmMode::ExactSmall => problem.solve_exact(solver.exact_budget)?,
        RsmMode::Subgradient => problem.solve_subgradient()?,
    };
    Ok(t as f64 * sol.mu.iter().map(|m| m * m).sum::<f64>())
}

fn rsm_entries(
    x: &DataMatrix,
    z: &PairedMatrix,
    s: usize,
    thr: &RsmThresholds,
    solver: &RsmSolver,
    branch: &str,
) -> Result<Vec<ScaleDiagnostic>> {
    thr.scales
        .iter()
        .map(|sc| {
            Ok(match sc.regime {
                Regime::Plain => {
                    let (v, c) = sparse_g_at(x, sc.t, thr.a)?;
                    ScaleDiagnostic::new(sc.t, branch, v, sc.r).with_selected(c).with_s(s)
                }
                Regime::Robust => {
                    let v = stat_rsm(z, sc.t, s, sc.eta, solver)?;
                    ScaleDiagnostic::new(sc.t, branch, v, sc.r).with_s(s)
                }
            })
        })
        .collect()
}

/// RSM sparse test: thresholded CUSUM for `t <= delta1`, RSM estimate beyond.
pub fn test_sparse_p_rsm(x: &DataMatrix, s: usize, thr: &RsmThresholds, solver: &RsmSolver) -> Result<Decision> {
    check_sparsity(x.p(), s)?;
    let z = pair_differences(x);
    let entries = rsm_entries(x, &z, s, thr, solver, "rsm")?;
    let mut d = Decision::from_entries("sparse-P-RSM", GridKind::Single, entries);
    d.branch = Some("rsm".into());
    d.estimator = Some(format!("rsm-{}", mode_id(solver.mode)));
    Ok(d)
}

fn mode_id(mode: RsmMode) -> &'static str {
    match mode {
        RsmMode::ExactSmall => "exact-small",
        RsmMode::Subgradient => "subgradient",
    }
}

/// `log^{alpha-2}(log 8n)`, the dispatch bound of the combined and adaptive tests.
pub fn dispatch_bound(n: usize, alpha: f64) -> f64 {
    lllog(n).powf(alpha - 2.0)
}

/// True iff the combined sparse test uses the RSM branch (`p < bound`).
pub fn combined_uses_rsm(p: usize, n: usize, alpha: f64) -> bool {
    (p as f64) < dispatch_bound(n, alpha)
}

/// Thresholds of both branches of the combined sparse test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedThresholds {
    pub alpha: f64,
    pub rsm: Option<RsmThresholds>,
    pub mom: Option<MomThresholds>,
}

impl CombinedThresholds {
    /// Builds only the branch the dispatch rule selects.
    pub fn theory(
        p: usize,
        n: usize,
        s: usize,
        alpha: f64,
        eps: f64,
        c_rsm: [f64; 4],
        c_mom: [f64; 2],
    ) -> Result<Self> {
        Ok(if combined_uses_rsm(p, n, alpha) {
            Self {
                alpha,
                rsm: Some(RsmThresholds::theory(p, n, s, alpha, eps, c_rsm)?),
                mom: None,
            }
        } else {
            Self {
                alpha,
                rsm: None,
                mom: Some(MomThresholds::sparse_theory(p, n, s, alpha, c_mom)?),
            }
        })
    }
}

/// Combined sparse test: RSM if `p < log^{alpha-2}(log 8n)`, MoM otherwise.
pub fn test_sparse_p_combined(
    x: &DataMatrix,
    s: usize,
    thr: &CombinedThresholds,
    solver: &RsmSolver,
) -> Result<Decision> {
    let bound = dispatch_bound(x.n(), thr.alpha);
    let mut d = if combined_uses_rsm(x.p(), x.n(), thr.alpha) {
        let rsm = thr
            .rsm
            .as_ref()
            .ok_or_else(|| Error::invalid("combined test dispatched to RSM without RSM thresholds"))?;
        test_sparse_p_rsm(x, s, rsm, solver)?
    } else {
        let m = thr
            .mom
            .as_ref()
            .ok_or_else(|| Error::invalid("combined test dispatched to MoM without MoM thresholds"))?;
        mom::test_sparse_p_mom(x, s, m)?
    };
    d.dispatch_predicate = Some(bound);
    Ok(d)
}

/// Sparse branch of the adaptive test at one sparsity level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdaptiveLevel {
    Mom { s: usize, thresholds: MomThresholds },
    Rsm { s: usize, thresholds: RsmThresholds },
}

impl AdaptiveLevel {
    pub fn s(&self) -> usize {
        match self {
            AdaptiveLevel::Mom { s, .. } | AdaptiveLevel::Rsm { s, .. } => *s,
        }
    }
}

/// Thresholds of the sparsity-adaptive test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveThresholds {
    pub alpha: f64,
    pub dense: MomThresholds,
    pub levels: Vec<AdaptiveLevel>,
}

/// True iff the adaptive test's sparse levels use the RSM branch (`p <= bound`).
pub fn adaptive_uses_rsm(p: usize, n: usize, alpha: f64) -> bool {
    (p as f64) <= dispatch_bound(n, alpha)
}

impl AdaptiveThresholds {
    /// Theory thresholds with constants `[C1, ..., C7]`.
    pub fn theory(p: usize, n: usize, alpha: f64, eps: f64, c: [f64; 7]) -> Result<Self> {
        let dense = MomThresholds::dense_theory(p, n, alpha, c[0])?;
        let rsm = adaptive_uses_rsm(p, n, alpha);
        let levels = sparsity_grid(p)
            .levels
            .into_iter()
            .map(|s| {
                Ok(if rsm {
                    AdaptiveLevel::Rsm {
                        s,
                        thresholds: RsmThresholds::adaptive_theory(p, n, s, alpha, eps, [c[3], c[4], c[5], c[6]])?,
                    }
                } else {
                    AdaptiveLevel::Mom {
                        s,
                        thresholds: MomThresholds::adaptive_sparse_theory(p, n, s, alpha, [c[1], c[2]])?,
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alpha, dense, levels })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            alpha: self.alpha,
            dense: self.dense.scaled(factor),
            levels: self
                .levels
                .iter()
                .map(|l| match l {
                    AdaptiveLevel::Mom { s, thresholds } => AdaptiveLevel::Mom {
                        s: *s,
                        thresholds: thresholds.scaled(factor),
                    },
                    AdaptiveLevel::Rsm { s, thresholds } => AdaptiveLevel::Rsm {
                        s: *s,
                        thresholds: thresholds.scaled(factor),
                    },
                })
                .collect(),
        }
    }
}

/// `phi_dense OR max_s phi_sparse,s` over the sparsity grid.
pub fn test_adaptive(x: &DataMatrix, thr: &AdaptiveThresholds, solver: &RsmSolver) -> Result<Decision> {
    let mut entries = mom::test_dense_p(x, &thr.dense)?.entries;
    let z = pair_differences(x);
    for level in &thr.levels {
        let s = level.s();
        check_sparsity(x.p(), s)?;
        let tag = format!("sparse:{s}");
        match level {
            AdaptiveLevel::Mom { thresholds, .. } => {
                for sc in &thresholds.scales {
                    let (v, c) = mom::stat_mom_sparse_pairs(&z, sc.t, thresholds.a, sc.groups)?;
                    entries.push(
                        ScaleDiagnostic::new(sc.t, tag.clone(), v, sc.r)
                            .with_selected(c)
                            .with_s(s),
                    );
                }
            }
            AdaptiveLevel::Rsm { thresholds, .. } => entries.extend(rsm_entries(x, &z, s, thresholds, solver, &tag)?),
        }
    }
    let mut d = Decision::from_entries("adaptive", GridKind::Single, entries);
    let first = d.firing().next().map(|e| e.branch.clone());
    d.branch = first;
    d.dispatch_predicate = Some(dispatch_bound(x.n(), thr.alpha));
    Ok(d)
}

/// Thresholds of the weak-moment test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakMomentThresholds {
    pub alpha: f64,
    pub schedule: RegimeSchedule,
    pub scales: Vec<RegimeScale>,
    pub provenance: Provenance,
}

/// Default `C2` of the weak-moment schedule; keeps `ceil(8 log(1/eta_t)) <= t`.
pub const WEAK_MOMENT_C2: f64 = 8.0;

impl WeakMomentThresholds {
    /// Theory thresholds with constants `[C1, C2, C3]`.
    pub fn theory(p: usize, n: usize, alpha: f64, eps: f64, c: [f64; 3]) -> Result<Self> {
        check_eps(eps)?;
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::invalid(format!(
                "weak-moment test requires 1 < alpha <= 2; got {alpha}"
            )));
        }
        let delta1 = c[1] * (16.0 / eps).ln();
        let delta2 = c[1] * (16.0 * (2.0 * n as f64).ln() / eps).ln();
        let pf = p as f64;
        let ex = (alpha - 1.0) / alpha;
        let small = c[0] * delta1.powf((2.0 - alpha) / (2.0 * alpha)) * delta1.ln().max(0.0).powf(1.0 / alpha);
        let scales = dyadic_grid(n)?
            .scales
            .into_iter()
            .map(|t| {
                let tf = t as f64;
                let eta = clamp_eta((-tf.min(delta2) / c[1]).exp());
                if tf <= delta1 {
                    RegimeScale {
                        t,
                        regime: Regime::Plain,
                        r: small * (pf / tf).sqrt(),
                        eta,
                    }
                } else {
                    let r = c[2] * ((pf / tf).sqrt() + (pf / tf).powf(ex) + ((1.0 / eta).ln() / tf).powf(ex));
                    RegimeScale {
                        t,
                        regime: Regime::Robust,
                        r,
                        eta,
                    }
                }
            })
            .collect();
        Ok(Self {
            alpha,
            schedule: RegimeSchedule { delta1, delta2 },
            scales,
            provenance: Provenance::TheoryWithConstants,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scales.iter_mut().for_each(|sc| sc.r *= factor);
        out.provenance = Provenance::Calibrated;
        out
    }
}

/// `||sum_{i<=t} Z_i / t||_2`.
pub fn stat_weak_plain(z: &PairedMatrix, t: usize) -> f64 {
    let mut acc = vec![0.0; z.p()];
    for i in 0..t {
        for (a, v) in acc.iter_mut().zip(z.column(i)) {
            *a += v;
        }
    }
    acc.iter().map(|a| (a / t as f64).powi(2)).sum::<f64>().sqrt()
}

/// Weak-moment test with a pluggable robust mean estimator for `t > delta1`.
pub fn test_weakmoment(
    x: &DataMatrix,
    thr: &WeakMomentThresholds,
    estimator: &dyn RobustMeanEstimator,
) -> Result<Decision> {
    let z = pair_differences(x);
    let entries = thr
        .scales
        .iter()
        .map(|sc| {
            Ok(match sc.regime {
                Regime::Plain => ScaleDiagnostic::new(sc.t, "plain", stat_weak_plain(&z, sc.t), sc.r),
                Regime::Robust => {
                    let mu = estimator.estimate(&z.prefix_vectors(sc.t), sc.eta)?;
                    ScaleDiagnostic::new(sc.t, "rm", mu.iter().map(|m| m * m).sum::<f64>().sqrt(), sc.r)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut d = Decision::from_entries("weak-moment", GridKind::Single, entries);
    d.branch = Some("rm".into());
    d.estimator = Some(estimator.id().to_string());
    Ok(d)
}
