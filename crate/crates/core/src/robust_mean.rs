// SPDX-License-Identifier: MIT OR Apache-2.0

//! Robust mean estimation: univariate estimators, sparse sphere covers, the
//! min-max sparse mean estimator and a geometric median-of-means.

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Univariate robust mean strategy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Robust1dStrategy {
    /// Midpoint of the shortest window holding `ceil(n (1 - d))` sorted samples,
    /// `d = min(1/3, c log(1/delta) / n)`.
    ShortestInterval { c: f64 },
    /// Upper median of `ceil(8 log(1/delta))` contiguous group means.
    MedianOfMeans,
    /// Mean after dropping `floor(n d / 2)` samples from each end, `d` as above.
    TrimmedMean { c: f64 },
}

impl Default for Robust1dStrategy {
    fn default() -> Self {
        Robust1dStrategy::ShortestInterval { c: 1.0 }
    }
}

fn check_prob(delta: f64, name: &str) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("{name} must lie in (0, 1); got {delta}")));
    }
    Ok(())
}

fn contamination(n: usize, delta: f64, c: f64) -> f64 {
    (1.0f64 / 3.0).min(c * (1.0 / delta).ln() / n as f64)
}

/// Number of groups `ceil(8 log(1/delta))`, at least 1.
pub fn mom_group_count(delta: f64) -> usize {
    ((8.0 * (1.0 / delta).ln()).ceil() as usize).max(1)
}

/// Means of `k` contiguous groups whose sizes differ by at most one.
fn contiguous_group_means<T: Copy>(
    n: usize,
    k: usize,
    mut value: impl FnMut(usize) -> T,
    mut acc: impl FnMut(usize, T),
) {
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    for g in 0..k {
        let size = base + usize::from(g < extra);
        for i in start..start + size {
            acc(g, value(i));
        }
        start += size;
    }
}

fn group_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|g| n / k + usize::from(g < n % k)).collect()
}

/// Robust mean of `samples` with the default shortest-interval strategy.
pub fn robust_1d(samples: &[f64], delta: f64) -> Result<f64> {
    robust_1d_with(samples, delta, Robust1dStrategy::default())
}

/// Robust mean of `samples` with an explicit strategy.
pub fn robust_1d_with(samples: &[f64], delta: f64, strategy: Robust1dStrategy) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("robust_1d requires at least one sample"));
    }
    check_prob(delta, "delta")?;
    let n = samples.len();
    match strategy {
        Robust1dStrategy::ShortestInterval { c } => {
            let mut v = samples.to_vec();
            v.sort_by(f64::total_cmp);
            let m = ((n as f64 * (1.0 - contamination(n, delta, c))).ceil() as usize).clamp(1, n);
            let best = (0..=n - m)
                .min_by(|&a, &b| (v[a + m - 1] - v[a]).total_cmp(&(v[b + m - 1] - v[b])).then(a.cmp(&b)))
                .expect("at least one window");
            Ok(0.5 * (v[best] + v[best + m - 1]))
        }
        Robust1dStrategy::MedianOfMeans => {
            let k = mom_group_count(delta).min(n);
            let sizes = group_sizes(n, k);
            let mut sums = vec![0.0; k];
            contiguous_group_means(n, k, |i| samples[i], |g, x| sums[g] += x);
            let means: Vec<f64> = sums.iter().zip(&sizes).map(|(s, &c)| s / c as f64).collect();
            crate::model::upper_median(&means)
        }
        Robust1dStrategy::TrimmedMean { c } => {
            let mut v = samples.to_vec();
            v.sort_by(f64::total_cmp);
            let k = ((n as f64 * contamination(n, delta, c) / 2.0).floor() as usize).min((n - 1) / 2);
            let kept = &v[k..n - k];
            Ok(kept.iter().sum::<f64>() / kept.len() as f64)
        }
    }
}

/// `C(n, k)` as a float, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Limits on the cover and on exact RSM optimisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverOptions {
    /// Maximum number of enumerated supports.
    pub support_budget: usize,
    /// Maximum number of cover vectors.
    pub vector_budget: usize,
    /// Sample `support_budget` random supports instead of failing.
    pub random_support_fallback: bool,
    pub seed: u64,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            support_budget: 20_000,
            vector_budget: 2_000_000,
            random_support_fallback: false,
            seed: 0x5eed_c0de,
        }
    }
}

/// Covering radius targeted by the greedy net; the certified radius is 0.5.
pub const NET_RADIUS: f64 = 0.4;
/// Guaranteed covering radius of a [`SparseCover`].
pub const COVER_RADIUS: f64 = 0.5;
const NET_SEED: u64 = 0x0c0f_fee5;
const CHECK_POINTS: usize = 10_000;

fn unit_normal(k: usize, rng: &mut crate::rng::StreamRng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn pool_size(k: usize) -> usize {
    match k {
        2 => 2_048,
        3 => 8_192,
        4 => 32_768,
        _ => 65_536,
    }
}

/// A net of `S^{k-1}` with covering radius at most 0.5 on a verification sample.
fn build_net(k: usize, vector_budget: usize) -> Result<Vec<Vec<f64>>> {
    if k == 1 {
        return Ok(vec![vec![1.0], vec![-1.0]]);
    }
    let mut rng = stream(NET_SEED, k as u64, Purpose::Cover);
    let pool: Vec<Vec<f64>> = (0..pool_size(k)).map(|_| unit_normal(k, &mut rng)).collect();
    let mut net = vec![pool[0].clone()];
    let mut mind: Vec<f64> = pool.iter().map(|q| dist(q, &pool[0])).collect();
    loop {
        let (far, &gap) = mind
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty pool");
        if gap <= NET_RADIUS {
            break;
        }
        if net.len() >= vector_budget {
            return Err(Error::ResourceLimit(format!(
                "net of S^{} exceeds {vector_budget} vectors",
                k - 1
            )));
        }
        let added = pool[far].clone();
        for (m, q) in mind.iter_mut().zip(&pool) {
            *m = m.min(dist(q, &added));
        }
        net.push(added);
    }
    let mut check = stream(NET_SEED, k as u64, Purpose::Validation);
    for _ in 0..CHECK_POINTS {
        let q = unit_normal(k, &mut check);
        if net.iter().all(|v| dist(v, &q) > COVER_RADIUS) {
            net.push(q);
        }
    }
    Ok(net)
}

fn cached_net(k: usize, vector_budget: usize) -> Result<Arc<Vec<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Vec<f64>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(net) = cache.lock().expect("net cache").get(&k) {
        return Ok(net.clone());
    }
    let net = Arc::new(build_net(k, vector_budget)?);
    cache.lock().expect("net cache").entry(k).or_insert_with(|| net.clone());
    Ok(net)
}

/// A 1/2-cover of the `2s`-sparse unit vectors in `R^p`.
///
/// Vectors are the product of a support list and a shared net of the unit
/// sphere in `R^k`, `k = min(2s, p)`.
#[derive(Clone, Debug)]
pub struct SparseCover {
    pub p: usize,
    pub s: usize,
    pub k: usize,
    pub radius: f64,
    pub supports: Vec<Vec<usize>>,
    pub net: Arc<Vec<Vec<f64>>>,
    /// False when supports were sampled rather than enumerated.
    pub complete: bool,
}

/// One cover vector in sparse form.
#[derive(Clone, Copy, Debug)]
pub struct CoverVector<'a> {
    pub support: &'a [usize],
    pub values: &'a [f64],
}

impl CoverVector<'_> {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.support.iter().zip(self.values).map(|(&j, v)| v * x[j]).sum()
    }

    pub fn to_dense(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (&j, &v) in self.support.iter().zip(self.values) {
            out[j] = v;
        }
        out
    }
}

impl SparseCover {
    pub fn len(&self) -> usize {
        self.supports.len() * self.net.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vector `idx`, enumerated support-major.
    pub fn vector(&self, idx: usize) -> CoverVector<'_> {
        let m = self.net.len();
        CoverVector {
            support: &self.supports[idx / m],
            values: &self.net[idx % m],
        }
    }

    pub fn vectors(&self) -> impl Iterator<Item = CoverVector<'_>> {
        (0..self.len()).map(move |i| self.vector(i))
    }

    /// Distance from a unit vector to its nearest cover element.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let xx: f64 = x.iter().map(|v| v * v).sum();
        self.vectors()
            .map(|u| {
                let uu: f64 = u.values.iter().map(|v| v * v).sum();
                (xx + uu - 2.0 * u.dot(x)).max(0.0).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds the cover with the default options.
pub fn sparse_cover(p: usize, s: usize) -> Result<SparseCover> {
    sparse_cover_with(p, s, &CoverOptions::default())
}

/// Builds the cover under explicit budgets.
pub fn sparse_cover_with(p: usize, s: usize, opts: &CoverOptions) -> Result<SparseCover> {
    if s == 0 || s > p {
        return Err(Error::invalid(format!("cover requires 1 <= s <= p; got s={s}, p={p}")));
    }
    let k = (2 * s).min(p);
    let count = binomial(p, k);
    let net = cached_net(k, opts.vector_budget)?;
    let (supports, complete) = if count <= opts.support_budget as f64 {
        (combinations(p, k), true)
    } else if opts.random_support_fallback {
        let mut rng = stream(opts.seed, 0, Purpose::Cover);
        let supports = (0..opts.support_budget)
            .map(|_| {
                let mut idx = rand::seq::index::sample(&mut rng, p, k).into_vec();
                idx.sort_unstable();
                idx
            })
            .collect();
        (supports, false)
    } else {
        return Err(Error::ResourceLimit(format!(
            "cover needs C({p},{k}) = {count:.3e} supports, above the budget of {}",
            opts.support_budget
        )));
    };
    let cover = SparseCover {
        p,
        s,
        k,
        radius: COVER_RADIUS,
        supports,
        net,
        complete,
    };
    if cover.len() > opts.vector_budget {
        return Err(Error::ResourceLimit(format!(
            "cover has {} vectors, above the budget of {}",
            cover.len(),
            opts.vector_budget
        )));
    }
    Ok(cover)
}

/// Optimisation mode of the min-max sparse mean estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RsmMode {
    /// Per-support nested golden-section search.
    ExactSmall,
    /// Per-support subgradient descent with `ceil(1/v^2)` steps.
    Subgradient,
}

/// Minimiser and objective value of one RSM solve.
#[derive(Clone, Debug, PartialEq)]
pub struct RsmSolution {
    pub mu: Vec<f64>,
    pub objective: f64,
    pub support: Vec<usize>,
}

/// `g(mu) = max_u |u'mu - b_u|` for a fixed cover and sample.
#[derive(Clone, Debug)]
pub struct RsmProblem {
    pub cover: SparseCover,
    /// Robust projections `b_u`, aligned with the cover enumeration.
    pub b: Vec<f64>,
    pub s: usize,
    pub t: usize,
    pub eta: f64,
    samples: Vec<Vec<f64>>,
}

/// Reduced objective on one `s`-support: rows `(a_u, b_u)` with `a_u != 0`
/// plus the constant contributed by cover vectors orthogonal to the support.
struct Restricted {
    rows: Vec<(Vec<f64>, f64)>,
    floor: f64,
}

impl Restricted {
    fn value(&self, mu: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|(a, b)| (a.iter().zip(mu).map(|(x, y)| x * y).sum::<f64>() - b).abs())
            .fold(self.floor, f64::max)
    }

    fn subgradient(&self, mu: &[f64]) -> Option<Vec<f64>> {
        let mut best = self.floor;
        let mut arg = None;
        for (i, (a, b)) in self.rows.iter().enumerate() {
            let v = (a.iter().zip(mu).map(|(x, y)| x * y).sum::<f64>() - b).abs();
            if v > best {
                best = v;
                arg = Some(i);
            }
        }
        let (a, b) = &self.rows[arg?];
        let sign = if a.iter().zip(mu).map(|(x, y)| x * y).sum::<f64>() - b >= 0.0 {
            1.0
        } else {
            -1.0
        };
        Some(a.iter().map(|x| sign * x).collect())
    }
}

fn golden(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("three candidates")
}

/// Minimises a convex function over `[-bound, bound]^dim` one coordinate at a time.
fn nested_min(f: &dyn Fn(&[f64]) -> f64, prefix: &mut Vec<f64>, dim: usize, bound: f64, tol: f64) -> (Vec<f64>, f64) {
    if prefix.len() + 1 == dim {
        let (x, v) = golden(
            |x| {
                prefix.push(x);
                let v = f(prefix);
                prefix.pop();
                v
            },
            -bound,
            bound,
            tol,
        );
        let mut out = prefix.clone();
        out.push(x);
        return (out, v);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let (x, _) = golden(
        |x| {
            prefix.push(x);
            let (arg, v) = nested_min(f, prefix, dim, bound, tol);
            prefix.pop();
            if best.as_ref().is_none_or(|b| v < b.1) {
                best = Some((arg, v));
            }
            v
        },
        -bound,
        bound,
        tol,
    );
    prefix.push(x);
    let (arg, v) = nested_min(f, prefix, dim, bound, tol);
    prefix.pop();
    match best {
        Some(b) if b.1 < v => b,
        _ => (arg, v),
    }
}

/// `v = sqrt(s log(ep/s) / t)`, the accuracy target of the subgradient mode.
pub fn rsm_upsilon(p: usize, s: usize, t: usize) -> f64 {
    (s as f64 * (std::f64::consts::E * p as f64 / s as f64).ln() / t as f64).sqrt()
}

/// Confidence handed to each univariate estimate: `eta / (6ep/s)^s`.
pub fn rsm_confidence(p: usize, s: usize, eta: f64) -> f64 {
    eta / (6.0 * std::f64::consts::E * p as f64 / s as f64).powi(s as i32)
}

impl RsmProblem {
    /// Precomputes `b_u = robust_1d({u'Z_i}, eta / (6ep/s)^s)` for every cover vector.
    pub fn new(z: &[Vec<f64>], s: usize, eta: f64, opts: &CoverOptions) -> Result<Self> {
        let t = z.len();
        if t == 0 {
            return Err(Error::invalid("RSM estimate requires at least one sample"));
        }
        let p = z[0].len();
        if z.iter().any(|v| v.len() != p) {
            return Err(Error::invalid("RSM samples must share one dimension"));
        }
        check_prob(eta, "eta")?;
        let cover = sparse_cover_with(p, s, opts)?;
        let delta = rsm_confidence(p, s, eta).max(f64::MIN_POSITIVE);
        let b = (0..cover.len())
            .into_par_iter()
            .map(|i| {
                let u = cover.vector(i);
                let proj: Vec<f64> = z.iter().map(|zi| u.dot(zi)).collect();
                robust_1d(&proj, delta)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cover,
            b,
            s,
            t,
            eta,
            samples: z.to_vec(),
        })
    }

    pub fn p(&self) -> usize {
        self.cover.p
    }

    /// `g(mu) = max_u |u'mu - b_u|`.
    pub fn objective(&self, mu: &[f64]) -> f64 {
        self.cover
            .vectors()
            .zip(&self.b)
            .map(|(u, b)| (u.dot(mu) - b).abs())
            .fold(0.0, f64::max)
    }

    fn restrict(&self, support: &[usize]) -> Restricted {
        let mut rows = Vec::new();
        let mut floor = 0.0f64;
        for (u, &b) in self.cover.vectors().zip(&self.b) {
            let a: Vec<f64> = support
                .iter()
                .map(|j| u.support.iter().position(|k| k == j).map_or(0.0, |pos| u.values[pos]))
                .collect();
            if a.iter().all(|&x| x == 0.0) {
                floor = floor.max(b.abs());
            } else {
                rows.push((a, b));
            }
        }
        Restricted { rows, floor }
    }

    fn embed(&self, support: &[usize], vals: &[f64]) -> Vec<f64> {
        let mut mu = vec![0.0; self.p()];
        for (&j, &v) in support.iter().zip(vals) {
            mu[j] = v;
        }
        mu
    }

    fn supports(&self) -> Vec<Vec<usize>> {
        combinations(self.p(), self.s)
    }

    /// Global minimiser over `s`-sparse vectors by nested golden-section search.
    pub fn solve_exact(&self, budget: usize) -> Result<RsmSolution> {
        let work = binomial(self.p(), self.s) * self.cover.len() as f64;
        if work > budget as f64 {
            return Err(Error::ResourceLimit(format!(
                "exact RSM needs {work:.3e} support-vector pairs, above the budget of {budget}"
            )));
        }
        let bound = 4.0 * self.b.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        if bound == 0.0 {
            return Ok(RsmSolution {
                mu: vec![0.0; self.p()],
                objective: 0.0,
                support: (0..self.s).collect(),
            });
        }
        let tol = 1e-7 * bound.max(1.0);
        let best = self
            .supports()
            .into_par_iter()
            .map(|support| {
                let r = self.restrict(&support);
                let (arg, _) = nested_min(&|mu| r.value(mu), &mut Vec::new(), support.len(), bound, tol);
                let mu = self.embed(&support, &arg);
                RsmSolution {
                    objective: self.objective(&mu),
                    mu,
                    support,
                }
            })
            .reduce_with(|a, b| if b.objective < a.objective { b } else { a })
            .expect("at least one support");
        Ok(best)
    }

    /// Best iterate of per-support subgradient descent started at coordinatewise robust means.
    pub fn solve_subgradient(&self) -> Result<RsmSolution> {
        let ups = rsm_upsilon(self.p(), self.s, self.t);
        let steps = (1.0 / (ups * ups)).ceil() as usize;
        let sols = self
            .supports()
            .into_par_iter()
            .map(|support| {
                let r = self.restrict(&support);
                let mut mu = support
                    .iter()
                    .map(|&j| robust_1d(&self.samples.iter().map(|z| z[j]).collect::<Vec<_>>(), self.eta))
                    .collect::<Result<Vec<_>>>()?;
                let mut best = (mu.clone(), r.value(&mu));
                for k in 1..=steps {
                    let Some(g) = r.subgradient(&mu) else { break };
                    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        break;
                    }
                    let h = ups / (k as f64).sqrt();
                    for (m, gi) in mu.iter_mut().zip(&g) {
                        *m -= h * gi / norm;
                    }
                    let v = r.value(&mu);
                    if v < best.1 {
                        best = (mu.clone(), v);
                    }
                }
                let full = self.embed(&support, &best.0);
                Ok(RsmSolution {
                    objective: self.objective(&full),
                    mu: full,
                    support,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(sols
            .into_iter()
            .reduce(|a, b| if b.objective < a.objective { b } else { a })
            .expect("at least one support"))
    }
}

/// Default work budget of the exact RSM mode.
pub const EXACT_BUDGET: usize = 5_000_000;

/// Min-max sparse mean estimate of `z` (a list of p-vectors).
pub fn rsm_estimate(z: &[Vec<f64>], s: usize, eta: f64, mode: RsmMode) -> Result<Vec<f64>> {
    let problem = RsmProblem::new(z, s, eta, &CoverOptions::default())?;
    Ok(match mode {
        RsmMode::ExactSmall => problem.solve_exact(EXACT_BUDGET)?,
        RsmMode::Subgradient => problem.solve_subgradient()?,
    }
    .mu)
}

/// Contract of a multivariate robust mean estimator used by the weak-moment test.
pub trait RobustMeanEstimator: Sync {
    /// Identifier recorded in test decisions.
    fn id(&self) -> &str;
    /// Minimum sample size for failure probability `eta`.
    fn min_samples(&self, eta: f64) -> usize;
    fn estimate(&self, z: &[Vec<f64>], eta: f64) -> Result<Vec<f64>>;
}

/// Geometric median of `ceil(8 log(1/eta))` contiguous group means.
#[derive(Clone, Copy, Debug, Default)]
pub struct GeoMom;

impl RobustMeanEstimator for GeoMom {
    fn id(&self) -> &str {
        "geo-mom"
    }

    fn min_samples(&self, eta: f64) -> usize {
        mom_group_count(eta)
    }

    fn estimate(&self, z: &[Vec<f64>], eta: f64) -> Result<Vec<f64>> {
        geo_mom_mean(z, eta)
    }
}

/// Geometric median by Weiszfeld iteration with the Vardi-Zhang step at data points.
pub fn geometric_median(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-9;
    const MAX_ITER: usize = 10_000;
    const COINCIDE: f64 = 1e-12;
    if points.is_empty() {
        return Err(Error::invalid("geometric median of an empty set"));
    }
    let p = points[0].len();
    // A data point is the median iff the pull of the others does not exceed its multiplicity.
    let pull = |y: &[f64]| -> (Vec<f64>, f64, usize) {
        let mut r = vec![0.0; p];
        let mut wsum = 0.0;
        let mut tilde = vec![0.0; p];
        let mut mult = 0;
        for x in points {
            let d = dist(x, y);
            if d < COINCIDE {
                mult += 1;
                continue;
            }
            for j in 0..p {
                r[j] += (x[j] - y[j]) / d;
                tilde[j] += x[j] / d;
            }
            wsum += 1.0 / d;
        }
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if wsum > 0.0 {
            tilde.iter_mut().for_each(|v| *v /= wsum);
        }
        (tilde, rn, mult)
    };
    for x in points {
        let (_, rn, mult) = pull(x);
        if rn <= mult as f64 {
            return Ok(x.clone());
        }
    }
    let mut y: Vec<f64> = (0..p)
        .map(|j| points.iter().map(|x| x[j]).sum::<f64>() / points.len() as f64)
        .collect();
    for _ in 0..MAX_ITER {
        let (tilde, rn, mult) = pull(&y);
        let next: Vec<f64> = if mult == 0 {
            tilde
        } else {
            if rn <= mult as f64 {
                return Ok(y);
            }
            let w = mult as f64 / rn;
            tilde.iter().zip(&y).map(|(t, yy)| (1.0 - w) * t + w * yy).collect()
        };
        let step = dist(&next, &y);
        y = next;
        if step <= TOL {
            break;
        }
    }
    Ok(y)
}

/// Geometric median-of-means with `ceil(8 log(1/eta))` contiguous groups.
pub fn geo_mom_mean(z: &[Vec<f64>], eta: f64) -> Result<Vec<f64>> {
    check_prob(eta, "eta")?;
    let k = mom_group_count(eta);
    if z.len() < k {
        return Err(Error::invalid(format!(
            "geo_mom_mean needs at least {k} samples for eta={eta}; got {}",
            z.len()
        )));
    }
    let p = z[0].len();
    let sizes = group_sizes(z.len(), k);
    let mut means = vec![vec![0.0; p]; k];
    contiguous_group_means(
        z.len(),
        k,
        |i| i,
        |g, i| {
            for (m, v) in means[g].iter_mut().zip(&z[i]) {
                *m += v;
            }
        },
    );
    for (m, &c) in means.iter_mut().zip(&sizes) {
        m.iter_mut().for_each(|v| *v /= c as f64);
    }
    geometric_median(&means)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn robust_1d_examples() {
        for strat in [
            Robust1dStrategy::default(),
            Robust1dStrategy::MedianOfMeans,
            Robust1dStrategy::TrimmedMean { c: 1.0 },
        ] {
            assert_eq!(robust_1d_with(&[2.5; 7], 0.1, strat).unwrap(), 2.5);
        }
        assert_eq!(robust_1d(&[0.0, 0.0, 0.0, 0.0, 100.0], 0.1).unwrap(), 0.0);
        let x: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(mom_group_count(0.7), 3);
        assert_eq!(robust_1d_with(&x, 0.7, Robust1dStrategy::MedianOfMeans).unwrap(), 5.0);
        assert!(robust_1d(&[], 0.1).is_err());
        assert!(robust_1d(&[1.0], 1.0).is_err());
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(5, 2)[4], vec![1, 2]);
        assert_eq!(binomial(6, 3), 20.0);
    }

    #[test]
    fn circle_cover_sweep() {
        let c = sparse_cover(2, 1).unwrap();
        assert!(c.net.len() >= 7);
        let worst = (0..10_000)
            .map(|i| {
                let th = i as f64 * std::f64::consts::TAU / 10_000.0;
                c.distance(&[th.cos(), th.sin()])
            })
            .fold(0.0, f64::max);
        assert!(worst <= 0.5, "gap {worst}");
    }

    #[test]
    fn cover_invariants() {
        let c = sparse_cover(4, 1).unwrap();
        assert_eq!(c.supports.len(), 6);
        for u in c.vectors() {
            let norm = u.values.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
            assert!(u.values.iter().filter(|v| **v != 0.0).count() <= 2);
        }
        let c = sparse_cover(5, 2).unwrap();
        let mut rng = stream(9, 0, Purpose::Auxiliary);
        for _ in 0..300 {
            let idx = rand::seq::index::sample(&mut rng, 5, 4).into_vec();
            let mut x = vec![0.0; 5];
            let v = unit_normal(4, &mut rng);
            for (j, vv) in idx.iter().zip(v) {
                x[*j] = vv;
            }
            assert!(c.distance(&x) <= 0.5);
        }
    }

    #[test]
    fn cover_budget() {
        let opts = CoverOptions {
            support_budget: 10,
            ..CoverOptions::default()
        };
        assert!(matches!(sparse_cover_with(12, 1, &opts), Err(Error::ResourceLimit(_))));
        let opts = CoverOptions {
            random_support_fallback: true,
            ..opts
        };
        let c = sparse_cover_with(12, 1, &opts).unwrap();
        assert!(!c.complete);
        assert_eq!(c.supports.len(), 10);
    }

    #[test]
    fn rsm_fixed_points() {
        let mu = vec![0.0, 1.5, 0.0, 0.0];
        let z = vec![mu.clone(); 20];
        for mode in [RsmMode::ExactSmall, RsmMode::Subgradient] {
            let est = rsm_estimate(&z, 1, 0.1, mode).unwrap();
            assert!(dist(&est, &mu) < 1e-5, "{mode:?}: {est:?}");
            assert!(est.iter().filter(|v| **v != 0.0).count() <= 1);
        }
        let z = vec![vec![0.0; 4]; 20];
        assert_eq!(rsm_estimate(&z, 1, 0.1, RsmMode::ExactSmall).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn rsm_modes_agree() {
        let mut rng = stream(11, 0, Purpose::Auxiliary);
        let z: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let mut v: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
                v[0] += 3.0;
                v
            })
            .collect();
        let prob = RsmProblem::new(&z, 1, 0.1, &CoverOptions::default()).unwrap();
        let exact = prob.solve_exact(EXACT_BUDGET).unwrap();
        let sub = prob.solve_subgradient().unwrap();
        assert!(sub.objective - exact.objective <= rsm_upsilon(4, 1, 50));
        assert!((exact.mu[0] - 3.0).abs() < 1.0);
    }

    #[test]
    fn objective_is_lipschitz() {
        let mut rng = stream(12, 0, Purpose::Auxiliary);
        let z: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..5).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let prob = RsmProblem::new(&z, 2, 0.2, &CoverOptions::default()).unwrap();
        for _ in 0..200 {
            let a: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            assert!((prob.objective(&a) - prob.objective(&b)).abs() <= dist(&a, &b) + 1e-10);
        }
    }

    #[test]
    fn geo_mom_examples() {
        let v = vec![vec![1.0, -2.0, 3.0]; 40];
        assert_eq!(geo_mom_mean(&v, 0.1).unwrap(), vec![1.0, -2.0, 3.0]);
        let pts = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(geometric_median(&pts).unwrap(), vec![0.0, 0.0]);
        assert!(geo_mom_mean(&v[..3], 0.01).is_err());
        let sq = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0]];
        let m = geometric_median(&sq).unwrap();
        assert!(dist(&m, &[1.0, 1.0]) < 1e-8);
    }

    #[test]
    fn geo_mom_resists_a_corrupted_group() {
        // Nine groups of 20 Gaussian vectors, one group shifted by 1000.
        let eta = (-9.0f64 / 8.0).exp();
        assert_eq!(mom_group_count(eta), 9);
        let mut rng = stream(13, 0, Purpose::Auxiliary);
        let mut z: Vec<Vec<f64>> = (0..180)
            .map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        for v in &mut z[40..60] {
            v.iter_mut().for_each(|x| *x += 1000.0);
        }
        let clean: Vec<f64> = (0..3)
            .map(|j| {
                z.iter()
                    .enumerate()
                    .filter(|(i, _)| !(40..60).contains(i))
                    .map(|(_, v)| v[j])
                    .sum::<f64>()
                    / 160.0
            })
            .collect();
        let est = geo_mom_mean(&z, eta).unwrap();
        assert!(dist(&est, &clean) <= 3.0 / 20f64.sqrt());
    }
}
