// SPDX-License-Identifier: MIT OR Apache-2.0

//! Noise, signal and dataset generators.
//!
//! Every scalar noise law is centred and, except the weak-moment family,
//! standardized to unit variance. All randomness flows through
//! [`crate::rng::stream`], so a spec plus a seed fully determines its output.

use crate::error::{Error, Result};
use crate::model::DataMatrix;
use crate::rng::{stream, Purpose, StreamRng};
use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal, StudentT, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

/// Noise family selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    /// Symmetric Weibull magnitude, order `0 < alpha <= 2`.
    Subweibull,
    /// Standardized Student-t with `nu > alpha` degrees of freedom.
    PolytailStudent,
    /// Standardized symmetric Pareto with tail index above `alpha`.
    PolytailPareto,
    /// Spherical `R * U` vectors satisfying the weak-moment projection bound.
    WeakMomentSpherical,
    /// Null-side law of one of the lower-bound constructions.
    AdversarialD,
    Gaussian,
    /// Identically zero noise (deterministic stub).
    Zero,
}

/// Which lower-bound construction an adversarial law comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdversarialClaim {
    #[serde(rename = "iii")]
    Iii,
    #[serde(rename = "iv")]
    Iv,
    #[serde(rename = "v")]
    V,
    #[serde(rename = "G2-two-point")]
    G2TwoPoint,
}

/// Parameters of an adversarial construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarialParams {
    pub claim: AdversarialClaim,
    /// Perturbation size; must satisfy `gamma <= sqrt(p/s)` for claims iii, iv, v.
    #[serde(default)]
    pub gamma: f64,
    /// Sparsity of the construction.
    #[serde(default = "default_adv_s")]
    pub s: usize,
    /// Outer atom of claim iii; defaults to `max(32 gamma, sqrt 2)`.
    #[serde(default)]
    pub t0: Option<f64>,
    /// Mass at `c` for the two-point law.
    #[serde(default)]
    pub u: Option<f64>,
    /// Location of the non-zero atom for the two-point law.
    #[serde(default)]
    pub c: Option<f64>,
}

fn default_adv_s() -> usize {
    1
}

impl AdversarialParams {
    pub fn new(claim: AdversarialClaim, gamma: f64, s: usize) -> Self {
        Self {
            claim,
            gamma,
            s,
            t0: None,
            u: None,
            c: None,
        }
    }
}

/// Full description of a noise distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Tail or moment order.
    pub alpha: f64,
    /// Student-t degrees of freedom.
    #[serde(default)]
    pub nu: Option<f64>,
    /// Pareto tail index, or the radial index of the spherical family.
    #[serde(default)]
    pub tail_index: Option<f64>,
    #[serde(default)]
    pub adversarial: Option<AdversarialParams>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, alpha: f64) -> Self {
        Self {
            family,
            alpha,
            nu: None,
            tail_index: None,
            adversarial: None,
            seed: 0,
        }
    }

    pub fn gaussian() -> Self {
        Self::new(NoiseFamily::Gaussian, 2.0)
    }

    pub fn zero() -> Self {
        Self::new(NoiseFamily::Zero, 2.0)
    }

    pub fn subweibull(alpha: f64) -> Self {
        Self::new(NoiseFamily::Subweibull, alpha)
    }

    pub fn student(alpha: f64, nu: f64) -> Self {
        Self {
            nu: Some(nu),
            ..Self::new(NoiseFamily::PolytailStudent, alpha)
        }
    }

    pub fn pareto(alpha: f64, tail_index: f64) -> Self {
        Self {
            tail_index: Some(tail_index),
            ..Self::new(NoiseFamily::PolytailPareto, alpha)
        }
    }

    pub fn weak_moment(alpha: f64) -> Self {
        Self::new(NoiseFamily::WeakMomentSpherical, alpha)
    }

    pub fn adversarial(alpha: f64, params: AdversarialParams) -> Self {
        Self {
            adversarial: Some(params),
            ..Self::new(NoiseFamily::AdversarialD, alpha)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks the family/order compatibility and resolves a sampler for dimension `p`.
    pub fn sampler(&self, p: usize) -> Result<NoiseSampler> {
        let a = self.alpha;
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("noise alpha must be positive; got {a}")));
        }
        let law = match self.family {
            NoiseFamily::Gaussian => ScalarLaw::Gaussian,
            NoiseFamily::Zero => ScalarLaw::Zero,
            NoiseFamily::Subweibull => {
                if a > 2.0 {
                    return Err(Error::invalid(format!("subweibull requires 0 < alpha <= 2; got {a}")));
                }
                let weibull = Weibull::new(1.0, a).map_err(|e| Error::invalid(e.to_string()))?;
                ScalarLaw::Subweibull {
                    weibull,
                    scale: gamma(1.0 + 2.0 / a).sqrt().recip(),
                }
            }
            NoiseFamily::PolytailStudent => {
                if a < 2.0 {
                    return Err(Error::invalid(format!("polytail requires alpha >= 2; got {a}")));
                }
                let nu = self.nu.unwrap_or(a + 0.5);
                if !(nu > a) {
                    return Err(Error::invalid(format!(
                        "polytail-student requires nu > alpha for a finite alpha-th moment; got nu={nu}, alpha={a}"
                    )));
                }
                let t = StudentT::new(nu).map_err(|e| Error::invalid(e.to_string()))?;
                ScalarLaw::Student {
                    t,
                    scale: ((nu - 2.0) / nu).sqrt(),
                }
            }
            NoiseFamily::PolytailPareto => {
                if a < 2.0 {
                    return Err(Error::invalid(format!("polytail requires alpha >= 2; got {a}")));
                }
                let k = self.tail_index.unwrap_or(a + 0.5);
                if !(k > a) {
                    return Err(Error::invalid(format!(
                        "polytail-pareto requires tail index > alpha; got index={k}, alpha={a}"
                    )));
                }
                let pareto = Pareto::new(1.0, k).map_err(|e| Error::invalid(e.to_string()))?;
                ScalarLaw::Pareto {
                    pareto,
                    scale: ((k - 2.0) / k).sqrt(),
                }
            }
            NoiseFamily::WeakMomentSpherical => {
                if !(a > 1.0 && a <= 2.0) {
                    return Err(Error::invalid(format!("weak-moment requires 1 < alpha <= 2; got {a}")));
                }
                let k = self.tail_index.unwrap_or(a + 0.5);
                if !(k > a) {
                    return Err(Error::invalid(format!(
                        "weak-moment radial index must exceed alpha; got index={k}, alpha={a}"
                    )));
                }
                let pareto = Pareto::new(1.0, k).map_err(|e| Error::invalid(e.to_string()))?;
                return Ok(NoiseSampler::Spherical {
                    pareto,
                    radial_scale: spherical_radial_scale(p, a, k),
                });
            }
            NoiseFamily::AdversarialD => {
                let params = self
                    .adversarial
                    .as_ref()
                    .ok_or_else(|| Error::invalid("adversarial-D noise requires adversarial parameters"))?;
                adversarial_law(params, p, a)?
            }
        };
        Ok(NoiseSampler::Scalar(law))
    }

    /// Draws a `p x n` noise matrix from `rng`.
    pub fn sample_matrix(&self, p: usize, n: usize, rng: &mut StreamRng) -> Result<DataMatrix> {
        let sampler = self.sampler(p)?;
        DataMatrix::from_columns(p, n, sampler.sample_values(p, n, rng))
    }

    /// Constant `K` with `E|W/K|^alpha = 1` (tail constant for subweibull), when available.
    pub fn achieved_constant(&self, p: usize) -> Result<Option<f64>> {
        let a = self.alpha;
        let sampler = self.sampler(p)?;
        Ok(match sampler {
            NoiseSampler::Spherical { .. } => Some(SPHERICAL_TARGET.powf(1.0 / a)),
            NoiseSampler::Scalar(law) => match law {
                ScalarLaw::Zero => None,
                ScalarLaw::Gaussian => Some(abs_normal_moment(a).powf(1.0 / a)),
                ScalarLaw::Subweibull { scale, .. } => Some(scale),
                ScalarLaw::Student { scale, .. } => {
                    let nu = self.nu.unwrap_or(a + 0.5);
                    let m = (0.5 * a * nu.ln() + ln_gamma((a + 1.0) / 2.0) + ln_gamma((nu - a) / 2.0)
                        - 0.5 * PI.ln()
                        - ln_gamma(nu / 2.0))
                    .exp();
                    Some((m * scale.powf(a)).powf(1.0 / a))
                }
                ScalarLaw::Pareto { scale, .. } => {
                    let k = self.tail_index.unwrap_or(a + 0.5);
                    Some((k / (k - a) * scale.powf(a)).powf(1.0 / a))
                }
                ScalarLaw::ThreePoint { inner, outer, p_outer } => {
                    let m = (1.0 - 2.0 * p_outer) * inner.powf(a) + 2.0 * p_outer * outer.powf(a);
                    Some(m.powf(1.0 / a))
                }
                ScalarLaw::BumpDensity { sigma } => Some((bump_abs_moment(a) / sigma.powf(a)).powf(1.0 / a)),
                ScalarLaw::TwoPoint { u, c } => Some((u * c.abs().powf(a)).powf(1.0 / a)),
            },
        })
    }
}

/// `E|N(0,1)|^a`.
fn abs_normal_moment(a: f64) -> f64 {
    (0.5 * a * 2f64.ln() + ln_gamma((a + 1.0) / 2.0) - 0.5 * PI.ln()).exp()
}

/// Projection moment bound targeted by the spherical family (1% slack below 1).
pub const SPHERICAL_TARGET: f64 = 0.99;

/// Scale of the Pareto radius such that `E|<W, v>|^alpha = SPHERICAL_TARGET` for unit `v`.
///
/// With `W = c R sqrt(p) U`, `R ~ Pareto(1, k)` and `U` uniform on the sphere,
/// `E|<W,v>|^a = c^a * k/(k-a) * p^(a/2) * E|U_1|^a`.
fn spherical_radial_scale(p: usize, a: f64, k: f64) -> f64 {
    let pf = p as f64;
    let ln_u1 = ln_gamma(pf / 2.0) + ln_gamma((a + 1.0) / 2.0) - 0.5 * PI.ln() - ln_gamma((pf + a) / 2.0);
    let ln_moment = (k / (k - a)).ln() + 0.5 * a * pf.ln() + ln_u1;
    ((SPHERICAL_TARGET.ln() - ln_moment) / a).exp()
}

/// Resolved sampler.
#[derive(Clone, Debug)]
pub enum NoiseSampler {
    /// i.i.d. entries.
    Scalar(ScalarLaw),
    /// Independent spherical columns.
    Spherical { pareto: Pareto<f64>, radial_scale: f64 },
}

impl NoiseSampler {
    /// Column-major `p x n` draws.
    pub fn sample_values(&self, p: usize, n: usize, rng: &mut StreamRng) -> Vec<f64> {
        match self {
            NoiseSampler::Scalar(law) => (0..p * n).map(|_| law.sample(rng)).collect(),
            NoiseSampler::Spherical { pareto, radial_scale } => {
                let mut out = Vec::with_capacity(p * n);
                let sqrt_p = (p as f64).sqrt();
                let mut dir = vec![0.0; p];
                for _ in 0..n {
                    let norm = loop {
                        for d in dir.iter_mut() {
                            *d = rng.sample(StandardNormal);
                        }
                        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm > 0.0 {
                            break norm;
                        }
                    };
                    let r = radial_scale * pareto.sample(rng) * sqrt_p / norm;
                    out.extend(dir.iter().map(|d| d * r));
                }
                out
            }
        }
    }
}

/// Scalar noise laws.
#[derive(Clone, Debug)]
pub enum ScalarLaw {
    Zero,
    Gaussian,
    Subweibull {
        weibull: Weibull<f64>,
        scale: f64,
    },
    Student {
        t: StudentT<f64>,
        scale: f64,
    },
    Pareto {
        pareto: Pareto<f64>,
        scale: f64,
    },
    /// `+-inner` w.p. `1/2 - p_outer` each and `+-outer` w.p. `p_outer` each.
    ThreePoint {
        inner: f64,
        outer: f64,
        p_outer: f64,
    },
    /// Symmetric piecewise-quadratic density on `0.9 <= |x| <= 1.1`, divided by `sigma`.
    BumpDensity {
        sigma: f64,
    },
    /// `0` w.p. `1 - u`, `c` w.p. `u`.
    TwoPoint {
        u: f64,
        c: f64,
    },
}

impl ScalarLaw {
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            ScalarLaw::Zero => 0.0,
            ScalarLaw::Gaussian => rng.sample(StandardNormal),
            ScalarLaw::Subweibull { weibull, scale } => random_sign(rng) * weibull.sample(rng) * scale,
            ScalarLaw::Student { t, scale } => t.sample(rng) * scale,
            ScalarLaw::Pareto { pareto, scale } => random_sign(rng) * pareto.sample(rng) * scale,
            ScalarLaw::ThreePoint { inner, outer, p_outer } => {
                let u: f64 = rng.random();
                let mag = if u < 2.0 * p_outer { *outer } else { *inner };
                random_sign(rng) * mag
            }
            ScalarLaw::BumpDensity { sigma } => random_sign(rng) * sample_bump(rng) / sigma,
            ScalarLaw::TwoPoint { u, c } => {
                if rng.random::<f64>() < *u {
                    *c
                } else {
                    0.0
                }
            }
        }
    }
}

fn random_sign(rng: &mut StreamRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// One-sided density of the auxiliary bump law on `[0.9, 1.1]` (total mass 1/2).
pub fn bump_density(x: f64) -> f64 {
    let a = x.abs();
    if (0.9..0.95).contains(&a) {
        1000.0 * (a - 0.9).powi(2)
    } else if (0.95..=1.05).contains(&a) {
        5.0 - 1000.0 * (a - 1.0).powi(2)
    } else if a > 1.05 && a <= 1.1 {
        1000.0 * (a - 1.1).powi(2)
    } else {
        0.0
    }
}

fn sample_bump(rng: &mut StreamRng) -> f64 {
    loop {
        let x = 0.9 + 0.2 * rng.random::<f64>();
        if 5.0 * rng.random::<f64>() <= bump_density(x) {
            return x;
        }
    }
}

/// `E|xi_aux|^a` by composite Simpson integration over each polynomial piece.
fn bump_abs_moment(a: f64) -> f64 {
    let pieces = [(0.9, 0.95), (0.95, 1.05), (1.05, 1.1)];
    2.0 * pieces
        .iter()
        .map(|&(lo, hi)| simpson(|x| x.powf(a) * bump_density(x), lo, hi, 2000))
        .sum::<f64>()
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (hi - lo) / m as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// Standard deviation of the auxiliary bump law.
pub fn bump_sigma() -> f64 {
    bump_abs_moment(2.0).sqrt()
}

/// Probabilities of the claim-iii law: `(p_inner_each, p_outer_each, inner, outer)`.
pub fn claim_iii_law(gamma_: f64, s: usize, p: usize, t0: f64) -> (f64, f64, f64, f64) {
    let c = 1.0 / (1.0 + gamma_ * gamma_ * s as f64 / (2.0 * p as f64));
    let denom = 2.0 * (t0 * t0 - c);
    ((t0 * t0 - 1.0) / denom, (1.0 - c) / denom, c.sqrt(), t0)
}

fn adversarial_law(params: &AdversarialParams, p: usize, _alpha: f64) -> Result<ScalarLaw> {
    match params.claim {
        AdversarialClaim::Iii | AdversarialClaim::Iv | AdversarialClaim::V => {
            let s = params.s;
            if s < 1 || s > p {
                return Err(Error::invalid(format!(
                    "adversarial construction requires 1 <= s <= p; got s={s}, p={p}"
                )));
            }
            let g = params.gamma;
            let g_max = (p as f64 / s as f64).sqrt();
            if !(g >= 0.0) || g > g_max * (1.0 + 1e-12) {
                return Err(Error::invalid(format!(
                    "gamma={g} violates the construction constraint gamma <= sqrt(p/s) = {g_max}"
                )));
            }
            if params.claim == AdversarialClaim::Iii {
                let t0 = params.t0.unwrap_or_else(|| (32.0 * g).max(std::f64::consts::SQRT_2));
                if !(t0 > 1.0) {
                    return Err(Error::invalid(format!("claim iii requires t0 > 1; got {t0}")));
                }
                let (_, p_outer, inner, outer) = claim_iii_law(g, s, p, t0);
                Ok(ScalarLaw::ThreePoint { inner, outer, p_outer })
            } else {
                Ok(ScalarLaw::BumpDensity { sigma: bump_sigma() })
            }
        }
        AdversarialClaim::G2TwoPoint => {
            let t0 = params.t0.unwrap_or(1.0);
            let u = params.u.unwrap_or(1.0 / (2.0 * t0));
            let c = params.c.unwrap_or_else(|| (2.0 * u).powf(-1.0 / _alpha));
            if !(u > 0.0 && u <= 1.0) || !c.is_finite() {
                return Err(Error::invalid(format!(
                    "two-point law requires 0 < u <= 1 and finite c; got u={u}, c={c}"
                )));
            }
            Ok(ScalarLaw::TwoPoint { u, c })
        }
    }
}

/// Draws from one adversarial construction's null-side law.
pub fn gen_adversarial(params: &AdversarialParams, alpha: f64, p: usize, n: usize, seed: u64) -> Result<DataMatrix> {
    let spec = NoiseSpec::adversarial(alpha, params.clone()).with_seed(seed);
    gen_noise(&spec, p, n)
}

/// Draws a noise matrix using the spec's own seed.
pub fn gen_noise(spec: &NoiseSpec, p: usize, n: usize) -> Result<DataMatrix> {
    let mut rng = stream(spec.seed, 0, Purpose::Noise);
    spec.sample_matrix(p, n, &mut rng)
}

/// MA(1) noise: `E_i = w_i + pi * w_{i-1}`, marginal variance 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ma1Spec {
    pub pi_ma: f64,
    /// Unit-variance innovation law (rescaled by `(1 + pi^2)^(-1/2)`).
    pub innovation: NoiseSpec,
    pub seed: u64,
}

impl Ma1Spec {
    /// Lag-1 autocorrelation `pi / (1 + pi^2)`.
    pub fn r1(&self) -> f64 {
        self.pi_ma / (1.0 + self.pi_ma * self.pi_ma)
    }

    pub fn sample_matrix(&self, p: usize, n: usize, rng: &mut StreamRng) -> Result<DataMatrix> {
        if !self.pi_ma.is_finite() {
            return Err(Error::invalid("pi_ma must be finite"));
        }
        let sampler = match self.innovation.sampler(p)? {
            NoiseSampler::Scalar(law) => law,
            NoiseSampler::Spherical { .. } => {
                return Err(Error::invalid("MA(1) innovations must be a unit-variance scalar law"))
            }
        };
        let w_scale = (1.0 + self.pi_ma * self.pi_ma).sqrt().recip();
        let mut values = vec![0.0; p * n];
        for j in 0..p {
            let mut prev = sampler.sample(rng) * w_scale;
            for t in 0..n {
                let cur = sampler.sample(rng) * w_scale;
                values[t * p + j] = cur + self.pi_ma * prev;
                prev = cur;
            }
        }
        DataMatrix::from_columns(p, n, values)
    }
}

pub fn gen_ma1(spec: &Ma1Spec, p: usize, n: usize) -> Result<DataMatrix> {
    let mut rng = stream(spec.seed, 0, Purpose::Noise);
    spec.sample_matrix(p, n, &mut rng)
}

/// Mean structure of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignalSpec {
    Null {
        p: usize,
        n: usize,
        #[serde(default)]
        base: Option<Vec<f64>>,
    },
    SingleChange {
        p: usize,
        n: usize,
        /// Last time index (1-based) of the pre-change segment.
        t0: usize,
        /// `mu_1 - mu_2`.
        delta: Vec<f64>,
        /// `mu_2`; zero when absent.
        #[serde(default)]
        base: Option<Vec<f64>>,
        /// Declared sparsity bound.
        s: usize,
    },
    MultiChange {
        p: usize,
        n: usize,
        /// Strictly increasing change times in `[1, n-1]`.
        times: Vec<usize>,
        /// `times.len() + 1` segment means.
        means: Vec<Vec<f64>>,
    },
}

impl SignalSpec {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            SignalSpec::Null { p, n, .. }
            | SignalSpec::SingleChange { p, n, .. }
            | SignalSpec::MultiChange { p, n, .. } => (*p, *n),
        }
    }

    /// `rho^2 = t0 (n - t0) / n * ||delta||^2` for a single change, 0 otherwise.
    pub fn rho2(&self) -> f64 {
        match self {
            SignalSpec::SingleChange { n, t0, delta, .. } => {
                let (n, t0) = (*n as f64, *t0 as f64);
                t0 * (n - t0) / n * delta.iter().map(|d| d * d).sum::<f64>()
            }
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let (p, n) = self.dims();
        if p < 1 || n < 2 {
            return Err(Error::invalid(format!(
                "signal requires p >= 1 and n >= 2; got p={p}, n={n}"
            )));
        }
        let check_len = |name: &str, v: &[f64]| {
            if v.len() != p {
                Err(Error::invalid(format!("{name} has length {} but p = {p}", v.len())))
            } else {
                Ok(())
            }
        };
        match self {
            SignalSpec::Null { base, .. } => {
                if let Some(b) = base {
                    check_len("base", b)?;
                }
            }
            SignalSpec::SingleChange { t0, delta, base, s, .. } => {
                if *t0 < 1 || *t0 > n - 1 {
                    return Err(Error::invalid(format!("t0 must lie in [1, n-1]; got {t0}")));
                }
                check_len("delta", delta)?;
                if let Some(b) = base {
                    check_len("base", b)?;
                }
                let nnz = delta.iter().filter(|d| **d != 0.0).count();
                if nnz > *s {
                    return Err(Error::invalid(format!("delta has {nnz} non-zeros, exceeding s = {s}")));
                }
            }
            SignalSpec::MultiChange { times, means, .. } => {
                if means.len() != times.len() + 1 {
                    return Err(Error::invalid(format!(
                        "{} change times need {} segment means; got {}",
                        times.len(),
                        times.len() + 1,
                        means.len()
                    )));
                }
                if times.iter().any(|&t| t < 1 || t > n - 1) || times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid(
                        "change times must be strictly increasing within [1, n-1]",
                    ));
                }
                for m in means {
                    check_len("segment mean", m)?;
                }
            }
        }
        Ok(())
    }
}

/// The mean matrix `theta`.
pub fn gen_theta(spec: &SignalSpec) -> Result<DataMatrix> {
    spec.validate()?;
    let (p, n) = spec.dims();
    let mut values = vec![0.0; p * n];
    match spec {
        SignalSpec::Null { base, .. } => {
            if let Some(b) = base {
                for t in 0..n {
                    values[t * p..(t + 1) * p].copy_from_slice(b);
                }
            }
        }
        SignalSpec::SingleChange { t0, delta, base, .. } => {
            for t in 0..n {
                for j in 0..p {
                    let b = base.as_ref().map_or(0.0, |b| b[j]);
                    values[t * p + j] = if t < *t0 { b + delta[j] } else { b };
                }
            }
        }
        SignalSpec::MultiChange { times, means, .. } => {
            let mut seg = 0;
            for t in 0..n {
                while seg < times.len() && t >= times[seg] {
                    seg += 1;
                }
                values[t * p..(t + 1) * p].copy_from_slice(&means[seg]);
            }
        }
    }
    DataMatrix::from_columns(p, n, values)
}

/// `X = theta + E` with noise drawn from `rng`.
pub fn gen_dataset_with(signal: &SignalSpec, noise: &NoiseSpec, rng: &mut StreamRng) -> Result<DataMatrix> {
    let theta = gen_theta(signal)?;
    let (p, n) = signal.dims();
    let e = noise.sample_matrix(p, n, rng)?;
    theta.add(&e)
}

/// `X = theta + E` with noise drawn from the noise spec's seed.
pub fn gen_dataset(signal: &SignalSpec, noise: &NoiseSpec) -> Result<DataMatrix> {
    let mut rng = stream(noise.seed, 0, Purpose::Noise);
    gen_dataset_with(signal, noise, &mut rng)
}
