// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form minimax rate expressions, sparsity boundaries and phase curves.

use crate::error::{Error, Result};
use crate::model::lllog;
use serde::{Deserialize, Serialize};
use std::f64::consts::E;

/// Noise class a rate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateFamily {
    Subweibull,
    Polytail,
    Gaussian,
}

/// Which rate expression to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRegime {
    /// Upper bound of the dense test.
    DenseU,
    /// Upper bound of the sparse test (the RSM test for polynomial tails).
    SparseU,
    /// Upper bound of the sparse MoM test.
    SparseMomU,
    /// Upper bound of the boundary-restricted test.
    RestrictedU,
    /// Upper bound of the multi-change test.
    MultiU,
    /// Upper bound of the temporal test.
    TemporalU,
    /// Single-change lower bound.
    Lower,
    /// Multi-change lower bound.
    MultiLower,
    /// Gaussian minimax rate.
    GaussianStar,
}

/// Inputs of a rate evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateQuery {
    pub family: RateFamily,
    pub regime: RateRegime,
    pub p: usize,
    pub n: usize,
    pub s: usize,
    pub alpha: f64,
}

impl RateQuery {
    pub fn new(family: RateFamily, regime: RateRegime, p: usize, n: usize, s: usize, alpha: f64) -> Self {
        Self {
            family,
            regime,
            p,
            n,
            s,
            alpha,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 || self.s == 0 || self.s > self.p {
            return Err(Error::invalid(format!(
                "rate query requires p, n >= 1 and 1 <= s <= p; got p={}, n={}, s={}",
                self.p, self.n, self.s
            )));
        }
        match self.family {
            RateFamily::Subweibull if !(self.alpha > 0.0 && self.alpha <= 2.0) => Err(Error::invalid(format!(
                "sub-Weibull order must lie in (0, 2]; got {}",
                self.alpha
            ))),
            RateFamily::Polytail if !(self.alpha >= 2.0 && self.alpha.is_finite()) => Err(Error::invalid(format!(
                "polynomial-tail order must be >= 2; got {}",
                self.alpha
            ))),
            _ => Ok(()),
        }
    }

    fn parts(&self) -> (f64, f64, f64, f64, f64) {
        (self.p as f64, self.n as f64, self.s as f64, self.alpha, lllog(self.n))
    }
}

fn unsupported(q: &RateQuery) -> Error {
    Error::invalid(format!("no rate expression for {:?} under {:?}", q.regime, q.family))
}

/// `p^{(2/alpha) v (1/2)}`.
pub fn poly_power(p: f64, alpha: f64) -> f64 {
    p.powf((2.0 / alpha).max(0.5))
}

fn gaussian_star(p: f64, s: f64, l: f64) -> f64 {
    let sparse = s * (E * p / (s * s) * l).ln();
    (p * l).sqrt().min(sparse).max(l)
}

/// Upper-bound rate expression, without constants.
pub fn rate_upper(q: &RateQuery) -> Result<f64> {
    q.validate()?;
    let (p, n, s, a, l) = q.parts();
    use RateFamily::*;
    use RateRegime::*;
    Ok(match (q.family, q.regime) {
        (Subweibull, DenseU) => (p * l).sqrt() + l,
        (Subweibull, SparseU) => s * (E * p / s).ln().powf(2.0 / a) + l,
        (Subweibull, RestrictedU) => s * (E * p / s).ln() + l,
        (Polytail, DenseU) => poly_power(p, a) * l,
        (Polytail, SparseU) => s * (p / s).powf(2.0 / a) + l,
        (Polytail, SparseMomU) => s * ((p / s).powf(2.0 / a) + l),
        (Polytail, RestrictedU) => s * ((E * p / s).ln() + l),
        (Polytail, MultiU) => p.sqrt() * n.ln(),
        (Polytail, TemporalU) => {
            let lll = (64.0 * n).ln().ln().ln();
            p.sqrt() * l * lll * lll
        }
        (Gaussian, GaussianStar | DenseU | SparseU) => gaussian_star(p, s, l),
        _ => return Err(unsupported(q)),
    })
}

/// Lower-bound rate expression, including the indicator exponents.
pub fn rate_lower(q: &RateQuery) -> Result<f64> {
    q.validate()?;
    let (p, n, s, a, l) = q.parts();
    let big_s = s > (p * l).sqrt();
    use RateFamily::*;
    use RateRegime::*;
    Ok(match (q.family, q.regime) {
        (Subweibull, Lower) => {
            let omega1 = if big_s { 1.0 } else { 0.0 };
            (s * (E * p / s).ln().powf(2.0 / a)).min((p * l.powf(omega1)).sqrt()) + l
        }
        (Polytail, Lower) => {
            let omega2 = if big_s && a >= 4.0 { 0.5 } else { 0.0 };
            (s * (p / s).powf(2.0 / a)).min(poly_power(p, a) * l.powf(omega2)) + l
        }
        (_, MultiLower) => (p * n.ln()).sqrt() + n.ln(),
        (Gaussian, Lower | GaussianStar) => gaussian_star(p, s, l),
        _ => return Err(unsupported(q)),
    })
}

/// Best single-change upper bound: the smaller of the dense and sparse rates.
pub fn rate_upper_minimax(family: RateFamily, p: usize, n: usize, s: usize, alpha: f64) -> Result<f64> {
    let dense = rate_upper(&RateQuery::new(family, RateRegime::DenseU, p, n, s, alpha))?;
    let sparse = rate_upper(&RateQuery::new(family, RateRegime::SparseU, p, n, s, alpha))?;
    Ok(dense.min(sparse))
}

/// Endpoints of the minimax rate over the indeterminate factor `L`.
///
/// The rate is `L m + log log(8n)` with `m` the dense/sparse minimum and
/// `L` in `[1, sqrt(log log 8n)]` (sub-Weibull) or `[1, log log 8n]` (polynomial tails).
pub fn rate_bracket(family: RateFamily, p: usize, n: usize, s: usize, alpha: f64) -> Result<(f64, f64)> {
    let q = RateQuery::new(family, RateRegime::Lower, p, n, s, alpha);
    q.validate()?;
    let (p, _, s, a, l) = q.parts();
    let (m, top) = match family {
        RateFamily::Subweibull => (p.sqrt().min(s * (E * p / s).ln().powf(2.0 / a)), l.sqrt()),
        RateFamily::Polytail => (poly_power(p, a).min(s * (p / s).powf(2.0 / a)), l),
        RateFamily::Gaussian => return Err(unsupported(&q)),
    };
    Ok((m + l, top.max(1.0) * m + l))
}

/// Sparsity level separating the sparse and dense regimes.
pub fn sparsity_boundary(family: RateFamily, p: f64, alpha: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("dimension must be >= 1; got {p}")));
    }
    match family {
        RateFamily::Subweibull if alpha > 0.0 && alpha <= 2.0 => Ok(p.sqrt() / (E * p).ln().powf(2.0 / alpha)),
        RateFamily::Polytail if alpha >= 2.0 && alpha.is_finite() => Ok(p.powf(0.5 - gamma_curve(alpha))),
        _ => Err(Error::invalid(format!(
            "no sparsity boundary for {family:?} with alpha={alpha}"
        ))),
    }
}

/// `gamma(alpha) = (alpha - 2)^{-1} ^ 1/2`.
pub fn gamma_curve(alpha: f64) -> f64 {
    (1.0 / (alpha - 2.0)).min(0.5)
}

/// `beta(alpha) = 2 / alpha`.
pub fn beta_curve(alpha: f64) -> f64 {
    2.0 / alpha
}

/// One row of the phase-diagram table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub alpha: f64,
    pub curve_id: String,
    pub value: f64,
}

/// `gamma` rows for `alpha >= 2` and `beta` rows for `0 < alpha <= 2`.
pub fn phase_curves(alpha_grid: &[f64]) -> Vec<CurveRow> {
    let mut rows: Vec<CurveRow> = alpha_grid
        .iter()
        .filter(|&&a| a >= 2.0)
        .map(|&a| CurveRow {
            alpha: a,
            curve_id: "gamma".into(),
            value: gamma_curve(a),
        })
        .collect();
    rows.extend(alpha_grid.iter().filter(|&&a| a > 0.0 && a <= 2.0).map(|&a| CurveRow {
        alpha: a,
        curve_id: "beta".into(),
        value: beta_curve(a),
    }));
    rows
}

/// `start, start + step, ...` up to `end` inclusive, with rounding slack at the end.
pub fn alpha_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
        return Err(Error::invalid(format!(
            "invalid alpha range [{start}, {end}] with step {step}"
        )));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use RateFamily::*;
    use RateRegime::*;

    fn q(f: RateFamily, r: RateRegime, p: usize, n: usize, s: usize, a: f64) -> RateQuery {
        RateQuery::new(f, r, p, n, s, a)
    }

    #[test]
    fn upper_examples() {
        let v = rate_upper(&q(Polytail, DenseU, 16, 8, 1, 4.0)).unwrap();
        assert!((v - 4.0 * 64f64.ln().ln()).abs() < 1e-12);
        assert!((v - 5.700).abs() < 1e-3);
        let l = lllog(50);
        assert!((rate_upper(&q(Subweibull, SparseU, 7, 50, 7, 2.0)).unwrap() - (7.0 + l)).abs() < 1e-12);
        let n = 10f64.exp().round() as usize;
        let v = rate_upper(&q(Polytail, MultiU, 4, n, 1, 4.0)).unwrap();
        assert!((v - 2.0 * (n as f64).ln()).abs() < 1e-12);
        assert!((2.0 * 10.0 - v).abs() < 1e-3);
        assert!(rate_upper(&q(Subweibull, DenseU, 4, 8, 1, 2.5)).is_err());
        assert!(rate_upper(&q(Polytail, DenseU, 4, 8, 1, 1.5)).is_err());
        assert!(rate_upper(&q(Subweibull, MultiU, 4, 8, 1, 1.0)).is_err());
    }

    #[test]
    fn lower_examples() {
        let (p, n) = (100, 1000);
        let l = lllog(n);
        let v = rate_lower(&q(Subweibull, Lower, p, n, 2, 1.0)).unwrap();
        let expect = (2.0 * (E * 50.0).ln().powi(2)).min(10.0) + l;
        assert!((v - expect).abs() < 1e-12);
        let v = rate_lower(&q(Polytail, Lower, p, n, 5, 3.0)).unwrap();
        assert!((v - ((p as f64).powf(2.0 / 3.0) + l)).abs() < 1e-9);
        for f in [Subweibull, Polytail] {
            let a = if f == Subweibull { 2.0 } else { 4.0 };
            for n in [2, 100, 100_000] {
                let v = rate_lower(&q(f, Lower, 1, n, 1, a)).unwrap();
                assert!(v >= lllog(n) && v <= 2.0 * lllog(n));
            }
        }
        let v = rate_lower(&q(Polytail, MultiLower, 9, 1000, 1, 4.0)).unwrap();
        assert!((v - ((9.0 * 1000f64.ln()).sqrt() + 1000f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn boundary_examples() {
        assert!((sparsity_boundary(Polytail, 4096.0, 6.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((sparsity_boundary(Polytail, 777.0, 4.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((sparsity_boundary(Subweibull, E, 2.0).unwrap() - E.sqrt() / 2.0).abs() < 1e-15);
        assert!(sparsity_boundary(Subweibull, 10.0, 3.0).is_err());
        assert!(sparsity_boundary(Gaussian, 10.0, 2.0).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(gamma_curve(4.0), 0.5);
        assert_eq!(gamma_curve(6.0), 0.25);
        assert_eq!(beta_curve(1.0), 2.0);
        let grid = alpha_range(2.0, 10.0, 0.5).unwrap();
        let rows = phase_curves(&grid);
        assert_eq!(rows.iter().filter(|r| r.curve_id == "gamma").count(), 17);
        assert!(rows
            .iter()
            .any(|r| r.curve_id == "beta" && r.alpha == 2.0 && r.value == 1.0));
    }

    #[test]
    fn bracket_orders() {
        let (lo, hi) = rate_bracket(Polytail, 64, 128, 2, 6.0).unwrap();
        assert!(lo <= hi);
        let (lo, hi) = rate_bracket(Subweibull, 64, 128, 64, 1.0).unwrap();
        assert!(lo <= hi);
    }
}
