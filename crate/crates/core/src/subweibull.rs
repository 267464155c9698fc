// SPDX-License-Identifier: MIT OR Apache-2.0

//! CUSUM-based dense and sparse tests for noise with exponentially decaying tails.

use crate::decision::{Decision, GridKind, ScaleDiagnostic};
use crate::error::{Error, Result};
use crate::model::{dyadic_grid, lllog, DataMatrix};
use serde::{Deserialize, Serialize};

/// Where a threshold set came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    TheoryWithConstants,
    Calibrated,
}

/// The CUSUM vector `Y_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct CusumVector {
    pub t: usize,
    pub values: Vec<f64>,
}

/// The split CUSUM vectors `Y_{t,1}` (odd times) and `Y_{t,2}` (even times).
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCusumPair {
    pub t: usize,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

/// Thresholds of the dense and sparse CUSUM tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubweibullThresholds {
    /// Threshold for the maximum over scales (over `t >= 2` for the sparse test).
    pub r: f64,
    /// Threshold for the sparse statistic at `t = 1`.
    pub r1: f64,
    /// Selection threshold.
    pub a: f64,
    pub provenance: Provenance,
}

impl SubweibullThresholds {
    /// `r = C1 (sqrt(p llog) + llog)`.
    pub fn dense_theory(p: usize, n: usize, c1: f64) -> Self {
        let l = lllog(n);
        let r = c1 * ((p as f64 * l).sqrt() + l);
        Self {
            r,
            r1: r,
            a: 0.0,
            provenance: Provenance::TheoryWithConstants,
        }
    }

    /// `a = C1 (log^(1/alpha)(ep/s) + s^(-1/2) llog^(1/2))`,
    /// `r = C2 (sqrt(s llog) + llog)`, `r1 = C3 s log^(2/alpha)(ep/s)`.
    pub fn sparse_theory(p: usize, n: usize, s: usize, alpha: f64, c: [f64; 3]) -> Result<Self> {
        check_sparsity(p, s)?;
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid(format!(
                "sub-Weibull order must lie in (0, 2]; got {alpha}"
            )));
        }
        let (l, sf) = (lllog(n), s as f64);
        let lg = (std::f64::consts::E * p as f64 / sf).ln();
        Ok(Self {
            a: c[0] * (lg.powf(1.0 / alpha) + (l / sf).sqrt()),
            r: c[1] * ((sf * l).sqrt() + l),
            r1: c[2] * sf * lg.powf(2.0 / alpha),
            provenance: Provenance::TheoryWithConstants,
        })
    }

    /// Copy with `r` and `r1` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            r: self.r * factor,
            r1: self.r1 * factor,
            a: self.a,
            provenance: Provenance::Calibrated,
        }
    }
}

pub(crate) fn check_sparsity(p: usize, s: usize) -> Result<()> {
    if s < 1 || s > p {
        return Err(Error::invalid(format!(
            "sparsity must satisfy 1 <= s <= p; got s={s}, p={p}"
        )));
    }
    Ok(())
}

fn check_scale(x: &DataMatrix, t: usize) -> Result<()> {
    if !dyadic_grid(x.n())?.contains(t) {
        return Err(Error::invalid(format!(
            "scale t={t} is not in the dyadic grid for n={}",
            x.n()
        )));
    }
    Ok(())
}

/// Sum over `i` in `idx` of `X_i - X_{n+1-i}` (1-based times).
fn reflected_sum(x: &DataMatrix, idx: impl Iterator<Item = usize>) -> Vec<f64> {
    let (p, n) = (x.p(), x.n());
    let mut acc = vec![0.0; p];
    for i in idx {
        let (head, tail) = (x.column(i - 1), x.column(n - i));
        for ((a, h), tl) in acc.iter_mut().zip(head).zip(tail) {
            *a += h - tl;
        }
    }
    acc
}

/// `Y_t = (sum_{i<=t} X_i - sum_{i<=t} X_{n+1-i}) / sqrt(2t)`.
pub fn cusum_stat(x: &DataMatrix, t: usize) -> Result<CusumVector> {
    check_scale(x, t)?;
    let norm = (2.0 * t as f64).sqrt();
    let values = reflected_sum(x, 1..=t).into_iter().map(|v| v / norm).collect();
    Ok(CusumVector { t, values })
}

/// `A_t = sum_j (Y_t(j)^2 - 1)` for every scale of the dyadic grid.
pub fn stat_dense_g(x: &DataMatrix) -> Result<Vec<(usize, f64)>> {
    dyadic_grid(x.n())?
        .scales
        .into_iter()
        .map(|t| {
            let y = cusum_stat(x, t)?;
            Ok((t, y.values.iter().map(|v| v * v - 1.0).sum()))
        })
        .collect()
}

/// Rejects iff `max_t A_t > r`.
pub fn test_dense_g(x: &DataMatrix, thr: &SubweibullThresholds) -> Result<Decision> {
    let entries = stat_dense_g(x)?
        .into_iter()
        .map(|(t, a)| ScaleDiagnostic::new(t, "dense", a, thr.r))
        .collect();
    Ok(Decision::from_entries("dense-G", GridKind::Single, entries))
}

/// `Y_{t,1}` from odd times and `Y_{t,2}` from even times.
pub fn split_cusum(x: &DataMatrix, t: usize) -> Result<SplitCusumPair> {
    if t < 2 {
        return Err(Error::invalid(
            "split_cusum requires t >= 2; the t = 1 case has no split",
        ));
    }
    check_scale(x, t)?;
    let norm = (t as f64).sqrt();
    let y1 = reflected_sum(x, (1..=t).step_by(2))
        .into_iter()
        .map(|v| v / norm)
        .collect();
    let y2 = reflected_sum(x, (2..=t).step_by(2))
        .into_iter()
        .map(|v| v / norm)
        .collect();
    Ok(SplitCusumPair { t, y1, y2 })
}

/// Hard-thresholded statistic at one scale with its selected-coordinate count.
pub fn sparse_g_at(x: &DataMatrix, t: usize, a: f64) -> Result<(f64, usize)> {
    let (agg, sel) = if t == 1 {
        let y = cusum_stat(x, 1)?.values;
        (y.clone(), y)
    } else {
        let pair = split_cusum(x, t)?;
        (pair.y1, pair.y2)
    };
    let mut stat = 0.0;
    let mut count = 0;
    for (y1, y2) in agg.iter().zip(&sel) {
        if y2.abs() >= a {
            stat += y1 * y1 - 1.0;
            count += 1;
        }
    }
    Ok((stat, count))
}

/// `A_{t,a}` for every scale; `t = 1` uses `Y_1` for selection and aggregation.
pub fn stat_sparse_g(x: &DataMatrix, a: f64) -> Result<Vec<(usize, f64, usize)>> {
    if !(a >= 0.0) {
        return Err(Error::invalid(format!("selection threshold must be >= 0; got {a}")));
    }
    dyadic_grid(x.n())?
        .scales
        .into_iter()
        .map(|t| sparse_g_at(x, t, a).map(|(v, c)| (t, v, c)))
        .collect()
}

/// Rejects iff `max_{t>=2} A_{t,a} > r` or `A_{1,a} > r1`.
pub fn test_sparse_g(x: &DataMatrix, s: usize, thr: &SubweibullThresholds) -> Result<Decision> {
    check_sparsity(x.p(), s)?;
    let entries = stat_sparse_g(x, thr.a)?
        .into_iter()
        .map(|(t, v, c)| {
            let r = if t == 1 { thr.r1 } else { thr.r };
            ScaleDiagnostic::new(t, "sparse", v, r).with_selected(c).with_s(s)
        })
        .collect();
    Ok(Decision::from_entries("sparse-G", GridKind::Single, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_dataset, gen_theta, NoiseSpec, SignalSpec};

    fn change(p: usize, n: usize, t0: usize, delta: Vec<f64>) -> DataMatrix {
        gen_theta(&SignalSpec::SingleChange {
            p,
            n,
            t0,
            delta,
            base: None,
            s: p,
        })
        .unwrap()
    }

    #[test]
    fn cusum_examples() {
        let x = DataMatrix::from_rows(&[vec![2.0; 8], vec![-3.0; 8]]).unwrap();
        for t in [1, 2, 4] {
            assert!(cusum_stat(&x, t).unwrap().values.iter().all(|&v| v == 0.0));
        }
        let x = DataMatrix::from_rows(&[vec![1.0, 5.0, 2.0, 7.0]]).unwrap();
        assert!((cusum_stat(&x, 1).unwrap().values[0] - (1.0 - 7.0) / 2f64.sqrt()).abs() < 1e-15);
        assert!(cusum_stat(&x, 3).is_err());

        let x = change(2, 16, 8, vec![2.0, -1.0]);
        for t in [1, 2, 4, 8] {
            let y = cusum_stat(&x, t).unwrap().values;
            let k = (t as f64 / 2.0).sqrt();
            assert!((y[0] - 2.0 * k).abs() < 1e-12 && (y[1] + k).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_zero_noise() {
        let x = DataMatrix::zeros(5, 32).unwrap();
        assert!(stat_dense_g(&x).unwrap().iter().all(|&(_, a)| a == -5.0));
        let thr = SubweibullThresholds {
            r: -4.9,
            r1: 0.0,
            a: 0.0,
            provenance: Provenance::Calibrated,
        };
        assert!(!test_dense_g(&x, &thr).unwrap().reject);

        let x = change(3, 32, 16, vec![1.0, 2.0, 0.0]);
        for (t, a) in stat_dense_g(&x).unwrap() {
            assert!((a - (t as f64 / 2.0) * 5.0 + 3.0).abs() < 1e-9);
        }
        let thr = SubweibullThresholds::dense_theory(3, 32, 1.0);
        assert!(test_dense_g(&x, &thr).unwrap().reject);

        // Y_1 = (sqrt 2 + sqrt 2) / sqrt 2 = 2, so A_1 = 3.
        let x = DataMatrix::from_rows(&[vec![2f64.sqrt(), 0.0, 0.0, -(2f64.sqrt())]]).unwrap();
        assert!((stat_dense_g(&x).unwrap()[0].1 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn split_examples() {
        let (a, b, c, d) = (1.0, 4.0, -2.0, 0.5);
        let x = DataMatrix::from_rows(&[vec![a, b, c, d]]).unwrap();
        let s = split_cusum(&x, 2).unwrap();
        assert!((s.y1[0] - (a - d) / 2f64.sqrt()).abs() < 1e-15);
        assert!((s.y2[0] - (b - c) / 2f64.sqrt()).abs() < 1e-15);
        assert!(split_cusum(&x, 1).is_err());

        let x = change(2, 32, 16, vec![3.0, 0.5]);
        for t in [2, 4, 8, 16] {
            let s = split_cusum(&x, t).unwrap();
            let k = (t as f64).sqrt() / 2.0;
            for (j, d) in [3.0, 0.5].iter().enumerate() {
                assert!((s.y1[j] - k * d).abs() < 1e-12 && (s.y2[j] - k * d).abs() < 1e-12);
            }
        }
        let x = DataMatrix::from_rows(&[vec![7.0; 16]]).unwrap();
        let s = split_cusum(&x, 8).unwrap();
        assert!(s.y1[0] == 0.0 && s.y2[0] == 0.0);
    }

    #[test]
    fn sparse_examples() {
        let noise = NoiseSpec::gaussian().with_seed(3);
        let x = gen_dataset(
            &SignalSpec::Null {
                p: 6,
                n: 32,
                base: None,
            },
            &noise,
        )
        .unwrap();
        for (t, v, c) in stat_sparse_g(&x, 0.0).unwrap() {
            assert_eq!(c, 6);
            if t >= 2 {
                let y1 = split_cusum(&x, t).unwrap().y1;
                assert_eq!(v, y1.iter().map(|y| y * y - 1.0).sum::<f64>());
            }
        }
        let z = DataMatrix::zeros(6, 32).unwrap();
        assert!(stat_sparse_g(&z, 0.1)
            .unwrap()
            .iter()
            .all(|&(_, v, c)| v == 0.0 && c == 0));

        let x = change(2, 64, 32, vec![4.0, 0.1]);
        let a = 1.0;
        for (t, v, c) in stat_sparse_g(&x, a).unwrap() {
            let mut expect = 0.0;
            let mut cnt = 0;
            for d in [4.0f64, 0.1] {
                let y = if t == 1 {
                    d / 2f64.sqrt()
                } else {
                    (t as f64).sqrt() * d / 2.0
                };
                if y.abs() >= a {
                    expect += y * y - 1.0;
                    cnt += 1;
                }
            }
            assert!((v - expect).abs() < 1e-9, "t={t}");
            assert_eq!(c, cnt);
        }
    }

    #[test]
    fn sparse_test_decisions() {
        let z = DataMatrix::zeros(8, 64).unwrap();
        let thr = SubweibullThresholds::sparse_theory(8, 64, 2, 2.0, [1.0; 3]).unwrap();
        assert!(!test_sparse_g(&z, 2, &thr).unwrap().reject);
        let mut delta = vec![0.0; 8];
        delta[3] = 50.0;
        let x = change(8, 64, 32, delta);
        let thr1 = SubweibullThresholds::sparse_theory(8, 64, 1, 2.0, [1.0; 3]).unwrap();
        assert!(test_sparse_g(&x, 1, &thr1).unwrap().reject);
        assert!(test_sparse_g(&x, 9, &thr1).is_err());
    }
}
