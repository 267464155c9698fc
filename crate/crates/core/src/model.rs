// SPDX-License-Identifier: MIT OR Apache-2.0

//! Shared numeric substrate: observation matrices, dyadic scale grids,
//! time-reflected pair differences, the upper median and sparsity grids.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A `p x n` real matrix whose column `t` is the observation at time `t`.
///
/// Storage is column-major so that each observation is a contiguous slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    p: usize,
    n: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from column-major values (`values[t * p + j]`).
    pub fn from_columns(p: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if p < 1 {
            return Err(Error::invalid("DataMatrix requires p >= 1"));
        }
        if n < 2 {
            return Err(Error::invalid(format!("DataMatrix requires n >= 2; got {n}")));
        }
        if values.len() != p * n {
            return Err(Error::invalid(format!(
                "DataMatrix expects {} values for p={p}, n={n}; got {}",
                p * n,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "DataMatrix entry (row {}, column {}) is not finite",
                k % p + 1,
                k / p + 1
            )));
        }
        Ok(Self { p, n, values })
    }

    /// Builds a matrix from rows (one row per coordinate, one entry per time).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::invalid("DataMatrix requires p >= 1"));
        }
        let n = rows[0].len();
        if let Some(j) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::invalid(format!(
                "row {} has length {} but row 1 has length {n}",
                j + 1,
                rows[j].len()
            )));
        }
        let mut values = vec![0.0; p * n];
        for (j, row) in rows.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                values[t * p + j] = v;
            }
        }
        Self::from_columns(p, n, values)
    }

    /// The all-zero matrix.
    pub fn zeros(p: usize, n: usize) -> Result<Self> {
        Self::from_columns(p, n, vec![0.0; p * n])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at coordinate `j` and time `t` (both 0-based).
    pub fn get(&self, j: usize, t: usize) -> f64 {
        self.values[t * self.p + j]
    }

    /// Observation at time `t` (0-based).
    pub fn column(&self, t: usize) -> &[f64] {
        &self.values[t * self.p..(t + 1) * self.p]
    }

    /// Column-major backing storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coordinate `j` as a time series.
    pub fn row(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|t| self.get(j, t)).collect()
    }

    /// Entrywise sum with a matrix of identical shape.
    pub fn add(&self, other: &DataMatrix) -> Result<DataMatrix> {
        if self.p != other.p || self.n != other.n {
            return Err(Error::invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.p, self.n, other.p, other.n
            )));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(DataMatrix {
            p: self.p,
            n: self.n,
            values,
        })
    }
}

/// The dyadic scale grid `{1, 2, 4, ..., 2^floor(log2(n/2))}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub scales: Vec<usize>,
}

impl DyadicGrid {
    pub fn contains(&self, t: usize) -> bool {
        self.scales.contains(&t)
    }
}

/// Dyadic scales `2^k` with `2^k <= n/2`.
pub fn dyadic_grid(n: usize) -> Result<DyadicGrid> {
    if n < 2 {
        return Err(Error::invalid(format!("dyadic_grid requires n >= 2; got {n}")));
    }
    let half = n / 2;
    let mut scales = Vec::new();
    let mut t = 1usize;
    while t <= half {
        scales.push(t);
        t *= 2;
    }
    Ok(DyadicGrid { scales })
}

/// Time-reflected pair differences `Z_i = (X_i - X_{n+1-i}) / sqrt(2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedMatrix {
    p: usize,
    m: usize,
    values: Vec<f64>,
}

impl PairedMatrix {
    /// Builds directly from column-major pair values.
    pub fn from_columns(p: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if p < 1 || m < 1 || values.len() != p * m {
            return Err(Error::invalid(format!(
                "PairedMatrix expects p >= 1, m >= 1 and p*m values; got p={p}, m={m}, len={}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("PairedMatrix entries must be finite"));
        }
        Ok(Self { p, m, values })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `Z_{i+1}` as a p-vector (0-based index `i`).
    pub fn column(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[i * self.p + j]
    }

    /// The first `t` pairs as owned p-vectors.
    pub fn prefix_vectors(&self, t: usize) -> Vec<Vec<f64>> {
        (0..t.min(self.m)).map(|i| self.column(i).to_vec()).collect()
    }
}

/// Pairs the first and last observations; for odd `n` the middle column is unused.
pub fn pair_differences(x: &DataMatrix) -> PairedMatrix {
    let (p, n) = (x.p(), x.n());
    let m = n / 2;
    let mut values = Vec::with_capacity(p * m);
    for i in 0..m {
        let head = x.column(i);
        let tail = x.column(n - 1 - i);
        values.extend(head.iter().zip(tail).map(|(a, b)| (a - b) / std::f64::consts::SQRT_2));
    }
    PairedMatrix { p, m, values }
}

/// The `(floor(G/2) + 1)`-th smallest element of `v`.
pub fn upper_median(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::invalid("upper_median of an empty list"));
    }
    let mut buf = v.to_vec();
    let k = buf.len() / 2;
    let (_, kth, _) = buf.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    Ok(*kth)
}

/// The sparsity grid `{1, 2, ..., 2^(ceil(log2 p) - 1)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityGrid {
    pub levels: Vec<usize>,
}

pub fn sparsity_grid(p: usize) -> SparsityGrid {
    if p <= 1 {
        return SparsityGrid { levels: vec![1] };
    }
    let mut levels = Vec::new();
    let mut s = 1usize;
    while s < p {
        levels.push(s);
        s *= 2;
    }
    SparsityGrid { levels }
}

/// `log log(8n)`, the iterated-log factor shared by all thresholds and rates.
pub fn lllog(n: usize) -> f64 {
    (8.0 * n as f64).ln().ln()
}

/// Smallest power of two that is `>= x` (and at least 1).
pub fn pow2_ceil(x: f64) -> usize {
    if !(x > 1.0) {
        return 1;
    }
    let k = x.log2().ceil() as u32;
    let mut v = 1usize << k;
    // Guard against log2 rounding just above an exact power of two.
    if v / 2 >= 1 && (v / 2) as f64 >= x {
        v /= 2;
    }
    v
}

/// `2^(c + ceil(log2 x))` for the MoM grouping caps, with `ceil(log2 x)` floored at 0.
pub fn mom_delta(offset: u32, x: f64) -> usize {
    pow2_ceil(x) << offset
}
