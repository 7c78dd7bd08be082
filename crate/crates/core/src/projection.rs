//! Sparse Clarkson–Woodruff projections `Φ = BD` and a dense Gaussian baseline.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SparError};

/// Attempts at plain rejection sampling before switching to the exact
/// sequential sampler for covering assignments.
const REJECTION_ATTEMPTS: usize = 64;

/// An m×q projection with exactly one nonzero per column: column `j` carries
/// `diag[j]` in row `row_of[j]`. Every row is hit by at least one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwProjection {
    m: usize,
    q: usize,
    row_of: Vec<usize>,
    diag: Vec<f64>,
}

impl CwProjection {
    /// Draws `h_j` iid uniform on `0..m`, conditional on covering every row.
    pub fn sample<R: Rng + ?Sized>(m: usize, diag: Vec<f64>, rng: &mut R) -> Result<Self> {
        let q = diag.len();
        if m == 0 || m > q {
            return Err(SparError::param(format!("target dimension {m} must lie in [1, {q}]")));
        }
        if let Some(j) = diag.iter().position(|d| *d == 0.0 || !d.is_finite()) {
            return Err(SparError::param(format!("diagonal entry {j} is zero or non-finite")));
        }
        let row_of = sample_covering(m, q, rng);
        Ok(CwProjection { m, q, row_of, diag })
    }

    /// CW projection with independent equiprobable ±1 diagonal.
    pub fn sample_random_sign<R: Rng + ?Sized>(m: usize, q: usize, rng: &mut R) -> Result<Self> {
        if m == 0 || m > q {
            return Err(SparError::param(format!("target dimension {m} must lie in [1, {q}]")));
        }
        let row_of = sample_covering(m, q, rng);
        let diag = (0..q).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Ok(CwProjection { m, q, row_of, diag })
    }

    /// Rebuilds a projection from stored parts, checking every invariant.
    pub fn from_parts(m: usize, row_of: Vec<usize>, diag: Vec<f64>) -> Result<Self> {
        let q = row_of.len();
        if diag.len() != q {
            return Err(SparError::dim(format!("row map has {q} entries, diagonal has {}", diag.len())));
        }
        if m == 0 || m > q {
            return Err(SparError::param(format!("target dimension {m} must lie in [1, {q}]")));
        }
        let mut hit = vec![false; m];
        for &r in &row_of {
            if r >= m {
                return Err(SparError::param(format!("row index {r} out of range for m = {m}")));
            }
            hit[r] = true;
        }
        if hit.iter().any(|h| !h) {
            return Err(SparError::param("projection leaves a row uncovered"));
        }
        if diag.iter().any(|d| *d == 0.0 || !d.is_finite()) {
            return Err(SparError::param("diagonal contains a zero or non-finite entry"));
        }
        Ok(CwProjection { m, q, row_of, diag })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn row_of(&self) -> &[usize] {
        &self.row_of
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `Z = X_sub·Φ'` in one pass over the columns of `x_sub`.
    pub fn apply(&self, x_sub: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x_sub.ncols() != self.q {
            return Err(SparError::dim(format!("projection expects {} columns, got {}", self.q, x_sub.ncols())));
        }
        let cols: Vec<usize> = (0..self.q).collect();
        Ok(self.apply_columns(x_sub, &cols))
    }

    /// `X[:, cols]·Φ'` without copying the selected columns.
    pub fn apply_columns(&self, x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
        assert_eq!(cols.len(), self.q, "column list must match the projection's source dimension");
        let mut z = DMatrix::zeros(x.nrows(), self.m);
        for (j, &c) in cols.iter().enumerate() {
            z.column_mut(self.row_of[j]).axpy(self.diag[j], &x.column(c), 1.0);
        }
        z
    }

    /// `Φ'γ`, mapping reduced coefficients back to the q source columns.
    pub fn back_project(&self, gamma: &[f64]) -> Vec<f64> {
        self.row_of.iter().zip(&self.diag).map(|(&r, &d)| d * gamma[r]).collect()
    }

    /// `Φ'·1_m`, which equals the diagonal.
    pub fn span_witness(&self) -> Vec<f64> {
        self.back_project(&vec![1.0; self.m])
    }
}

/// Dense m×q matrix of iid standard normals.
pub fn sample_gaussian_rp<R: Rng + ?Sized>(m: usize, q: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if m == 0 || m > q {
        return Err(SparError::param(format!("target dimension {m} must lie in [1, {q}]")));
    }
    let vals: Vec<f64> = (0..m * q).map(|_| rng.sample(StandardNormal)).collect();
    Ok(DMatrix::from_vec(m, q, vals))
}

fn sample_covering<R: Rng + ?Sized>(m: usize, q: usize, rng: &mut R) -> Vec<usize> {
    let mut hit = vec![false; m];
    for _ in 0..REJECTION_ATTEMPTS {
        let h: Vec<usize> = (0..q).map(|_| rng.random_range(0..m)).collect();
        hit.iter_mut().for_each(|v| *v = false);
        h.iter().for_each(|&r| hit[r] = true);
        if hit.iter().all(|&v| v) {
            return h;
        }
    }
    sample_surjection(m, q, rng)
}

/// Exact draw from the uniform law on maps [q] → [m] that hit every row,
/// which is the law of iid uniform draws conditioned on coverage.
///
/// `log_r[r][e]` is the log-count of length-`r` sequences covering a fixed set
/// of `e` still-missing rows.
fn sample_surjection<R: Rng + ?Sized>(m: usize, q: usize, rng: &mut R) -> Vec<usize> {
    let mut log_r = vec![vec![f64::NEG_INFINITY; m + 1]; q + 1];
    log_r[0][0] = 0.0;
    for r in 1..=q {
        for e in 0..=m.min(r) {
            let stay = if e < m { ((m - e) as f64).ln() + log_r[r - 1][e] } else { f64::NEG_INFINITY };
            let take = if e > 0 { (e as f64).ln() + log_r[r - 1][e - 1] } else { f64::NEG_INFINITY };
            log_r[r][e] = log_add(stay, take);
        }
    }
    let mut missing: Vec<usize> = (0..m).collect();
    let mut covered: Vec<usize> = Vec::with_capacity(m);
    let mut h = Vec::with_capacity(q);
    for j in 0..q {
        let r = q - j;
        let e = missing.len();
        let p_new = if e == 0 {
            0.0
        } else {
            ((e as f64).ln() + log_r[r - 1][e - 1] - log_r[r][e]).exp()
        };
        if rng.random::<f64>() < p_new {
            let k = rng.random_range(0..e);
            let row = missing.swap_remove(k);
            covered.push(row);
            h.push(row);
        } else {
            h.push(covered[rng.random_range(0..covered.len())]);
        }
    }
    h
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}
