//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector};

/// Solves `a · x = b` for symmetric positive definite `a`.
pub(crate) fn cholesky_solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let chol = Cholesky::new(a)?;
    let x = chol.solve(b);
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// X·X'.
pub(crate) fn outer_gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    x * x.transpose()
}

/// Copies the listed rows of `x` into a new matrix.
pub(crate) fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// X·β for a column-major design.
pub(crate) fn mat_vec(x: &DMatrix<f64>, beta: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.nrows()];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (o, &v) in out.iter_mut().zip(x.column(j).iter()) {
                *o += v * b;
            }
        }
    }
    out
}

/// X'·v for a column-major design.
pub(crate) fn mat_t_vec(x: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    x.column_iter()
        .map(|col| col.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}
