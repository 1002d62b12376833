//! Point-value linear algebra on row-major square matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub fn to_dmatrix(m: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, m)
}

/// `g(a, b)` for a row-major metric matrix.
pub fn gdot(g: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            s += a[i] * g[i * n + j] * b[j];
        }
    }
    s
}

pub fn gnorm(g: &[f64], a: &[f64]) -> f64 {
    gdot(g, a, a).max(0.0).sqrt()
}

pub fn min_eigenvalue(m: &[f64], n: usize) -> f64 {
    let sym = to_dmatrix(m, n);
    let sym = (&sym + sym.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn eigenvalues_sym(m: &[f64], n: usize) -> Vec<f64> {
    let sym = to_dmatrix(m, n);
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn inverse(m: &[f64], n: usize) -> Result<Vec<f64>> {
    let inv = to_dmatrix(m, n)
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric(min_eigenvalue(m, n)))?;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = inv[(i, j)];
        }
    }
    Ok(out)
}

pub fn matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum()).collect()
}

pub fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

pub fn scaled(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Absolute difference relative to `1 + magnitude` of the compared quantities.
pub fn hybrid_residual(lhs: &[f64], rhs: &[f64]) -> f64 {
    let diff = lhs.iter().zip(rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    diff / (1.0 + max_abs(lhs).max(max_abs(rhs)))
}

pub fn hybrid_scalar(lhs: f64, rhs: f64) -> f64 {
    hybrid_residual(&[lhs], &[rhs])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_eigenvalues_of_a_diagonal_metric() {
        let g = [2.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 4.0];
        assert_eq!(inverse(&g, 3).unwrap(), vec![0.5, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.25]);
        assert_eq!(eigenvalues_sym(&g, 3), vec![0.5, 2.0, 4.0]);
        assert_eq!(min_eigenvalue(&g, 3), 0.5);
        assert_eq!(gdot(&g, &[1.0, 1.0, 0.0], &[1.0, 2.0, 3.0]), 3.0);
    }

    #[test]
    fn singular_matrix_is_an_error() {
        assert!(matches!(inverse(&[1.0, 2.0, 2.0, 4.0], 2), Err(Error::SingularMetric(_))));
    }

    #[test]
    fn hybrid_residual_is_relative_for_large_values() {
        assert_eq!(hybrid_scalar(0.0, 0.0), 0.0);
        assert!((hybrid_scalar(1e8, 1e8 + 1.0) - 1e-8).abs() < 1e-15);
        assert_eq!(hybrid_scalar(0.5, 0.0), 0.5 / 1.5);
    }
}
