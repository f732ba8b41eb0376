//! Dense kernels for the tiny (n <= 4) systems met in the curvature code.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jet::Scalar;

/// Pivots with magnitude below this (relative to the largest entry) make the
/// system singular.
const PIVOT_EPS: f64 = 1e-13;

/// Solves `A z = b` by Gaussian elimination with partial pivoting.
/// Pivot choice looks at leading values only, so the same elimination order
/// is applied to every Taylor coefficient.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Result<Vec<S>> {
    let n = b.len();
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m
        .iter()
        .flat_map(|row| row.iter().map(|v| v.value().abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Singular { pivot: 0.0 });
    }

    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, m[r][col].value().abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= PIVOT_EPS * scale {
            return Err(Error::Singular { pivot: piv_abs });
        }
        m.swap(col, piv_row);
        rhs.swap(col, piv_row);
        let inv = m[col][col].recip()?;
        for r in col + 1..n {
            let factor = m[r][col].clone() * inv.clone();
            for c in col..n {
                let t = factor.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - t;
            }
            let t = factor * rhs[col].clone();
            rhs[r] = rhs[r].clone() - t;
        }
    }

    let mut z: Vec<S> = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c in row + 1..n {
            acc = acc - m[row][c].clone() * z[c].clone();
        }
        z[row] = acc.checked_div(&m[row][row])?;
    }
    Ok(z)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|p, q| p.total_cmp(q));
    ev
}

/// 2-norm condition number of a symmetric matrix (infinite when singular).
pub fn symmetric_condition(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = eigenvalues.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(p, q)| p * q).sum())
        .collect()
}

/// `u^T A v`.
pub fn bilinear(a: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(mat_vec(a, v)).map(|(p, q)| p * q).sum()
}

pub fn euclid_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}
