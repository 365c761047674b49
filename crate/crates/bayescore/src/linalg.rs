//! Minimal dense linear algebra for small symmetric systems.

use crate::error::{Error, Result};
use crate::math;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Lower-triangular Cholesky factor of a symmetric positive-definite
/// matrix given in row-major order. Errors when the matrix is not
/// symmetric positive definite (within a small pivot tolerance).
pub fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    for row in a {
        if row.len() != n {
            return Err(Error::Dimension("covariance matrix is not square".to_string()));
        }
    }
    for i in 0..n {
        for j in 0..i {
            if math::abs(a[i][j] - a[j][i]) > 1e-9 * (1.0 + math::abs(a[i][j])) {
                return Err(Error::Parameter("covariance matrix is not symmetric".to_string()));
            }
        }
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::Parameter(
                        "covariance matrix is not positive definite".to_string(),
                    ));
                }
                l[i][j] = math::sqrt(sum);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves L z = b for lower-triangular L.
pub fn forward_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    z
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if math::abs(m[r][col]) > math::abs(m[piv][col]) {
                piv = r;
            }
        }
        if math::abs(m[piv][col]) < 1e-300 {
            return Err(Error::Degenerate("singular linear system".to_string()));
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for c in i + 1..n {
            s -= m[i][c] * x[c];
        }
        x[i] = s / m[i][i];
    }
    Ok(x)
}
