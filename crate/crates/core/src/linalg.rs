//! Small dense helpers: the base dimension is tiny (1-3 in practice) and the
//! fiber blocks are 2x2, so everything here is direct.

use crate::error::{Error, Result};

/// Eigendecomposition of the symmetric matrix `[[p, q], [q, r]]`.
///
/// Returns `(lam_plus, lam_minus, frame)` with `lam_plus >= lam_minus` and
/// `frame` orthogonal with determinant +1 whose columns are eigenvectors for
/// `lam_plus` and `lam_minus` in that order. Deterministic sign convention:
/// the first column has nonnegative first component (positive second
/// component when the first vanishes); the second column completes a
/// right-handed frame.
pub fn sym2x2_spectral(p: f64, q: f64, r: f64) -> (f64, f64, [[f64; 2]; 2]) {
    let half_tr = 0.5 * (p + r);
    let disc = (0.5 * (p - r)).hypot(q);
    let lam_plus = half_tr + disc;
    let lam_minus = half_tr - disc;

    // Eigenvector for lam_plus, picking the better-conditioned expression.
    let (mut u0, mut u1) = if p >= r { (lam_plus - r, q) } else { (q, lam_plus - p) };
    let n = (u0 * u0 + u1 * u1).sqrt();
    if n == 0.0 {
        // p == r and q == 0: any frame works.
        (u0, u1) = (1.0, 0.0);
    } else {
        u0 /= n;
        u1 /= n;
    }
    if u0 < 0.0 || (u0 == 0.0 && u1 < 0.0) {
        u0 = -u0;
        u1 = -u1;
    }
    (lam_plus, lam_minus, [[u0, -u1], [u1, u0]])
}

/// Solve the 2x2 system `[[m00, m01], [m10, m11]] z = rhs` directly.
pub fn solve2x2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det,
    ])
}

/// Solve `a z = rhs` for a small dense `n x n` matrix (row-major), by Gaussian
/// elimination with partial pivoting. `a` and `rhs` are consumed as scratch.
pub fn solve_dense(mut a: Vec<f64>, mut rhs: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(rhs.len(), n);
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col] == 0.0 {
            return Err(Error::Invalid("singular matrix in linear solve".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = rhs[col];
        for k in col + 1..n {
            s -= a[col * n + k] * rhs[k];
        }
        rhs[col] = s / a[col * n + col];
    }
    Ok(rhs)
}

/// Cholesky test for positive definiteness of a small symmetric matrix
/// (row-major). Returns false on any nonpositive pivot.
pub fn is_positive_definite(a: &[f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}
