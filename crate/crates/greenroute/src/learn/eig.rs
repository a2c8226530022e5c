//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Each sweep annihilates every off-diagonal element once with a plane
//! rotation; the accumulated rotations form the eigenvector matrix. Robust
//! for the matrix orders this crate deals with (covariances up to a few
//! hundred), if slower than QR-based methods for large inputs.

use crate::linalg::Matrix;

use super::LearnError;

const MAX_SWEEPS: usize = 100;
const OFF_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Decomposes a symmetric matrix into eigenvalues (sorted descending) and an
/// orthonormal eigenvector matrix whose columns satisfy `c v_i = l_i v_i`.
/// Each eigenvector is signed so its largest-magnitude entry is positive.
pub fn eig_sym(c: &Matrix) -> Result<(Vec<f64>, Matrix), LearnError> {
    let n = c.rows();
    if c.cols() != n {
        return Err(LearnError::DimensionMismatch {
            expected: n,
            got: c.cols(),
        });
    }
    let scale = c.max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (c[(i, j)] - c[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(LearnError::NonSymmetric { row: i, col: j });
            }
        }
    }
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }

    let mut a = c.clone();
    let mut v = Matrix::identity(n);
    // Convergence is relative to the matrix magnitude; the trace alone can
    // cancel to zero for indefinite inputs, so the Frobenius norm backs it up.
    let threshold = OFF_TOLERANCE * a.trace().abs().max(a.frobenius_norm());

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(LearnError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = (0..n).map(|r| v[(r, src)]).collect();
        let lead = col
            .iter()
            .enumerate()
            .max_by(|(i, x), (j, y)| x.abs().total_cmp(&y.abs()).then(j.cmp(i)))
            .map(|(i, _)| i)
            .unwrap();
        if col[lead] < 0.0 {
            for x in &mut col {
                *x = -*x;
            }
        }
        for r in 0..n {
            vectors[(r, dst)] = col[r];
        }
    }
    Ok((eigenvalues, vectors))
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a[(p, q)] * a[(p, q)];
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
    let t = if theta.abs() > 1e100 {
        // Rotation angle underflows; first-order term keeps progress.
        1.0 / (2.0 * theta)
    } else {
        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.rows();
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for j in 0..n {
        if j == p || j == q {
            continue;
        }
        let ajp = a[(j, p)];
        let ajq = a[(j, q)];
        a[(j, p)] = c * ajp - s * ajq;
        a[(p, j)] = a[(j, p)];
        a[(j, q)] = s * ajp + c * ajq;
        a[(q, j)] = a[(j, q)];
    }
    for j in 0..n {
        let vjp = v[(j, p)];
        let vjq = v[(j, q)];
        v[(j, p)] = c * vjp - s * vjq;
        v[(j, q)] = s * vjp + c * vjq;
    }
}
