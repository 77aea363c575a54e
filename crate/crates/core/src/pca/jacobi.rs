//! Cyclic Jacobi eigendecomposition of a real symmetric matrix.

use crate::error::PcaError;
use crate::linalg::Matrix;

/// Sweep cap; a symmetric matrix normally converges in well under ten.
pub const MAX_SWEEPS: usize = 100;

/// Relative off-diagonal tolerance against the Frobenius norm of the input.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Relative tolerance for the symmetry check.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Eigenvalues with eigenvectors in the matching columns, in solver order.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Eigenvalues and orthonormal eigenvectors of `c`, unsorted.
///
/// Each eigenvector is flipped so that its largest-magnitude entry is
/// positive (the lowest index wins a magnitude tie).
pub fn eig_symmetric(c: &Matrix) -> Result<Eigen, PcaError> {
    eig_symmetric_with(c, MAX_SWEEPS)
}

pub fn eig_symmetric_with(c: &Matrix, max_sweeps: usize) -> Result<Eigen, PcaError> {
    let n = c.rows();
    if n != c.cols() {
        return Err(PcaError::DimensionMismatch {
            expected: n,
            actual: c.cols(),
        });
    }
    if n == 0 {
        return Err(PcaError::Empty { rows: 0, cols: 0 });
    }
    for i in 0..n {
        for j in 0..n {
            if !c[(i, j)].is_finite() {
                return Err(PcaError::NonFinite { row: i, col: j });
            }
        }
    }
    let norm = c.frobenius_norm();
    for i in 0..n {
        for j in i + 1..n {
            let gap = (c[(i, j)] - c[(j, i)]).abs();
            if gap > SYMMETRY_TOLERANCE * norm {
                return Err(PcaError::NotSymmetric { row: i, col: j, gap });
            }
        }
    }

    let mut a = c.clone();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let tol = OFF_DIAGONAL_TOLERANCE * norm;

    let mut sweeps = 0;
    while max_off_diagonal(&a) > tol {
        if sweeps == max_sweeps {
            return Err(PcaError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let values = (0..n).map(|i| a[(i, i)]).collect();
    for j in 0..n {
        orient_column(&mut v, j);
    }
    Ok(Eigen { values, vectors: v })
}

fn max_off_diagonal(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let kp = c * akp - s * akq;
        let kq = s * akp + c * akq;
        a[(k, p)] = kp;
        a[(p, k)] = kp;
        a[(k, q)] = kq;
        a[(q, k)] = kq;
    }
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn orient_column(v: &mut Matrix, j: usize) {
    let mut lead = 0;
    for i in 1..v.rows() {
        if v[(i, j)].abs() > v[(lead, j)].abs() {
            lead = i;
        }
    }
    if v[(lead, j)] < 0.0 {
        for i in 0..v.rows() {
            v[(i, j)] = -v[(i, j)];
        }
    }
}
