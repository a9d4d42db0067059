use super::Matrix;
use crate::error::{Error, Result};

/// Pivot magnitude below which a matrix is treated as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn invert(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "cannot invert a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .expect("non-empty range");
        let pivot = a[(pivot_row, col)];
        if pivot.abs() < SINGULAR_PIVOT {
            return Err(Error::SingularMatrix { pivot: pivot.abs() });
        }
        swap_rows(&mut a, col, pivot_row);
        swap_rows(&mut inv, col, pivot_row);

        let scale = 1.0 / pivot;
        for j in 0..n {
            a[(col, j)] *= scale;
            inv[(col, j)] *= scale;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = a[(i, col)];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(i, j)] -= factor * a[(col, j)];
                inv[(i, j)] -= factor * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

/// Default rank tolerance: `1e-9 * ||m||_inf * max(rows, cols)`.
pub fn default_rank_tol(m: &Matrix) -> f64 {
    1e-9 * m.norm_inf() * m.rows().max(m.cols()) as f64
}

/// Numerical rank with the default relative tolerance.
pub fn rank(m: &Matrix) -> usize {
    rank_with_tol(m, default_rank_tol(m))
}

/// Numerical rank by row echelon reduction with partial pivoting.
/// Pivots with magnitude below `tol` count as zero.
pub fn rank_with_tol(m: &Matrix, tol: f64) -> usize {
    // a zero tolerance (zero matrix) must still classify exact zeros as zero
    let tol = tol.max(f64::MIN_POSITIVE);
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot_row = (rank..rows)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .expect("non-empty range");
        if a[(pivot_row, col)].abs() < tol {
            continue;
        }
        swap_rows(&mut a, rank, pivot_row);
        let pivot = a[(rank, col)];
        for i in rank + 1..rows {
            let factor = a[(i, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..cols {
                a[(i, j)] -= factor * a[(rank, j)];
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `a * X = b` by LU factorization with partial pivoting.
pub fn solve_dense(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "solve needs square a with matching rows, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
            .expect("non-empty range");
        if lu[(p, k)].abs() < SINGULAR_PIVOT {
            return Err(Error::SingularMatrix {
                pivot: lu[(p, k)].abs(),
            });
        }
        if p != k {
            swap_rows(&mut lu, k, p);
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / pivot;
            lu[(i, k)] = l;
            if l == 0.0 {
                continue;
            }
            for j in k + 1..n {
                lu[(i, j)] -= l * lu[(k, j)];
            }
        }
    }

    let mut x = Matrix::zeros(n, b.cols());
    for c in 0..b.cols() {
        // forward substitution on the permuted right-hand side
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[(perm[i], c)];
            for (j, yj) in y.iter().enumerate().take(i) {
                s -= lu[(i, j)] * yj;
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= lu[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = s / lu[(i, i)];
        }
    }
    Ok(x)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Only the upper triangle is read.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "symmetric eigenvalues need a square matrix".into(),
        ));
    }
    let n = m.rows();
    let mut a = m.clone();
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        let tmp = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = tmp;
    }
}
