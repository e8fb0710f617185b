//! Small dense kernels: Householder least squares, Jacobi singular values,
//! LU with partial pivoting. Sizes here are tiny (a handful of columns), so
//! clarity wins over blocking.

use crate::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.iter().flatten().copied().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).fold(S::zero(), |acc, (&a, &b)| acc + a * b)).collect()
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Householder QR of a tall matrix applied to a right-hand side.
///
/// Returns the `n x n` upper-triangular `R` and the first `n` entries of
/// `Qᵀb`. Requires `rows >= cols`.
pub fn householder_qr<S: Scalar>(a: &Matrix<S>, b: &[S]) -> (Matrix<S>, Vec<S>) {
    let (m, n) = (a.rows, a.cols);
    assert!(m >= n && b.len() == m);
    let mut a = a.clone();
    let mut b = b.to_vec();
    for k in 0..n {
        let norm = (k..m).fold(S::zero(), |acc, i| acc.hypot(a[(i, k)]));
        if norm == S::zero() {
            continue;
        }
        let alpha = if a[(k, k)] > S::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in place of column k
        let mut v: Vec<S> = (k..m).map(|i| a[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(S::zero(), |acc, &x| acc + x * x);
        if vnorm2 == S::zero() {
            continue;
        }
        let two = S::lit(2.0);
        for j in k..n {
            let dot = (k..m).fold(S::zero(), |acc, i| acc + v[i - k] * a[(i, j)]);
            let f = two * dot / vnorm2;
            for i in k..m {
                a[(i, j)] = a[(i, j)] - f * v[i - k];
            }
        }
        let dot = (k..m).fold(S::zero(), |acc, i| acc + v[i - k] * b[i]);
        let f = two * dot / vnorm2;
        for i in k..m {
            b[i] = b[i] - f * v[i - k];
        }
    }
    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = a[(i, j)];
        }
    }
    b.truncate(n);
    (r, b)
}

/// Solves `R x = y` for upper-triangular `R`.
pub fn back_substitute<S: Scalar>(r: &Matrix<S>, y: &[S]) -> Vec<S> {
    let n = r.cols;
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let s = ((i + 1)..n).fold(y[i], |acc, j| acc - r[(i, j)] * x[j]);
        x[i] = s / r[(i, i)];
    }
    x
}

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn singular_values<S: Scalar>(a: &Matrix<S>) -> Vec<S> {
    let (m, n) = (a.rows, a.cols);
    let mut u = a.clone();
    let eps = S::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (S::zero(), S::zero(), S::zero());
                for i in 0..m {
                    alpha = alpha + u[(i, p)] * u[(i, p)];
                    beta = beta + u[(i, q)] * u[(i, q)];
                    gamma = gamma + u[(i, p)] * u[(i, q)];
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == S::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (S::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (S::one() + zeta * zeta).sqrt());
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * x - s * y;
                    u[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<S> = (0..n).map(|j| (0..m).fold(S::zero(), |acc, i| acc.hypot(u[(i, j)]))).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    /// `None` if a pivot is exactly zero or not finite.
    pub fn factor(mut a: Matrix<S>) -> Option<Self> {
        let n = a.rows;
        assert_eq!(n, a.cols);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
            let pivot = a[(p, k)];
            if pivot == S::zero() || !pivot.is_finite() {
                return None;
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = a[(p, j)];
                    a[(p, j)] = a[(k, j)];
                    a[(k, j)] = t;
                }
            }
            for i in (k + 1)..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                for j in (k + 1)..n {
                    a[(i, j)] = a[(i, j)] - f * a[(k, j)];
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let mut x = vec![S::zero(); b.len()];
        self.solve_into(b, &mut x);
        x
    }

    /// Like [`solve`](Self::solve) but writes into `x`.
    pub fn solve_into(&self, b: &[S], x: &mut [S]) {
        let n = self.lu.rows;
        for (xi, &p) in x.iter_mut().zip(&self.perm) {
            *xi = b[p];
        }
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_square_system() {
        let a = Matrix::<f64>::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let (r, y) = householder_qr(&a, &[3.0, 5.0]);
        let x = back_substitute(&r, &y);
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn singular_values_of_diagonal_and_rank_one() {
        let d = Matrix::<f64>::from_rows(&[vec![3.0, 0.0], vec![0.0, -4.0], vec![0.0, 0.0]]);
        let sv = singular_values(&d);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
        let r1 = Matrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        let sv = singular_values(&r1);
        assert!((sv[0] - 70f64.sqrt()).abs() < 1e-12);
        assert!(sv[1] < 1e-14);
    }

    #[test]
    fn lu_with_pivoting() {
        let a = Matrix::<f64>::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![4.0, -3.0, 8.0]]);
        let lu = Lu::factor(a.clone()).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let back = a.mul_vec(&x);
        for (u, v) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((u - v).abs() < 1e-13);
        }
        assert!(Lu::factor(Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]])).is_none());
    }
}
