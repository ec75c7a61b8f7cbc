//! Row-major dense matrices and the two factorizations the rest of the crate
//! needs: Cholesky for proposal covariances and a cyclic Jacobi eigensolver
//! for symmetric matrices (Hessians, symmetrized transition matrices).

use std::ops::{Index, IndexMut};

use crate::Scalar;

use super::{NumericsError, Result};

/// Dense row-major matrix with finite real entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested row slices; rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(NumericsError::EmptyInput);
        }
        let c = rows[0].len();
        for row in rows {
            if row.len() != c {
                return Err(NumericsError::DimensionMismatch { expected: c, got: row.len() });
            }
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Symmetry check with tolerance relative to the largest entry.
    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = T::one().max(self.max_abs());
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product `M v`.
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Row-vector product `xᵀ M` (used to iterate distributions through a
    /// transition matrix).
    pub fn vecmat(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.rows, x.len(), "vecmat dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] = out[j] + xi * self[(i, j)];
            }
        }
        out
    }

    /// Gram matrix `MᵀM`.
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut s = T::zero();
                for k in 0..self.rows {
                    s = s + self[(k, i)] * self[(k, j)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    pub fn scale(&self, factor: T) -> Self {
        let data = self.data.iter().map(|&x| x * factor).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// `a + factor * b`.
pub fn add_scaled<T: Scalar>(a: &[T], factor: T, b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + factor * y).collect()
}

/// Cholesky factorization `M = L Lᵀ` of a symmetric positive-definite matrix.
///
/// A pivot at or below `1e-14` times the largest diagonal entry fails with
/// [`NumericsError::NotPositiveDefinite`]; the diagonal of `L` is strictly
/// positive on success.
pub fn cholesky<T: Scalar>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare(m.rows(), m.cols()));
    }
    if !m.is_symmetric(T::lit(1e-12)) {
        return Err(NumericsError::NotSymmetric);
    }
    let n = m.rows();
    let max_diag = (0..n).fold(T::zero(), |acc, i| acc.max(m[(i, i)]));
    if max_diag <= T::zero() {
        return Err(NumericsError::NotPositiveDefinite { col: 0, pivot: 0.0 });
    }
    let threshold = T::lit(1e-14) * max_diag;
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot = pivot - l[(j, k)] * l[(j, k)];
        }
        if pivot <= threshold {
            return Err(NumericsError::NotPositiveDefinite {
                col: j,
                pivot: pivot.to_f64().unwrap_or(f64::NAN),
            });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn solve_lower_triangular<T: Scalar>(l: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    assert_eq!(b.len(), n, "triangular solve dimension mismatch");
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Log-density of `N(mean, L Lᵀ)` at `x`, given the Cholesky factor `L`.
pub fn mvn_log_density<T: Scalar>(x: &[T], mean: &[T], chol: &DenseMatrix<T>) -> T {
    let d = chol.rows();
    debug_assert_eq!(x.len(), d);
    debug_assert_eq!(mean.len(), d);
    let y = solve_lower_triangular(chol, &sub(x, mean));
    let mut log_det_half = T::zero();
    for i in 0..d {
        log_det_half = log_det_half + chol[(i, i)].ln();
    }
    let two = T::lit(2.0);
    -T::count(d) / two * (two * T::PI()).ln() - log_det_half - dot(&y, &y) / two
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    /// Eigenvalues sorted in descending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as matrix columns, ordered like `values`.
    pub vectors: DenseMatrix<T>,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Intended for desk-scale matrices (`d ≤ 200`); the input must be symmetric
/// within `1e-12` relative to its largest entry.
pub fn sym_eigen<T: Scalar>(m: &DenseMatrix<T>) -> Result<SymEigen<T>> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare(m.rows(), m.cols()));
    }
    if !m.is_symmetric(T::lit(1e-12)) {
        return Err(NumericsError::NotSymmetric);
    }
    let n = m.rows();
    let half = T::lit(0.5);
    // Work on the symmetrized copy so tiny asymmetries cannot bias rotations.
    let mut a = DenseMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * half);
    let mut v = DenseMatrix::identity(n);
    let fro = a.frobenius_norm();
    if n > 1 && fro > T::zero() {
        let stop = fro * T::epsilon();
        for _sweep in 0..60 {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off + a[(i, j)] * a[(i, j)];
                }
            }
            let two = T::lit(2.0);
            if (two * off).sqrt() <= stop {
                break;
            }
            for p in 0..(n - 1) {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                    // tan of the rotation angle; series form for huge theta.
                    let t = if theta.abs() > T::lit(1e150) {
                        (two * theta).recip()
                    } else {
                        let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = (t * t + T::one()).sqrt().recip();
                    let s = t * c;
                    let tau = s / (T::one() + c);

                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    a[(p, p)] = app - t * apq;
                    a[(q, q)] = aqq + t * apq;
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    for r in 0..n {
                        if r != p && r != q {
                            let arp = a[(r, p)];
                            let arq = a[(r, q)];
                            a[(r, p)] = arp - s * (arq + tau * arp);
                            a[(p, r)] = a[(r, p)];
                            a[(r, q)] = arq + s * (arp - tau * arq);
                            a[(q, r)] = a[(r, q)];
                        }
                    }
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp - s * (vrq + tau * vrp);
                        v[(r, q)] = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}
