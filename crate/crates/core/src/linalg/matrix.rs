use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use faer::linalg::matmul::matmul;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatMut, MatRef};
use num_traits::{Float, One, Zero};

use crate::budget::{checked_pow, MemoryBudget};
use crate::error::{invalid, Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// Relative tolerance on `X - X^dagger`, scaled by `1 + ||X||_F`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Relative tolerance on negative eigenvalues, scaled by `1 + ||X||_F`.
pub const PSD_TOL: f64 = 1e-12;
/// Absolute tolerance for exponential identities such as `e^{sH} e^{-sH} = 1`.
pub const EXPM_TOL: f64 = 1e-9;

/// Dense square matrix.
///
/// Tensor factors follow one global convention: site 1 is the leftmost,
/// slowest-varying factor, so `kron(A, B)[(i1*dB + i2, j1*dB + j2)] = A[i1,j1] B[i2,j2]`.
#[derive(Clone, PartialEq)]
pub struct Matrix<T: Scalar> {
    inner: Mat<T>,
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{} ", self.dim(), self.dim())?;
        f.debug_list()
            .entries((0..self.dim()).map(|i| (0..self.dim()).map(|j| self[(i, j)]).collect::<Vec<_>>()))
            .finish()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: Mat::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> T) -> Self {
        Self {
            inner: Mat::from_fn(dim, dim, f),
        }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from row-major nested rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("matrix must have dimension at least 1"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// Wraps a faer matrix; it must be square.
    pub fn from_faer(inner: Mat<T>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(invalid(format!(
                "matrix must be square, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        Ok(Self { inner })
    }

    pub(crate) fn from_faer_unchecked(inner: Mat<T>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        Self { inner }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_faer(&self) -> MatRef<'_, T> {
        self.inner.as_ref()
    }

    pub fn as_faer_mut(&mut self) -> MatMut<'_, T> {
        self.inner.as_mut()
    }

    pub fn into_faer(self) -> Mat<T> {
        self.inner
    }

    /// Row-major rows, the serialization order used by the model file format.
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint().to_owned(),
        }
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> Matrix<U> {
        Matrix::from_fn(self.dim(), |i, j| f(self[(i, j)]))
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self[(i, i)]).sum()
    }

    /// `tr(A^dagger B)`, the Hilbert-Schmidt inner product.
    pub fn inner_product(&self, other: &Self) -> Result<T> {
        self.check_same_dim(other)?;
        let n = self.dim();
        let mut acc = T::zero();
        for j in 0..n {
            for i in 0..n {
                acc += self[(i, j)].conj() * other[(i, j)];
            }
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> T::Re {
        let n = self.dim();
        let mut acc = T::Re::zero();
        for j in 0..n {
            for i in 0..n {
                acc += self[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> T::Re {
        let n = self.dim();
        let mut m = T::Re::zero();
        for j in 0..n {
            for i in 0..n {
                m = m.max(self[(i, j)].modulus());
            }
        }
        m
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            inner: Mat::from_fn(self.dim(), self.dim(), |i, j| self[(i, j)] * s),
        }
    }

    pub fn scaled_real(&self, s: T::Re) -> Self {
        self.scaled(T::from_real(s))
    }

    pub fn scale_in_place(&mut self, s: T) {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                self.inner[(i, j)] *= s;
            }
        }
    }

    /// Replaces `X` with `(X + X^dagger) / 2`.
    pub fn hermitize(&mut self) {
        let n = self.dim();
        let half = T::Re::lit(0.5);
        for j in 0..n {
            for i in 0..=j {
                if i == j {
                    let v = self.inner[(i, i)];
                    self.inner[(i, i)] = T::from_real(v.re());
                } else {
                    let avg = (self.inner[(i, j)] + self.inner[(j, i)].conj()).scale(half);
                    self.inner[(i, j)] = avg;
                    self.inner[(j, i)] = avg.conj();
                }
            }
        }
    }

    pub fn hermitized(mut self) -> Self {
        self.hermitize();
        self
    }

    /// Largest `|X[i,j] - conj(X[j,i])|` and where it occurs.
    pub fn hermiticity_defect(&self) -> (T::Re, usize, usize) {
        let n = self.dim();
        let mut worst = (T::Re::zero(), 0, 0);
        for j in 0..n {
            for i in 0..=j {
                let d = (self[(i, j)] - self[(j, i)].conj()).modulus();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    /// `1e-10 * (1 + ||X||_F)`.
    pub fn hermiticity_tol(&self) -> T::Re {
        T::Re::lit(HERMITICITY_TOL) * (T::Re::one() + self.frobenius_norm())
    }

    /// `1e-12 * (1 + ||X||_F)`.
    pub fn psd_tol(&self) -> T::Re {
        T::Re::lit(PSD_TOL) * (T::Re::one() + self.frobenius_norm())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect().0 <= self.hermiticity_tol()
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let (asym, row, col) = self.hermiticity_defect();
        let tol = self.hermiticity_tol();
        // NaN entries must fail too
        if asym <= tol && self.frobenius_norm().is_finite() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                asymmetry: asym.to_f64(),
                row,
                col,
                tolerance: tol.to_f64(),
            })
        }
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self[(i, j)] == T::zero()))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self[(i, i)]).collect()
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_dim(rhs)?;
        Ok(self * rhs)
    }

    /// `self * rhs^dagger` without materializing the adjoint.
    pub fn mul_adjoint(&self, rhs: &Self) -> Self {
        let mut out = Mat::zeros(self.dim(), self.dim());
        matmul(
            out.as_mut(),
            Accum::Replace,
            self.inner.as_ref(),
            rhs.inner.adjoint(),
            T::one(),
            faer::get_global_parallelism(),
        );
        Self { inner: out }
    }

    /// `self = self + alpha * a * b`.
    pub fn add_product<A, B>(&mut self, alpha: T, a: MatRef<'_, A>, b: MatRef<'_, B>)
    where
        A: Conjugate<Canonical = T>,
        B: Conjugate<Canonical = T>,
    {
        matmul(
            self.inner.as_mut(),
            Accum::Add,
            a,
            b,
            alpha,
            faer::get_global_parallelism(),
        );
    }

    /// Converts to double precision complex entries.
    pub fn to_c64(&self) -> Matrix<num_complex::Complex64> {
        self.map(|z| z.to_c64())
    }

    /// Narrows complex double entries into `T`; `None` if `T` is real and some
    /// entry has a non-zero imaginary part.
    pub fn try_from_c64(m: &Matrix<num_complex::Complex64>) -> Option<Self> {
        let n = m.dim();
        let mut out = Self::zeros(n);
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] = T::from_c64(m[(i, j)])?;
            }
        }
        Some(out)
    }
}

/// Kronecker product `A (x) B`.
pub fn kron<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let (na, nb) = (a.dim(), b.dim());
    let n = na
        .checked_mul(nb)
        .ok_or_else(|| invalid("Kronecker product dimension overflows usize"))?;
    MemoryBudget::from_env().require_matrices("Kronecker product", n as u128, 1, std::mem::size_of::<T>())?;
    let mut out = Mat::zeros(n, n);
    for ja in 0..na {
        for jb in 0..nb {
            let col = ja * nb + jb;
            for ia in 0..na {
                let av = a[(ia, ja)];
                if av == T::zero() {
                    continue;
                }
                for ib in 0..nb {
                    out[(ia * nb + ib, col)] = av * b[(ib, jb)];
                }
            }
        }
    }
    Ok(Matrix { inner: out })
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<T: Scalar>(factors: &[&Matrix<T>]) -> Result<Matrix<T>> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| invalid("kron_all needs at least one factor"))?;
    rest.iter().try_fold((*first).clone(), |acc, f| kron(&acc, f))
}

/// `I_{left} (x) op (x) I_{right}` for identity blocks of the given dimensions.
pub fn embed<T: Scalar>(op: &Matrix<T>, left: usize, right: usize) -> Result<Matrix<T>> {
    let k = op.dim();
    let n = left
        .checked_mul(k)
        .and_then(|x| x.checked_mul(right))
        .ok_or_else(|| invalid("embedding dimension overflows usize"))?;
    MemoryBudget::from_env().require_matrices("embedded operator", n as u128, 1, std::mem::size_of::<T>())?;
    let mut out = Mat::zeros(n, n);
    for l in 0..left {
        for j in 0..k {
            for i in 0..k {
                let v = op[(i, j)];
                if v == T::zero() {
                    continue;
                }
                for r in 0..right {
                    out[((l * k + i) * right + r, (l * k + j) * right + r)] = v;
                }
            }
        }
    }
    Ok(Matrix { inner: out })
}

/// `d^n` as a matrix dimension, erroring on overflow.
pub fn site_dim(local_dim: usize, n_sites: usize) -> Result<usize> {
    checked_pow(local_dim, n_sites)
        .ok_or_else(|| invalid(format!("{local_dim}^{n_sites} does not fit in a machine word")))
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, idx: (usize, usize)) -> &T {
        &self.inner[idx]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut T {
        &mut self.inner[idx]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matrix sum");
        Matrix::from_fn(self.dim(), |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matrix difference");
        Matrix::from_fn(self.dim(), |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matrix product");
        let mut out = Mat::zeros(self.dim(), self.dim());
        matmul(
            out.as_mut(),
            Accum::Replace,
            self.inner.as_ref(),
            rhs.inner.as_ref(),
            T::one(),
            faer::get_global_parallelism(),
        );
        Matrix { inner: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn diag(v: &[f64]) -> Matrix<f64> {
        Matrix::from_diagonal(v)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = Matrix::<C>::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), Matrix::identity(4));
    }

    #[test]
    fn kron_of_diagonals() {
        let k = kron(&diag(&[1.0, 2.0]), &diag(&[3.0, 4.0])).unwrap();
        assert_eq!(k, diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let a = Matrix::from_rows(&[vec![1.0, 5.0], vec![-2.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0, 0.0, 7.0], vec![0.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]).unwrap();
        assert_eq!(a.trace(), 2.0);
        assert_eq!(b.trace(), 3.0);
        assert_eq!(kron(&a, &b).unwrap().trace(), 6.0);
    }

    #[test]
    fn kron_places_site_one_slowest() {
        // |1><0| (x) |0><1| has its single entry at row 2, column 1
        let mut a = Matrix::<f64>::zeros(2);
        a[(1, 0)] = 1.0;
        let mut b = Matrix::<f64>::zeros(2);
        b[(0, 1)] = 1.0;
        let k = kron(&a, &b).unwrap();
        assert_eq!(k[(2, 1)], 1.0);
        assert_eq!(k.frobenius_norm(), 1.0);
    }

    #[test]
    fn embed_matches_kron() {
        let op = Matrix::from_fn(2, |i, j| C::new((i + 2 * j) as f64, i as f64 - j as f64));
        let direct = kron_all(&[&Matrix::identity(3), &op, &Matrix::identity(2)]).unwrap();
        assert_eq!(embed(&op, 3, 2).unwrap(), direct);
    }

    #[test]
    fn hermitize_and_defect() {
        let mut m = Matrix::from_rows(&[
            vec![C::new(1.0, 0.3), C::new(2.0, 1.0)],
            vec![C::new(2.0, 0.0), C::new(0.0, 0.0)],
        ])
        .unwrap();
        let (asym, r, c) = m.hermiticity_defect();
        assert!((asym - 0.6).abs() < 1e-15 || (asym - 1.0).abs() < 1e-15);
        assert!(r <= c);
        assert!(m.check_hermitian().is_err());
        m.hermitize();
        assert!(m.check_hermitian().is_ok());
        assert_eq!(m[(0, 1)], C::new(2.0, 0.5));
        assert_eq!(m[(1, 0)], C::new(2.0, -0.5));
    }

    #[test]
    fn from_rows_rejects_ragged_input() {
        assert!(Matrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(Matrix::<f64>::from_rows(&[]).is_err());
    }

    #[test]
    fn inner_product_is_hilbert_schmidt() {
        let a = Matrix::from_fn(3, |i, j| C::new(i as f64, j as f64));
        let b = Matrix::from_fn(3, |i, j| C::new(1.0 + j as f64, -(i as f64)));
        let direct = (&a.adjoint() * &b).trace();
        let ip = a.inner_product(&b).unwrap();
        assert!((ip - direct).norm() < 1e-12);
    }
}
