//! Hermitian eigendecomposition and the spectral functions built on it:
//! matrix exponentials, norms, trace distance and the Hilbert projective
//! metric.

use faer::{Mat, Side};
use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::linalg::matrix::Matrix;
use crate::scalar::{RealScalar, Scalar};

/// `A = U diag(values) U^dagger`, eigenvalues in nondecreasing order.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Scalar> {
    pub values: Vec<T::Re>,
    pub vectors: Matrix<T>,
    /// For diagonal input, `vectors` is the permutation `e_{perm[j]}` per column.
    permutation: Option<Vec<usize>>,
}

impl<T: Scalar> HermitianEigen<T> {
    /// Decomposes `a` without checking hermiticity; only the lower triangle is read.
    pub fn new_unchecked(a: &Matrix<T>) -> Result<Self> {
        if a.is_diagonal() {
            let d = a.diagonal();
            let mut perm: Vec<usize> = (0..a.dim()).collect();
            perm.sort_by(|&i, &j| d[i].re().partial_cmp(&d[j].re()).unwrap_or(std::cmp::Ordering::Equal));
            let mut vectors = Matrix::zeros(a.dim());
            for (j, &i) in perm.iter().enumerate() {
                vectors[(i, j)] = T::one();
            }
            return Ok(Self {
                values: perm.iter().map(|&i| d[i].re()).collect(),
                vectors,
                permutation: Some(perm),
            });
        }
        let evd = a
            .as_faer()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Backend(format!("self-adjoint eigendecomposition: {e:?}")))?;
        let s = evd.S().column_vector();
        let values = (0..a.dim()).map(|i| s[i].re()).collect();
        Ok(Self {
            values,
            vectors: Matrix::from_faer_unchecked(evd.U().to_owned()),
            permutation: None,
        })
    }

    pub fn new(a: &Matrix<T>) -> Result<Self> {
        a.check_hermitian()?;
        Self::new_unchecked(a)
    }

    pub fn min(&self) -> T::Re {
        self.values[0]
    }

    pub fn max(&self) -> T::Re {
        *self.values.last().expect("non-empty spectrum")
    }

    /// `U diag(f(lambda)) U^dagger`.
    pub fn apply(&self, f: impl Fn(T::Re) -> T::Re) -> Matrix<T> {
        let n = self.vectors.dim();
        if let Some(perm) = &self.permutation {
            let mut out = Matrix::zeros(n);
            for (j, &i) in perm.iter().enumerate() {
                out[(i, i)] = T::from_real(f(self.values[j]));
            }
            return out;
        }
        let u = self.vectors.as_faer();
        let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)].scale(f(self.values[j])));
        let mut out = Matrix::zeros(n);
        out.add_product(T::one(), scaled.as_ref(), u.adjoint());
        out
    }

    /// `exp(scale * A)`, Hermitian by construction.
    pub fn exp(&self, scale: T::Re) -> Matrix<T> {
        self.apply(|x| (scale * x).exp()).hermitized()
    }
}

/// Eigenvalues of a Hermitian matrix (lower triangle read), nondecreasing.
pub fn eigvalsh<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T::Re>> {
    a.as_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Backend(format!("self-adjoint eigenvalues: {e:?}")))
}

/// `exp(scale * H)` for Hermitian `H`, via a full eigendecomposition.
pub fn herm_expm<T: Scalar>(h: &Matrix<T>, scale: T::Re) -> Result<Matrix<T>> {
    Ok(HermitianEigen::new(h)?.exp(scale))
}

/// Operator norm of a Hermitian matrix: largest absolute eigenvalue.
pub fn hermitian_norm<T: Scalar>(h: &Matrix<T>) -> Result<T::Re> {
    let v = eigvalsh(h)?;
    Ok(v[0].abs().max(v[v.len() - 1].abs()))
}

/// Operator norm of an arbitrary square matrix: largest singular value.
pub fn operator_norm<T: Scalar>(a: &Matrix<T>) -> Result<T::Re> {
    let s = a
        .as_faer()
        .singular_values()
        .map_err(|e| Error::Backend(format!("singular values: {e:?}")))?;
    Ok(s.first().copied().unwrap_or_else(T::Re::zero))
}

/// Smallest singular value.
pub fn min_singular_value<T: Scalar>(a: &Matrix<T>) -> Result<T::Re> {
    let s = a
        .as_faer()
        .singular_values()
        .map_err(|e| Error::Backend(format!("singular values: {e:?}")))?;
    Ok(s.last().copied().unwrap_or_else(T::Re::zero))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm<T: Scalar>(a: &Matrix<T>) -> Result<T::Re> {
    Ok(eigvalsh(a)?
        .into_iter()
        .map(|x| x.abs())
        .fold(T::Re::zero(), |a, b| a + b))
}

/// `||x - y||_1` for Hermitian `x`, `y`.
pub fn trace_distance<T: Scalar>(x: &Matrix<T>, y: &Matrix<T>) -> Result<T::Re> {
    x.check_same_dim(y)?;
    let diff = (x - y).hermitized();
    trace_norm(&diff)
}

/// Hilbert projective metric `log(sup(x/y) / inf(x/y))` between positive
/// definite `x` and `y`.
///
/// `sup(x/y)` and `inf(x/y)` are the extreme eigenvalues of
/// `y^{-1/2} x y^{-1/2}`.
pub fn hilbert_metric<T: Scalar>(x: &Matrix<T>, y: &Matrix<T>) -> Result<T::Re> {
    x.check_same_dim(y)?;
    x.check_hermitian()?;
    y.check_hermitian()?;
    let ex = eigvalsh(x)?;
    if ex[0] <= x.psd_tol() {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: ex[0].to_f64(),
        });
    }
    let ey = HermitianEigen::new_unchecked(y)?;
    if ey.min() <= y.psd_tol() {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: ey.min().to_f64(),
        });
    }
    let (lo, hi) = relative_spectrum_bounds(x, &ey)?;
    Ok((hi / lo).ln())
}

/// Extreme eigenvalues `(inf(x/y), sup(x/y))` of `y^{-1/2} x y^{-1/2}` given
/// the eigendecomposition of `y`. The caller guarantees `y > 0`.
pub(crate) fn relative_spectrum_bounds<T: Scalar>(x: &Matrix<T>, y_eig: &HermitianEigen<T>) -> Result<(T::Re, T::Re)> {
    let y_inv_sqrt = y_eig.apply(|l| T::Re::one() / l.sqrt());
    let sandwich = (&(&y_inv_sqrt * x) * &y_inv_sqrt).hermitized();
    let s = eigvalsh(&sandwich)?;
    Ok((s[0], s[s.len() - 1]))
}
