use crate::error::{invalid, Error, Result};
use crate::linalg::eigen::{herm_expm, hermitian_norm};
use crate::linalg::matrix::{site_dim, Matrix};
use crate::scalar::Scalar;

/// Inclusive range of chain sites `[first, last]`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteInterval {
    pub first: usize,
    pub last: usize,
}

impl SiteInterval {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if last < first {
            return Err(invalid(format!("empty site interval [{first}, {last}]")));
        }
        Ok(Self { first, last })
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shifted(&self, by: usize) -> Self {
        Self {
            first: self.first + by,
            last: self.last + by,
        }
    }
}

/// Hermitian operator acting on a contiguous block of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Scalar> {
    matrix: Matrix<T>,
    support: SiteInterval,
    local_dim: usize,
}

impl<T: Scalar> HermitianOperator<T> {
    /// Validates the dimension and hermiticity, then stores the exact
    /// Hermitian part of `matrix`.
    pub fn new(matrix: Matrix<T>, support: SiteInterval, local_dim: usize) -> Result<Self> {
        if local_dim < 1 {
            return Err(invalid("local dimension must be positive"));
        }
        let expected = site_dim(local_dim, support.len())?;
        if matrix.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.dim(),
            });
        }
        matrix.check_hermitian()?;
        Ok(Self {
            matrix: matrix.hermitized(),
            support,
            local_dim,
        })
    }

    /// Operator on sites `[0, n_sites - 1]`.
    pub fn on_sites(matrix: Matrix<T>, local_dim: usize, n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(invalid("operator must act on at least one site"));
        }
        Self::new(matrix, SiteInterval::new(0, n_sites - 1)?, local_dim)
    }

    pub(crate) fn from_parts_unchecked(matrix: Matrix<T>, support: SiteInterval, local_dim: usize) -> Self {
        Self {
            matrix,
            support,
            local_dim,
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn support(&self) -> SiteInterval {
        self.support
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_sites(&self) -> usize {
        self.support.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Same matrix on a translated support.
    pub fn shifted(&self, by: usize) -> Self {
        Self {
            matrix: self.matrix.clone(),
            support: self.support.shifted(by),
            local_dim: self.local_dim,
        }
    }

    pub fn scaled(&self, s: T::Re) -> Self {
        Self {
            matrix: self.matrix.scaled_real(s),
            support: self.support,
            local_dim: self.local_dim,
        }
    }

    /// Operator norm (largest absolute eigenvalue).
    pub fn norm(&self) -> Result<T::Re> {
        hermitian_norm(&self.matrix)
    }

    /// `exp(scale * H)`.
    pub fn expm(&self, scale: T::Re) -> Result<Matrix<T>> {
        herm_expm(&self.matrix, scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_must_match_support() {
        let m = Matrix::<f64>::identity(4);
        assert!(HermitianOperator::on_sites(m.clone(), 2, 2).is_ok());
        assert!(matches!(
            HermitianOperator::on_sites(m, 2, 3),
            Err(Error::DimensionMismatch { expected: 8, found: 4 })
        ));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(HermitianOperator::on_sites(m, 2, 1).is_err());
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0 + 1e-13], vec![1.0, 0.0]]).unwrap();
        let h = HermitianOperator::on_sites(m, 2, 1).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)]);
    }

    #[test]
    fn interval_arithmetic() {
        let s = SiteInterval::new(2, 5).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.shifted(3), SiteInterval::new(5, 8).unwrap());
        assert!(SiteInterval::new(3, 2).is_err());
    }
}
