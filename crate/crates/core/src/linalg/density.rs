use num_traits::{Float, One, Zero};

use crate::error::{invalid, Error, Result};
use crate::linalg::eigen::{eigvalsh, trace_distance, HermitianEigen};
use crate::linalg::matrix::{site_dim, Matrix};
use crate::linalg::tensor::{partial_trace, permute_sites, reduce_to};
use crate::scalar::{RealScalar, Scalar};

/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-12;

fn trace_tol<R: RealScalar>() -> R {
    R::lit(TRACE_TOL).max(R::epsilon() * R::lit(100.0))
}

/// Positive semidefinite, unit-trace operator on `n_sites` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    matrix: Matrix<T>,
    n_sites: usize,
    local_dim: usize,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: Matrix<T>, local_dim: usize, n_sites: usize) -> Result<Self> {
        check_dim(&matrix, local_dim, n_sites)?;
        matrix.check_hermitian()?;
        let matrix = matrix.hermitized();
        let tr = matrix.trace().re();
        if (tr - T::Re::one()).abs() > trace_tol::<T::Re>() {
            return Err(invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = eigvalsh(&matrix)?[0];
        if min < -matrix.psd_tol() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min.to_f64(),
            });
        }
        Ok(Self {
            matrix,
            n_sites,
            local_dim,
        })
    }

    /// Hermitizes and divides by the trace. Positivity is not checked; use
    /// [`DensityMatrix::project_psd`] when it matters.
    pub fn normalized(matrix: Matrix<T>, local_dim: usize, n_sites: usize) -> Result<Self> {
        check_dim(&matrix, local_dim, n_sites)?;
        let mut matrix = matrix.hermitized();
        let tr = matrix.trace().re();
        if !(tr > T::Re::zero()) || !tr.is_finite() {
            return Err(Error::NumericalBreakdown(format!(
                "cannot normalize an operator with trace {tr}"
            )));
        }
        matrix.scale_in_place(T::from_real(T::Re::one() / tr));
        Ok(Self {
            matrix,
            n_sites,
            local_dim,
        })
    }

    pub fn maximally_mixed(local_dim: usize, n_sites: usize) -> Result<Self> {
        let n = site_dim(local_dim, n_sites)?;
        let m = Matrix::identity(n).scaled_real(T::Re::one() / T::Re::from_usize(n));
        Ok(Self {
            matrix: m,
            n_sites,
            local_dim,
        })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<T::Re>> {
        eigvalsh(&self.matrix)
    }

    /// Clips negative eigenvalues to zero and renormalizes. Returns the
    /// projected state and its trace distance to `self`.
    pub fn project_psd(&self) -> Result<(Self, T::Re)> {
        let eig = HermitianEigen::new_unchecked(&self.matrix)?;
        if eig.min() >= T::Re::zero() {
            return Ok((self.clone(), T::Re::zero()));
        }
        let clipped = eig.apply(|x| x.max(T::Re::zero())).hermitized();
        let projected = Self::normalized(clipped, self.local_dim, self.n_sites)?;
        let dist = trace_distance(&self.matrix, &projected.matrix)?;
        log::debug!("PSD projection moved the state by {dist:e} in trace distance");
        Ok((projected, dist))
    }

    /// Reduced state on `keep`, in the listed order.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(invalid("marginal must keep at least one site"));
        }
        let m = reduce_to(&self.matrix, self.local_dim, self.n_sites, keep)?;
        Ok(Self {
            matrix: m,
            n_sites: keep.len(),
            local_dim: self.local_dim,
        })
    }

    /// Reduced state after tracing out `sites`.
    pub fn trace_out(&self, sites: &[usize]) -> Result<Self> {
        if sites.len() >= self.n_sites {
            return Err(invalid("cannot trace out every site of a density matrix"));
        }
        let m = partial_trace(&self.matrix, self.local_dim, self.n_sites, sites)?;
        Ok(Self {
            matrix: m,
            n_sites: self.n_sites - sites.len(),
            local_dim: self.local_dim,
        })
    }

    /// First `k` sites.
    pub fn leading_sites(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n_sites {
            return Err(invalid(format!("cannot keep {k} of {} sites", self.n_sites)));
        }
        self.marginal(&(0..k).collect::<Vec<_>>())
    }

    /// Site `i` of the result is site `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let m = permute_sites(&self.matrix, self.local_dim, self.n_sites, order)?;
        Ok(Self {
            matrix: m,
            n_sites: self.n_sites,
            local_dim: self.local_dim,
        })
    }

    /// Reinterprets the same matrix with a different site layout, e.g. one
    /// site of dimension `d^2` as two sites of dimension `d`.
    pub fn relabel(&self, local_dim: usize, n_sites: usize) -> Result<Self> {
        check_dim(&self.matrix, local_dim, n_sites)?;
        Ok(Self {
            matrix: self.matrix.clone(),
            n_sites,
            local_dim,
        })
    }

    pub fn trace_distance(&self, other: &Self) -> Result<T::Re> {
        trace_distance(&self.matrix, &other.matrix)
    }

    /// `tr(rho * op)`, real part.
    pub fn expectation(&self, op: &Matrix<T>) -> Result<T::Re> {
        Ok(self.matrix.inner_product(op)?.re())
    }
}

fn check_dim<T: Scalar>(m: &Matrix<T>, local_dim: usize, n_sites: usize) -> Result<()> {
    if local_dim < 1 || n_sites < 1 {
        return Err(invalid("density matrix needs at least one site of positive dimension"));
    }
    let expected = site_dim(local_dim, n_sites)?;
    if m.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: m.dim(),
        });
    }
    Ok(())
}
