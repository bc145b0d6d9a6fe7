//! Standard nearest-neighbour models.
//!
//! Spin-1/2 conventions use Pauli matrices; the XY term is
//! `-(1/4)(XX + YY)`, i.e. `-(SxSx + SySy)` with `S = sigma/2`.

use num_traits::{Float, One, Zero};

use crate::chain::{block_sites, ChainModel};
use crate::error::{invalid, Result};
use crate::linalg::{HermitianOperator, Matrix, SiteInterval};
use crate::scalar::{RealScalar, Scalar};

/// `h = 0` on `C^d (x) C^d`.
pub fn zero<T: Scalar>(local_dim: usize, beta: T::Re) -> Result<ChainModel<T>> {
    let n = local_dim
        .checked_mul(local_dim)
        .ok_or_else(|| invalid("local dimension too large"))?;
    ChainModel::new(Matrix::zeros(n), local_dim, beta)
}

/// `Z (x) Z` as a diagonal 4x4 matrix.
pub fn zz<T: Scalar>() -> Matrix<T> {
    let (p, m) = (T::one(), -T::one());
    Matrix::from_diagonal(&[p, m, m, p])
}

/// `X (x) X + Y (x) Y`, which swaps `|01>` and `|10>` with weight 2.
pub fn xx_plus_yy<T: Scalar>() -> Matrix<T> {
    let two = T::from_real(T::Re::lit(2.0));
    let mut m = Matrix::zeros(4);
    m[(1, 2)] = two;
    m[(2, 1)] = two;
    m
}

/// Classical Ising chain, `h = -J Z (x) Z`.
pub fn ising<T: Scalar>(j: T::Re, beta: T::Re) -> Result<ChainModel<T>> {
    ChainModel::new(zz::<T>().scaled_real(-j), 2, beta)
}

/// Single XY bond `-(1/4)(XX + YY)`.
pub fn xy_bond<T: Scalar>() -> Matrix<T> {
    xx_plus_yy::<T>().scaled_real(-T::Re::lit(0.25))
}

/// Dimerized XY chain with alternating couplings `1, gamma`.
///
/// For `gamma == 1` this is the translation-invariant `d = 2` chain; otherwise
/// two spins are blocked into one `d = 4` site (see [`xy_blocked`]).
pub fn xy<T: Scalar>(gamma: T::Re, beta: T::Re) -> Result<ChainModel<T>> {
    if gamma == T::Re::one() {
        ChainModel::new(xy_bond(), 2, beta)
    } else {
        xy_blocked(gamma, beta)
    }
}

/// Dimerized XY chain on blocks of two spins, `d = 4`, with two-block term
/// `-(1/4)[(XX+YY) (x) 1 (x) 1 + gamma 1 (x) (XX+YY) (x) 1]`.
pub fn xy_blocked<T: Scalar>(gamma: T::Re, beta: T::Re) -> Result<ChainModel<T>> {
    if gamma < T::Re::zero() || !gamma.is_finite() {
        return Err(invalid(format!(
            "dimerization must be a non-negative number, got {gamma}"
        )));
    }
    let bond = |c: T::Re| HermitianOperator::new(xy_bond::<T>().scaled_real(c), SiteInterval::new(0, 1)?, 2);
    block_sites(&[bond(T::Re::one())?, bond(gamma)?], 4, beta)
}

/// Ferromagnetic `d`-state Potts chain, `h = -J sum_s |ss><ss|`.
pub fn potts<T: Scalar>(local_dim: usize, j: T::Re, beta: T::Re) -> Result<ChainModel<T>> {
    let n = local_dim * local_dim;
    let mut m = Matrix::zeros(n);
    for s in 0..local_dim {
        m[(s * local_dim + s, s * local_dim + s)] = T::from_real(-j);
    }
    ChainModel::new(m, local_dim, beta)
}
