//! Two-sided infinite chains through a one-sided chain on doubled sites.
//!
//! Site `i` of the doubled chain carries the pair `(i_u, i_d)` of original
//! sites, `i_u` being the slower tensor factor. The doubled chain folds the
//! two-sided chain at the bond `(1_u, 1_d)`: in chain order the original
//! sites read `..., 2_u, 1_u, 1_d, 2_d, ...`.

use crate::chain::ChainModel;
use crate::error::Result;
use crate::linalg::{embed, permute_sites, DensityMatrix, Matrix};
use crate::scalar::{RealScalar, Scalar};
use crate::thermo::{check_marginal_size, leading_eigenvector, marginal_from};
use crate::transfer::{SolverOptions, SpectralResult};

/// `h` acting with its first factor on `first` and its second on `second`,
/// inside four factors of dimension `d`.
fn placed<T: Scalar>(h: &Matrix<T>, d: usize, first: usize, second: usize) -> Result<Matrix<T>> {
    let base = embed(h, 1, d * d)?;
    let mut order = [0usize; 4];
    order[first] = 0;
    order[second] = 1;
    let mut spare = 2;
    for (pos, slot) in order.iter_mut().enumerate() {
        if pos != first && pos != second {
            *slot = spare;
            spare += 1;
        }
    }
    permute_sites(&base, d, 4, &order)
}

/// One-sided chain on sites of dimension `d^2` with
/// `h' = h_{2u,1u} + h_{1d,2d} + h_{1u,1d} - h_{2u,2d}`, factors ordered
/// `(1u, 1d, 2u, 2d)`.
pub fn two_sided_model<T: Scalar>(model: &ChainModel<T>) -> Result<ChainModel<T>> {
    let d = model.local_dim();
    let h = model.h().matrix();
    // factor positions
    let (u1, d1, u2, d2) = (0, 1, 2, 3);
    let mut hp = placed(h, d, u2, u1)?;
    hp = &hp + &placed(h, d, d1, d2)?;
    hp = &hp + &placed(h, d, u1, d1)?;
    hp = &hp - &placed(h, d, u2, d2)?;
    ChainModel::new(hp, d * d, model.beta())
}

/// Approximate marginal of the two-sided infinite chain on `2k` consecutive
/// sites, ordered `(k_u, ..., 1_u, 1_d, ..., k_d)`, from a window of
/// `window` doubled sites.
pub fn two_sided_marginal<T: Scalar>(
    model: &ChainModel<T>,
    window: usize,
    k: usize,
    opts: &SolverOptions,
) -> Result<DensityMatrix<T>> {
    check_marginal_size(window, k)?;
    let doubled = two_sided_model(model)?;
    let spectral = leading_eigenvector(&doubled, window, opts)?;
    if !spectral.converged {
        log::warn!("marginal taken from an unconverged eigenvector (window {window})");
    }
    two_sided_marginal_from(&spectral, model.local_dim(), k)
}

/// Two-sided marginal on `2k` sites from a leading eigenvector of the doubled
/// chain built by [`two_sided_model`]; `local_dim` is that of the original chain.
pub fn two_sided_marginal_from<T: Scalar>(
    spectral: &SpectralResult<T>,
    local_dim: usize,
    k: usize,
) -> Result<DensityMatrix<T>> {
    let rho = marginal_from(spectral, k)?;
    // (1u, 1d, 2u, 2d, ...) -> (ku, ..., 1u, 1d, ..., kd)
    let order: Vec<usize> = (0..2 * k)
        .map(|j| if j < k { 2 * (k - 1 - j) } else { 2 * (j - k) + 1 })
        .collect();
    rho.relabel(local_dim, 2 * k)?.permuted(&order)
}

/// `tr(h rho)` on one bond of the two-sided infinite chain.
pub fn two_sided_energy<T: Scalar>(model: &ChainModel<T>, window: usize, opts: &SolverOptions) -> Result<f64> {
    let rho = two_sided_marginal(model, window, 1, opts)?;
    Ok(rho.expectation(model.h().matrix())?.to_f64())
}
