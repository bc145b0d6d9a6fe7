//! Free energies, Gibbs marginals and derived thermodynamic quantities of
//! infinite translation-invariant chains.

mod derivative;
mod entropy;
mod two_sided;
mod window;

use std::time::Instant;

pub use derivative::{expectation_by_derivative, DerivativeEstimate, DEFAULT_SECOND_DERIVATIVE_BOUND};
pub use entropy::{conditional_mutual_information, entropy, mutual_information, LogBase, ENTROPY_CLIP};
pub use two_sided::{two_sided_energy, two_sided_marginal, two_sided_marginal_from, two_sided_model};
pub use window::{budget_window, choose_l, WindowRule, PRACTICAL_INTERCEPT, PRACTICAL_SLOPE};

use crate::chain::ChainModel;
use crate::error::{invalid, Result};
use crate::linalg::DensityMatrix;
use crate::scalar::{RealScalar, Scalar};
use crate::transfer::{SolverOptions, SpectralResult, TransferMap};

/// Approximation of the free energy per site from the transfer map on a
/// window of `window` sites.
#[derive(Clone, Debug)]
pub struct FreeEnergyEstimate<T: Scalar> {
    /// `-log(r_L) / beta`.
    pub value: f64,
    pub window: usize,
    pub beta: f64,
    pub spectral: SpectralResult<T>,
    pub wall_time_s: f64,
}

impl<T: Scalar> FreeEnergyEstimate<T> {
    /// `value` divided by the number of original spins per site of a blocked model.
    pub fn per_spin(&self, spins_per_site: usize) -> f64 {
        self.value / spins_per_site as f64
    }

    /// `beta * value`, the negative log-partition function per site.
    pub fn beta_f(&self) -> f64 {
        self.beta * self.value
    }
}

/// Free energy per site of `model` from the spectral radius of its transfer
/// map on `window` sites. Non-convergence of the solver is reported through
/// `spectral.converged`, not as an error.
pub fn free_energy<T: Scalar>(
    model: &ChainModel<T>,
    window: usize,
    opts: &SolverOptions,
) -> Result<FreeEnergyEstimate<T>> {
    let start = Instant::now();
    if window < 2 {
        return Err(invalid(format!("window size must be at least 2, got {window}")));
    }
    let beta = model.beta().to_f64();
    let map = TransferMap::new(model, window)?;
    let spectral = map.spectral_radius(opts)?;
    let value = -spectral.radius.to_f64().ln() / beta;
    let envelope = model.h_norm().to_f64() + (model.local_dim() as f64).ln() / beta;
    if value.abs() > envelope * (1.0 + 1e-12) {
        log::warn!("free energy {value} lies outside the variational envelope {envelope}");
    }
    Ok(FreeEnergyEstimate {
        value,
        window,
        beta,
        spectral,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Leading eigenvector of the transfer map on `window` sites, a state on the
/// first `window - 1` sites of the half-infinite chain.
pub fn leading_eigenvector<T: Scalar>(
    model: &ChainModel<T>,
    window: usize,
    opts: &SolverOptions,
) -> Result<SpectralResult<T>> {
    TransferMap::new(model, window)?.spectral_radius(opts)
}

/// Marginal on sites `0..k` of a leading eigenvector, re-Hermitized and
/// projected onto the PSD cone.
pub fn marginal_from<T: Scalar>(spectral: &SpectralResult<T>, k: usize) -> Result<DensityMatrix<T>> {
    let n = spectral.eigenvector.n_sites();
    if k == 0 || k > n {
        return Err(invalid(format!("marginal size {k} must lie in 1..={n}")));
    }
    let rho = spectral.eigenvector.leading_sites(k)?;
    let rho = DensityMatrix::normalized(rho.into_matrix(), spectral.eigenvector.local_dim(), k)?;
    Ok(rho.project_psd()?.0)
}

/// Approximate Gibbs marginal of the half-infinite chain on its first `k`
/// sites, `1 <= k < window`.
pub fn gibbs_marginal<T: Scalar>(
    model: &ChainModel<T>,
    window: usize,
    k: usize,
    opts: &SolverOptions,
) -> Result<DensityMatrix<T>> {
    check_marginal_size(window, k)?;
    let spectral = leading_eigenvector(model, window, opts)?;
    if !spectral.converged {
        log::warn!("marginal taken from an unconverged eigenvector (window {window})");
    }
    marginal_from(&spectral, k)
}

pub(crate) fn check_marginal_size(window: usize, k: usize) -> Result<()> {
    if window < 2 {
        return Err(invalid(format!("window size must be at least 2, got {window}")));
    }
    if k == 0 || k >= window {
        return Err(invalid(format!(
            "marginal size must satisfy 1 <= k < L, got k={k}, L={window}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DensityMatrix;
    use crate::models;

    #[test]
    fn zero_model_free_energy() {
        let chain = models::zero::<f64>(2, 1.0).unwrap();
        for l in 2..6 {
            let est = free_energy(&chain, l, &SolverOptions::default()).unwrap();
            assert!((est.value + 2f64.ln()).abs() < 1e-12);
            assert!(est.spectral.converged);
        }
    }

    #[test]
    fn ising_free_energy() {
        let chain = models::ising::<f64>(1.0, 1.0).unwrap();
        let est = free_energy(&chain, 4, &SolverOptions::default()).unwrap();
        assert!((est.value + (2.0 * 1f64.cosh()).ln()).abs() < 1e-10);
    }

    #[test]
    fn zero_model_marginal_is_maximally_mixed() {
        let chain = models::zero::<f64>(3, 0.5).unwrap();
        let rho = gibbs_marginal(&chain, 4, 2, &SolverOptions::default()).unwrap();
        let mixed = DensityMatrix::<f64>::maximally_mixed(3, 2).unwrap();
        assert!(rho.trace_distance(&mixed).unwrap() < 1e-12);
    }

    #[test]
    fn marginal_size_is_checked() {
        let chain = models::zero::<f64>(2, 1.0).unwrap();
        let opts = SolverOptions::default();
        assert!(gibbs_marginal(&chain, 4, 4, &opts).is_err());
        assert!(gibbs_marginal(&chain, 4, 0, &opts).is_err());
        assert!(free_energy(&chain, 1, &opts).is_err());
    }
}
