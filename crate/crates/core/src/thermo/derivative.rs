use crate::chain::ChainModel;
use crate::error::{invalid, Result};
use crate::linalg::{hermitian_norm, Matrix};
use crate::scalar::{RealScalar, Scalar};
use crate::thermo::free_energy;
use crate::transfer::SolverOptions;

/// Default bound on `|d^2 f / ds^2|` along `h + s P`.
pub const DEFAULT_SECOND_DERIVATIVE_BOUND: f64 = 10.0;

/// Result of [`expectation_by_derivative`].
#[derive(Clone, Debug)]
pub struct DerivativeEstimate {
    /// Forward difference `(f(s) - f(0)) / s`.
    pub value: f64,
    /// Step `s` actually used.
    pub step: f64,
    /// Free-energy accuracy the step was balanced against.
    pub free_energy_tol: f64,
    pub converged: bool,
    pub wall_time_s: f64,
}

/// Thermal expectation of a two-site observable `p` on one bond, as the
/// derivative of the free energy along `h + s p`.
///
/// The total error of the forward difference is bounded by
/// `s M2 / 2 + 2 delta / s`; with the step `s = min(1, sqrt(2 delta / M2))`
/// this is at most `2.13 sqrt(delta M2)`. The solver tolerance `delta` is
/// chosen so that this bound meets `epsilon`, and is raised to the solver's
/// own roundoff floor when that is larger. `M2` defaults to
/// [`DEFAULT_SECOND_DERIVATIVE_BOUND`].
pub fn expectation_by_derivative<T: Scalar>(
    model: &ChainModel<T>,
    p: &Matrix<T>,
    epsilon: f64,
    window: usize,
    second_derivative_bound: Option<f64>,
) -> Result<DerivativeEstimate> {
    let start = std::time::Instant::now();
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid(format!("target error must be positive, got {epsilon}")));
    }
    let m2 = second_derivative_bound.unwrap_or(DEFAULT_SECOND_DERIVATIVE_BOUND);
    if !(m2 > 0.0) || !m2.is_finite() {
        return Err(invalid(format!("second-derivative bound must be positive, got {m2}")));
    }
    model.h().matrix().check_same_dim(p)?;
    let norm = hermitian_norm(&p.clone().hermitized())?.to_f64();
    if norm > 1.0 + 1e-12 {
        return Err(invalid(format!("observable norm {norm} exceeds 1; rescale it first")));
    }

    let requested = epsilon * epsilon / (4.5 * m2);
    let opts = SolverOptions::with_tol(requested);
    let f0 = free_energy(model, window, &opts)?;
    let delta = requested.max(f0.spectral.residual_tol);
    let step = (2.0 * delta / m2).sqrt().min(1.0);
    let shifted = model.perturbed(p, T::Re::lit(step))?;
    let f1 = free_energy(&shifted, window, &opts)?;
    Ok(DerivativeEstimate {
        value: (f1.value - f0.value) / step,
        step,
        free_energy_tol: delta,
        converged: f0.spectral.converged && f1.spectral.converged,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
