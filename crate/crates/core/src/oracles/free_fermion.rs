//! Free-fermion solution of the dimerized XY chain
//! `H = -sum_i J_i (Sx_i Sx_{i+1} + Sy_i Sy_{i+1})`, `J_i = 1, gamma, 1, gamma, ...`,
//! at unit inverse temperature with the coupling scaled by `beta`.
//!
//! A Jordan-Wigner transformation maps it to hopping fermions with amplitude
//! `beta J_i / 2`. The two bands of the infinite chain are
//! `+-|a + b e^{ik}|` with `a = beta/2`, `b = gamma beta/2`.

use faer::{Mat, Side};

use crate::error::{invalid, Error, Result};
use crate::models;
use crate::oracles::exact_diag::{exact_diag_free_energy, richardson_extrapolate};

/// Points of the periodic trapezoid rule.
pub const MOMENTUM_POINTS: usize = 10_000;

/// Disagreement between the momentum integral and extrapolated exact
/// diagonalization that makes [`xy_exact_cross_checked`] fail.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Compensated mean of `f(2 pi j / n)` over the periodic grid.
fn momentum_mean(f: impl Fn(f64) -> f64) -> f64 {
    let n = MOMENTUM_POINTS;
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for j in 0..n {
        let y = f(2.0 * std::f64::consts::PI * j as f64 / n as f64) - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum / n as f64
}

fn check_params(beta: f64, gamma: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must be finite and non-negative, got {beta}")));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be finite and non-negative, got {gamma}")));
    }
    Ok(())
}

/// `beta f` per spin of the infinite chain.
pub fn xy_exact(beta: f64, gamma: f64) -> Result<f64> {
    check_params(beta, gamma)?;
    let (a, b) = (beta / 2.0, gamma * beta / 2.0);
    let mean = momentum_mean(|k| {
        let w = (a * a + b * b + 2.0 * a * b * k.cos()).max(0.0).sqrt();
        log1pexp(w) + log1pexp(-w)
    });
    // two bands per two-spin cell
    Ok(-0.5 * mean)
}

/// Energy per bond `<-(SxSx + SySy)>` of the uniform (`gamma = 1`) chain.
pub fn xy_exact_energy(beta: f64) -> Result<f64> {
    check_params(beta, 1.0)?;
    // occupation of the mode with energy -cos k
    Ok(-momentum_mean(|k| k.cos() / (1.0 + (-beta * k.cos()).exp())))
}

/// `log Z` of the open chain of `n_spins` spins, from the single-particle
/// spectrum of the hopping matrix.
pub fn xy_open_chain_log_z(beta: f64, gamma: f64, n_spins: usize) -> Result<f64> {
    check_params(beta, gamma)?;
    if n_spins == 0 {
        return Err(invalid("chain must have at least one spin"));
    }
    let hop = Mat::<f64>::from_fn(n_spins, n_spins, |i, j| {
        if i + 1 == j || j + 1 == i {
            let bond = i.min(j);
            let coupling = if bond % 2 == 0 { 1.0 } else { gamma };
            -beta * coupling / 2.0
        } else {
            0.0
        }
    });
    let eps = hop
        .as_ref()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Backend(format!("hopping spectrum: {e:?}")))?;
    Ok(eps.into_iter().map(|e| log1pexp(-e)).sum())
}

/// [`xy_exact`] checked against exact diagonalization: the finite-chain
/// free energies are first compared with the open-chain fermion formula, then
/// extrapolated to infinite length. Fails if any check disagrees by more
/// than [`CROSS_CHECK_TOL`].
pub fn xy_exact_cross_checked(beta: f64, gamma: f64) -> Result<f64> {
    let integral = xy_exact(beta, gamma)?;
    if beta == 0.0 {
        return Ok(integral);
    }
    let uniform = gamma == 1.0;
    let chain = models::xy::<f64>(gamma, beta)?;
    // sizes in sites of `chain`; a blocked site holds two spins
    let sizes: [usize; 3] = if uniform { [10, 11, 12] } else { [4, 5, 6] };
    let mut points = Vec::with_capacity(3);
    for &n in &sizes {
        let ed = exact_diag_free_energy(&chain, n)?;
        let spins = n * chain.spins_per_site();
        // blocked chains miss the intra-cell bond of the last cell
        let ff_spins = if uniform { spins } else { spins - 1 };
        let ff = xy_open_chain_log_z(beta, gamma, ff_spins)?;
        let ff = if uniform { ff } else { ff + 2f64.ln() };
        if (ed.log_z - ff).abs() > CROSS_CHECK_TOL {
            return Err(Error::NumericalBreakdown(format!(
                "exact diagonalization log Z {} disagrees with the free-fermion value {ff} at N={n}",
                ed.log_z
            )));
        }
        points.push((n, beta * ed.f_per_site / chain.spins_per_site() as f64));
    }
    let extrapolated = richardson_extrapolate(&points)?;
    if (extrapolated - integral).abs() > CROSS_CHECK_TOL {
        return Err(Error::NumericalBreakdown(format!(
            "free-fermion beta*f = {integral} disagrees with extrapolated exact diagonalization {extrapolated}"
        )));
    }
    Ok(integral)
}
