use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::scalar::{RealScalar, Scalar};
use crate::transfer::spectrum_by_modulus;

/// Free energy per site of a classical chain from its `d x d` transfer matrix
/// `T[s, s'] = exp(-beta h(ss', ss'))`.
///
/// `h` must be diagonal in the computational basis of `C^d (x) C^d`.
pub fn classical_transfer_free_energy<T: Scalar>(h: &Matrix<T>, local_dim: usize, beta: f64) -> Result<f64> {
    if h.dim() != local_dim * local_dim {
        return Err(invalid(format!(
            "two-site term has dimension {}, expected {}",
            h.dim(),
            local_dim * local_dim
        )));
    }
    if !h.is_diagonal() {
        return Err(invalid("classical transfer matrix needs a diagonal two-site term"));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(format!(
            "inverse temperature must be positive and finite, got {beta}"
        )));
    }
    let e = h.diagonal();
    if let Some(z) = e.iter().find(|z| z.im().to_f64() != 0.0) {
        return Err(invalid(format!("diagonal entry {z:?} is not real")));
    }
    let energies: Vec<f64> = e.iter().map(|z| z.re().to_f64()).collect();
    // shift for overflow safety at large beta
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let t = Matrix::<f64>::from_fn(local_dim, |s, t| (-beta * (energies[s * local_dim + t] - e_min)).exp());
    let lambda = spectrum_by_modulus(&t)?[0].norm();
    Ok(-(lambda.ln() - beta * e_min) / beta)
}
