//! Partial traces and site permutations on `(C^d)^{(x) n}`.
//!
//! Sites are numbered from 0, left to right, site 0 being the slowest index.

use crate::error::{invalid, Error, Result};
use crate::linalg::matrix::{site_dim, Matrix};
use crate::scalar::Scalar;

fn check_layout<T: Scalar>(x: &Matrix<T>, local_dim: usize, n_sites: usize) -> Result<()> {
    if local_dim < 1 {
        return Err(invalid("local dimension must be positive"));
    }
    let expected = site_dim(local_dim, n_sites)?;
    if x.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.dim(),
        });
    }
    Ok(())
}

/// Flat offsets contributed by every assignment of the given sites, in the
/// order that enumerates them with the first listed site slowest.
fn offsets(local_dim: usize, n_sites: usize, sites: &[usize]) -> Vec<usize> {
    let strides: Vec<usize> = sites.iter().map(|&s| local_dim.pow((n_sites - 1 - s) as u32)).collect();
    let mut out = vec![0usize];
    for &stride in &strides {
        let mut next = Vec::with_capacity(out.len() * local_dim);
        for &base in &out {
            for v in 0..local_dim {
                next.push(base + v * stride);
            }
        }
        out = next;
    }
    out
}

fn validate_sites(sites: &[usize], n_sites: usize) -> Result<Vec<bool>> {
    let mut mask = vec![false; n_sites];
    for &s in sites {
        if s >= n_sites {
            return Err(invalid(format!("site {s} out of range for a {n_sites}-site operator")));
        }
        if mask[s] {
            return Err(invalid(format!("site {s} listed twice")));
        }
        mask[s] = true;
    }
    Ok(mask)
}

/// Traces out `traced` from an operator on `n_sites` sites of dimension
/// `local_dim`. The remaining sites keep their relative order.
pub fn partial_trace<T: Scalar>(
    x: &Matrix<T>,
    local_dim: usize,
    n_sites: usize,
    traced: &[usize],
) -> Result<Matrix<T>> {
    check_layout(x, local_dim, n_sites)?;
    let mask = validate_sites(traced, n_sites)?;
    let kept: Vec<usize> = (0..n_sites).filter(|&s| !mask[s]).collect();
    let mut traced_sorted: Vec<usize> = traced.to_vec();
    traced_sorted.sort_unstable();
    Ok(contract(x, local_dim, n_sites, &kept, &traced_sorted))
}

/// Keeps only `keep` (in the given order) and traces out everything else.
pub fn reduce_to<T: Scalar>(x: &Matrix<T>, local_dim: usize, n_sites: usize, keep: &[usize]) -> Result<Matrix<T>> {
    check_layout(x, local_dim, n_sites)?;
    let mask = validate_sites(keep, n_sites)?;
    let traced: Vec<usize> = (0..n_sites).filter(|&s| !mask[s]).collect();
    Ok(contract(x, local_dim, n_sites, keep, &traced))
}

fn contract<T: Scalar>(x: &Matrix<T>, local_dim: usize, n_sites: usize, kept: &[usize], traced: &[usize]) -> Matrix<T> {
    let ko = offsets(local_dim, n_sites, kept);
    let to = offsets(local_dim, n_sites, traced);
    let src = x.as_faer();
    Matrix::from_fn(ko.len(), |a, b| {
        let (ra, cb) = (ko[a], ko[b]);
        to.iter().map(|&t| src[(ra + t, cb + t)]).sum()
    })
}

/// Reorders tensor factors: site `i` of the result is site `order[i]` of `x`.
pub fn permute_sites<T: Scalar>(x: &Matrix<T>, local_dim: usize, n_sites: usize, order: &[usize]) -> Result<Matrix<T>> {
    check_layout(x, local_dim, n_sites)?;
    if order.len() != n_sites {
        return Err(invalid(format!(
            "permutation has {} entries for {n_sites} sites",
            order.len()
        )));
    }
    validate_sites(order, n_sites)?;
    let map = offsets(local_dim, n_sites, order);
    let src = x.as_faer();
    Ok(Matrix::from_fn(x.dim(), |i, j| src[(map[i], map[j])]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::kron;
    use num_complex::Complex64 as C;

    fn sample(n: usize, seed: f64) -> Matrix<C> {
        Matrix::from_fn(n, |i, j| {
            C::new(
                (seed + i as f64 * 1.3 - j as f64).sin(),
                (seed * j as f64 + 0.2 * i as f64).cos(),
            )
        })
    }

    #[test]
    fn product_state_factorizes() {
        let a = sample(2, 0.4);
        let b = sample(2, 1.1);
        let ab = kron(&a, &b).unwrap();
        let r = partial_trace(&ab, 2, 2, &[1]).unwrap();
        assert!((&r - &a.scaled(b.trace())).max_abs() < 1e-14);
        let l = partial_trace(&ab, 2, 2, &[0]).unwrap();
        assert!((&l - &b.scaled(a.trace())).max_abs() < 1e-14);
    }

    #[test]
    fn identity_and_bell_examples() {
        let r = partial_trace(&Matrix::<f64>::identity(4), 2, 2, &[0]).unwrap();
        assert_eq!(r, Matrix::identity(2).scaled(2.0));
        let mut bell = Matrix::<f64>::zeros(4);
        for &i in &[0, 3] {
            for &j in &[0, 3] {
                bell[(i, j)] = 0.5;
            }
        }
        let r = partial_trace(&bell, 2, 2, &[1]).unwrap();
        assert_eq!(r, Matrix::identity(2).scaled(0.5));
    }

    #[test]
    fn invalid_sites_are_rejected() {
        let x = Matrix::<f64>::identity(8);
        assert!(partial_trace(&x, 2, 3, &[3]).is_err());
        assert!(partial_trace(&x, 2, 3, &[1, 1]).is_err());
        assert!(partial_trace(&x, 2, 2, &[0]).is_err());
    }

    #[test]
    fn tracing_everything_gives_trace() {
        let x = sample(8, 0.7);
        let r = partial_trace(&x, 2, 3, &[2, 0, 1]).unwrap();
        assert_eq!(r.dim(), 1);
        assert!((r[(0, 0)] - x.trace()).norm() < 1e-13);
    }

    #[test]
    fn permutation_swaps_kron_factors() {
        let a = sample(2, 0.1);
        let b = sample(2, 2.3);
        let c = sample(2, -1.0);
        let abc = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let cab = kron(&kron(&c, &a).unwrap(), &b).unwrap();
        assert!((&permute_sites(&abc, 2, 3, &[2, 0, 1]).unwrap() - &cab).max_abs() < 1e-15);
        assert!(permute_sites(&abc, 2, 3, &[0, 0, 1]).is_err());
    }

    #[test]
    fn reduce_to_respects_order() {
        let a = sample(2, 0.1);
        let b = sample(2, 2.3);
        let c = Matrix::<C>::identity(2);
        let abc = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let ba = kron(&b, &a).unwrap().scaled_real(2.0);
        assert!((&reduce_to(&abc, 2, 3, &[1, 0]).unwrap() - &ba).max_abs() < 1e-13);
    }
}
