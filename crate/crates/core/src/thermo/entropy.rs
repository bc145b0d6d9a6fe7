use crate::error::{invalid, Result};
use crate::linalg::DensityMatrix;
use crate::scalar::{RealScalar, Scalar};

/// Eigenvalues below this count as zero in entropies.
pub const ENTROPY_CLIP: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// Von Neumann entropy `-sum lambda log lambda`.
pub fn entropy<T: Scalar>(rho: &DensityMatrix<T>, base: LogBase) -> Result<f64> {
    let s: f64 = rho
        .eigenvalues()?
        .into_iter()
        .map(|l| l.to_f64())
        .filter(|&l| l >= ENTROPY_CLIP)
        .map(|l| -l * l.ln())
        .sum();
    Ok(match base {
        LogBase::Natural => s,
        LogBase::Two => s / std::f64::consts::LN_2,
    }
    .max(0.0))
}

fn check_groups(n_sites: usize, groups: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; n_sites];
    for g in groups {
        for &s in *g {
            if s >= n_sites {
                return Err(invalid(format!("site {s} out of range for {n_sites} sites")));
            }
            if seen[s] {
                return Err(invalid(format!("site {s} appears in more than one group")));
            }
            seen[s] = true;
        }
    }
    Ok(())
}

fn entropy_of<T: Scalar>(rho: &DensityMatrix<T>, sites: &[usize], base: LogBase) -> Result<f64> {
    if sites.is_empty() {
        return Ok(0.0);
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    if sorted.len() == rho.n_sites() {
        return entropy(rho, base);
    }
    entropy(&rho.marginal(&sorted)?, base)
}

/// `I(A:B) = S(A) + S(B) - S(AB)` for disjoint nonempty site groups `a` and
/// `b` of `rho`; sites in neither group are traced out.
pub fn mutual_information<T: Scalar>(rho: &DensityMatrix<T>, a: &[usize], b: &[usize], base: LogBase) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("mutual information needs two nonempty groups"));
    }
    check_groups(rho.n_sites(), &[a, b])?;
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(entropy_of(rho, a, base)? + entropy_of(rho, b, base)? - entropy_of(rho, &ab, base)?)
}

/// `I(A:C|B) = S(AB) + S(BC) - S(ABC) - S(B)` for disjoint groups, `a` and
/// `c` nonempty; sites in no group are traced out.
pub fn conditional_mutual_information<T: Scalar>(
    rho: &DensityMatrix<T>,
    a: &[usize],
    b: &[usize],
    c: &[usize],
    base: LogBase,
) -> Result<f64> {
    if a.is_empty() || c.is_empty() {
        return Err(invalid("conditional mutual information needs nonempty A and C"));
    }
    check_groups(rho.n_sites(), &[a, b, c])?;
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    let abc: Vec<usize> = ab.iter().chain(c).copied().collect();
    Ok(entropy_of(rho, &ab, base)? + entropy_of(rho, &bc, base)?
        - entropy_of(rho, &abc, base)?
        - entropy_of(rho, b, base)?)
}
