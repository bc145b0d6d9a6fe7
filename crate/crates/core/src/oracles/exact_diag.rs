//! Exact diagonalization of open chains.
//!
//! `H_[1,N]` is split into the connected components of its graph in the
//! computational basis (for number-conserving models these are the
//! magnetization sectors), and each block is diagonalized densely. A generic
//! `h` gives a single block and the plain dense computation.

use faer::{Mat, Side};
use num_traits::Float;

use crate::budget::{dim_or_err, MemoryBudget};
use crate::chain::ChainModel;
use crate::error::{invalid, Error, Result};
use crate::linalg::{DensityMatrix, Matrix};
use crate::scalar::{RealScalar, Scalar};

/// Partition function of an open chain of `n_sites` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChainResult {
    pub n_sites: usize,
    pub beta: f64,
    /// `log tr exp(-beta H_[1,N])`.
    pub log_z: f64,
    /// `-log Z / (beta N)`.
    pub f_per_site: f64,
}

struct Sectors {
    /// States of each block, ascending.
    blocks: Vec<Vec<usize>>,
    /// Position of every basis state inside its block.
    local_index: Vec<u32>,
}

struct Bond<T> {
    /// `(row, value)` pairs of column `c` of `h`, for every `c`.
    columns: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Bond<T> {
    fn new(h: &Matrix<T>) -> Self {
        let n = h.dim();
        let columns = (0..n)
            .map(|c| {
                (0..n)
                    .filter(|&r| h[(r, c)] != T::zero())
                    .map(|r| (r, h[(r, c)]))
                    .collect()
            })
            .collect();
        Self { columns }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Calls `f(target_state, value)` for every nonzero `<target| H |state>`.
fn for_each_entry<T: Scalar>(bond: &Bond<T>, d: usize, n_sites: usize, state: usize, mut f: impl FnMut(usize, T)) {
    for i in 0..n_sites - 1 {
        // bond (i, i+1); site 0 is the most significant digit
        let stride = d.pow((n_sites - 2 - i) as u32);
        let pair = (state / stride) % (d * d);
        let base = state - pair * stride;
        for &(r, v) in &bond.columns[pair] {
            f(base + r * stride, v);
        }
    }
}

fn sectors<T: Scalar>(bond: &Bond<T>, d: usize, n_sites: usize, dim: usize) -> Sectors {
    let mut parent: Vec<usize> = (0..dim).collect();
    for c in 0..dim {
        for_each_entry(bond, d, n_sites, c, |r, _| {
            if r != c {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        });
    }
    let mut block_of_root = vec![usize::MAX; dim];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut local_index = vec![0u32; dim];
    for (s, index) in local_index.iter_mut().enumerate() {
        let root = find(&mut parent, s);
        if block_of_root[root] == usize::MAX {
            block_of_root[root] = blocks.len();
            blocks.push(Vec::new());
        }
        let b = &mut blocks[block_of_root[root]];
        *index = b.len() as u32;
        b.push(s);
    }
    Sectors { blocks, local_index }
}

fn block_matrix<T: Scalar>(bond: &Bond<T>, d: usize, n_sites: usize, states: &[usize], local_index: &[u32]) -> Mat<T> {
    let k = states.len();
    let mut m = Mat::<T>::zeros(k, k);
    for (j, &c) in states.iter().enumerate() {
        for_each_entry(bond, d, n_sites, c, |r, v| {
            m[(local_index[r] as usize, j)] += v;
        });
    }
    m
}

struct Prepared<T: Scalar> {
    bond: Bond<T>,
    sectors: Sectors,
    d: usize,
    n_sites: usize,
    beta: T::Re,
}

fn prepare<T: Scalar>(model: &ChainModel<T>, n_sites: usize) -> Result<Prepared<T>> {
    if n_sites < 2 {
        return Err(invalid("exact diagonalization needs at least two sites"));
    }
    let d = model.local_dim();
    let dim = dim_or_err(d, n_sites, "exact diagonalization")?;
    let bond = Bond::new(model.h().matrix());
    let sectors = sectors(&bond, d, n_sites, dim);
    let largest = sectors.blocks.iter().map(Vec::len).max().unwrap_or(0);
    MemoryBudget::from_env().require_matrices(
        "exact diagonalization block",
        largest as u128,
        3,
        std::mem::size_of::<T>(),
    )?;
    log::debug!(
        "exact diagonalization: N={n_sites}, {} sectors, largest {largest}",
        sectors.blocks.len()
    );
    Ok(Prepared {
        bond,
        sectors,
        d,
        n_sites,
        beta: model.beta(),
    })
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `log Z` and the free energy per site of the open chain on `n_sites` sites.
pub fn exact_diag_free_energy<T: Scalar>(model: &ChainModel<T>, n_sites: usize) -> Result<FiniteChainResult> {
    let p = prepare(model, n_sites)?;
    let beta = p.beta.to_f64();
    let mut exponents = Vec::with_capacity(p.sectors.local_index.len());
    for states in &p.sectors.blocks {
        let m = block_matrix(&p.bond, p.d, p.n_sites, states, &p.sectors.local_index);
        let ev = m
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Backend(format!("block eigenvalues: {e:?}")))?;
        exponents.extend(ev.into_iter().map(|l| -beta * l.to_f64()));
    }
    let log_z = log_sum_exp(&exponents);
    if !log_z.is_finite() {
        return Err(Error::NumericalBreakdown(format!("log Z is {log_z}")));
    }
    Ok(FiniteChainResult {
        n_sites,
        beta,
        log_z,
        f_per_site: -log_z / (beta * n_sites as f64),
    })
}

/// `rho_{L,m}`: the normalized marginal of `exp(-beta H_[1,m])` on the first
/// `L - 1` sites.
pub fn gibbs_marginal_bruteforce<T: Scalar>(
    model: &ChainModel<T>,
    window: usize,
    m: usize,
) -> Result<DensityMatrix<T>> {
    if window < 2 || m <= window {
        return Err(invalid(format!("need m > L >= 2, got L={window}, m={m}")));
    }
    let p = prepare(model, m)?;
    let k = window - 1;
    let d = p.d;
    let kept_dim = dim_or_err(d, k, "marginal")?;
    let traced_dim = dim_or_err(d, m - k, "traced sites")?;

    let mut blocks = Vec::with_capacity(p.sectors.blocks.len());
    let mut global_min = T::Re::infinity();
    for states in &p.sectors.blocks {
        let hb = block_matrix(&p.bond, d, m, states, &p.sectors.local_index);
        let evd = hb
            .as_ref()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Backend(format!("block eigendecomposition: {e:?}")))?;
        let vals: Vec<T::Re> = (0..states.len()).map(|i| evd.S().column_vector()[i].re()).collect();
        global_min = vals.iter().copied().fold(global_min, Float::min);
        blocks.push((states, evd.U().to_owned(), vals));
    }

    let half = T::Re::lit(0.5);
    let mut rho = Mat::<T>::zeros(kept_dim, kept_dim);
    let mut by_traced: Vec<Vec<usize>> = vec![Vec::new(); traced_dim];
    for (states, u, vals) in blocks {
        let nb = states.len();
        // exp(-beta H) restricted to the block is G G^dagger
        let g = Mat::<T>::from_fn(nb, nb, |i, j| {
            u[(i, j)].scale((-(p.beta * (vals[j] - global_min)) * half).exp())
        });
        for list in by_traced.iter_mut() {
            list.clear();
        }
        for (i, &s) in states.iter().enumerate() {
            by_traced[s % traced_dim].push(i);
        }
        for rows in by_traced.iter().filter(|r| !r.is_empty()) {
            for &i in rows {
                let a = states[i] / traced_dim;
                for &j in rows {
                    let b = states[j] / traced_dim;
                    let mut acc = T::zero();
                    for c in 0..nb {
                        acc += g[(i, c)] * g[(j, c)].conj();
                    }
                    rho[(a, b)] += acc;
                }
            }
        }
    }
    DensityMatrix::normalized(Matrix::from_faer_unchecked(rho), d, k)
}

/// Extrapolates `f(N)` to `N -> infinity` assuming a polynomial in `1/N` of
/// degree `points.len() - 1` (Neville's scheme evaluated at `1/N = 0`).
pub fn richardson_extrapolate(points: &[(usize, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("no points to extrapolate"));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| 1.0 / n as f64).collect();
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(invalid("sizes must be positive"));
    }
    for i in 0..xs.len() {
        for j in 0..i {
            if xs[i] == xs[j] {
                return Err(invalid("extrapolation sizes must be distinct"));
            }
        }
    }
    let mut p: Vec<f64> = points.iter().map(|&(_, f)| f).collect();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    Ok(p[0])
}

/// Order-2 extrapolation from the three largest sizes given.
pub fn extrapolated_free_energy<T: Scalar>(model: &ChainModel<T>, sizes: [usize; 3]) -> Result<f64> {
    let pts = sizes
        .iter()
        .map(|&n| exact_diag_free_energy(model, n).map(|r| (n, r.f_per_site)))
        .collect::<Result<Vec<_>>>()?;
    richardson_extrapolate(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::herm_expm;
    use crate::linalg::partial_trace;
    use crate::models;

    #[test]
    fn zero_model() {
        let chain = models::zero::<f64>(3, 2.0).unwrap();
        let r = exact_diag_free_energy(&chain, 4).unwrap();
        assert!((r.f_per_site + 3f64.ln() / 2.0).abs() < 1e-14);
        let rho = gibbs_marginal_bruteforce(&chain, 3, 5).unwrap();
        assert!((rho.matrix() - &Matrix::identity(9).scaled(1.0 / 9.0)).max_abs() < 1e-15);
    }

    #[test]
    fn ising_five_sites_closed_form() {
        let chain = models::ising::<f64>(1.0, 1.0).unwrap();
        let r = exact_diag_free_energy(&chain, 5).unwrap();
        let z = 2.0 * (2.0 * 1f64.cosh()).powi(4);
        assert!((r.log_z - z.ln()).abs() < 1e-13);
    }

    #[test]
    fn sectors_match_dense_diagonalization() {
        let chain = models::xy::<f64>(1.0, 0.7).unwrap();
        let n = 6;
        let r = exact_diag_free_energy(&chain, n).unwrap();
        let h = chain.chain_hamiltonian(n).unwrap();
        let rho = herm_expm(&h, -0.7).unwrap();
        assert!((r.log_z - rho.trace().ln()).abs() < 1e-12);
        let marg = gibbs_marginal_bruteforce(&chain, 3, n).unwrap();
        let direct = partial_trace(&rho, 2, n, &[2, 3, 4, 5]).unwrap();
        let direct = direct.scaled(1.0 / direct.trace());
        assert!((marg.matrix() - &direct).max_abs() < 1e-14);
    }

    #[test]
    fn richardson_is_exact_on_quadratics() {
        let f = |n: usize| 1.5 + 2.0 / n as f64 - 3.0 / (n * n) as f64;
        let pts: Vec<_> = [4, 5, 7].iter().map(|&n| (n, f(n))).collect();
        assert!((richardson_extrapolate(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert!(richardson_extrapolate(&[(3, 1.0), (3, 2.0)]).is_err());
    }
}
