//! Translation-invariant chains `(d, h, beta)` and their finite-interval
//! Hamiltonians.

use faer::Mat;
use num_traits::One;

use crate::budget::{dim_or_err, MemoryBudget};
use crate::error::{invalid, Result};
use crate::linalg::{HermitianOperator, Matrix, SiteInterval};
use crate::scalar::{RealScalar, Scalar};

/// Nearest-neighbour chain with local dimension `d`, two-site term `h` and
/// inverse temperature `beta`.
///
/// `spins_per_site` is 1 unless the model was produced by [`block_sites`], in
/// which case every site of this chain stands for that many original sites.
#[derive(Debug, Clone)]
pub struct ChainModel<T: Scalar> {
    local_dim: usize,
    h: HermitianOperator<T>,
    beta: T::Re,
    h_norm: T::Re,
    spins_per_site: usize,
}

impl<T: Scalar> ChainModel<T> {
    /// `h` is a `d^2 x d^2` Hermitian matrix on sites `(0, 1)`.
    pub fn new(h: Matrix<T>, local_dim: usize, beta: T::Re) -> Result<Self> {
        if local_dim < 2 {
            return Err(invalid(format!("local dimension must be at least 2, got {local_dim}")));
        }
        let h = HermitianOperator::new(h, SiteInterval::new(0, 1)?, local_dim)?;
        Self::from_operator(h, beta)
    }

    pub fn from_operator(h: HermitianOperator<T>, beta: T::Re) -> Result<Self> {
        if h.n_sites() != 2 {
            return Err(invalid(format!(
                "the local term must act on two sites, got {}",
                h.n_sites()
            )));
        }
        if h.local_dim() < 2 {
            return Err(invalid("local dimension must be at least 2"));
        }
        check_beta(beta)?;
        let h_norm = h.norm()?;
        let local_dim = h.local_dim();
        let h = HermitianOperator::from_parts_unchecked(h.into_matrix(), SiteInterval::new(0, 1)?, local_dim);
        Ok(Self {
            local_dim,
            h,
            beta,
            h_norm,
            spins_per_site: 1,
        })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn h(&self) -> &HermitianOperator<T> {
        &self.h
    }

    pub fn beta(&self) -> T::Re {
        self.beta
    }

    /// Cached operator norm of `h`.
    pub fn h_norm(&self) -> T::Re {
        self.h_norm
    }

    pub fn spins_per_site(&self) -> usize {
        self.spins_per_site
    }

    /// Same interaction at another inverse temperature.
    pub fn with_beta(&self, beta: T::Re) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta, ..self.clone() })
    }

    /// Same model with `h` replaced by `h + s * p`.
    pub fn perturbed(&self, p: &Matrix<T>, s: T::Re) -> Result<Self> {
        self.h.matrix().check_same_dim(p)?;
        let m = self.h.matrix() + &p.scaled_real(s);
        let mut out = Self::new(m, self.local_dim, self.beta)?;
        out.spins_per_site = self.spins_per_site;
        Ok(out)
    }

    /// `(d, beta * h, 1)`. Free energies of the result must be divided by the
    /// original `beta`.
    pub fn rescale_to_unit_beta(&self) -> Self {
        if self.beta == T::Re::one() {
            return self.clone();
        }
        Self {
            local_dim: self.local_dim,
            h: self.h.scaled(self.beta),
            beta: T::Re::one(),
            h_norm: self.h_norm * self.beta,
            spins_per_site: self.spins_per_site,
        }
    }

    /// `H_[a,b] = sum_{i=a}^{b-1} h_{i,i+1}` on sites `a..=b` (0-based, `b > a`).
    pub fn build_interval_hamiltonian(&self, a: usize, b: usize) -> Result<HermitianOperator<T>> {
        if b <= a {
            return Err(invalid(format!("interval [{a}, {b}] must contain at least two sites")));
        }
        let m = self.chain_hamiltonian(b - a + 1)?;
        Ok(HermitianOperator::from_parts_unchecked(
            m,
            SiteInterval::new(a, b)?,
            self.local_dim,
        ))
    }

    /// Matrix of `H_[1,n]` on `n >= 1` sites (zero for a single site).
    pub fn chain_hamiltonian(&self, n: usize) -> Result<Matrix<T>> {
        if n == 0 {
            return Err(invalid("chain must have at least one site"));
        }
        let d = self.local_dim;
        let dim = dim_or_err(d, n, "interval Hamiltonian")?;
        MemoryBudget::from_env().require_matrices("interval Hamiltonian", dim as u128, 1, std::mem::size_of::<T>())?;
        let mut out = Mat::<T>::zeros(dim, dim);
        let h = self.h.matrix();
        for i in 0..n.saturating_sub(1) {
            let left = d.pow(i as u32);
            let right = d.pow((n - 2 - i) as u32);
            add_embedded(&mut out, h, left, right);
        }
        Ok(Matrix::from_faer_unchecked(out))
    }
}

fn check_beta<R: RealScalar>(beta: R) -> Result<()> {
    if !(beta > R::zero()) || !beta.is_finite() {
        return Err(invalid(format!(
            "inverse temperature must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

/// `out += I_left (x) op (x) I_right`.
pub(crate) fn add_embedded<T: Scalar>(out: &mut Mat<T>, op: &Matrix<T>, left: usize, right: usize) {
    let k = op.dim();
    for l in 0..left {
        for j in 0..k {
            for i in 0..k {
                let v = op[(i, j)];
                if v == T::zero() {
                    continue;
                }
                let (r0, c0) = ((l * k + i) * right, (l * k + j) * right);
                for r in 0..right {
                    out[(r0 + r, c0 + r)] += v;
                }
            }
        }
    }
}

/// Blocks an `r/2`-periodic nearest-neighbour chain into a translation-invariant
/// chain on cells of `r/2` sites.
///
/// `bond_terms[j]` is the two-site term on the bond `(j, j+1)` of one period,
/// for `j = 0..r/2`; the last one couples a cell to the next. The blocked
/// two-cell term collects every intra-cell bond of the left cell plus the
/// crossing bond, so the blocked `H` on `n` cells equals the original `H` on
/// `n*r/2` sites minus the intra-cell bonds of the last cell.
pub fn block_sites<T: Scalar>(
    bond_terms: &[HermitianOperator<T>],
    cell_size: usize,
    beta: T::Re,
) -> Result<ChainModel<T>> {
    if cell_size < 2 || !cell_size.is_multiple_of(2) {
        return Err(invalid(format!(
            "cell size must be even and at least 2, got {cell_size}"
        )));
    }
    let p = cell_size / 2;
    if bond_terms.len() != p {
        return Err(invalid(format!(
            "a cell of size {cell_size} needs {p} bond terms, got {}",
            bond_terms.len()
        )));
    }
    let d = bond_terms[0].local_dim();
    for t in bond_terms {
        if t.n_sites() != 2 || t.local_dim() != d {
            return Err(invalid(
                "bond terms must all be two-site operators with the same local dimension",
            ));
        }
    }
    let dim = dim_or_err(d, 2 * p, "blocked term")?;
    let mut out = Mat::<T>::zeros(dim, dim);
    for (j, t) in bond_terms.iter().enumerate() {
        add_embedded(&mut out, t.matrix(), d.pow(j as u32), d.pow((2 * p - 2 - j) as u32));
    }
    let mut model = ChainModel::new(Matrix::from_faer_unchecked(out), d.pow(p as u32), beta)?;
    model.spins_per_site = p;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{embed, kron_all};
    use crate::models;
    use num_complex::Complex64 as C;

    fn pauli() -> (Matrix<C>, Matrix<C>) {
        let z = C::new(0.0, 0.0);
        let x = Matrix::from_rows(&[vec![z, C::new(1.0, 0.0)], vec![C::new(1.0, 0.0), z]]).unwrap();
        let y = Matrix::from_rows(&[vec![z, C::new(0.0, -1.0)], vec![C::new(0.0, 1.0), z]]).unwrap();
        (x, y)
    }

    #[test]
    fn zero_model_gives_zero_hamiltonian() {
        let m = models::zero::<f64>(3, 1.0).unwrap();
        let h = m.build_interval_hamiltonian(0, 2).unwrap();
        assert_eq!(h.matrix(), &Matrix::zeros(27));
    }

    #[test]
    fn ising_interval_is_classical_sum() {
        let m = models::ising::<f64>(1.0, 1.0).unwrap();
        let h = m.build_interval_hamiltonian(0, 2).unwrap();
        assert_eq!(h.matrix()[(0, 0)], -2.0);
        assert!(h.matrix().is_diagonal());
        // |up down up> has two broken bonds
        assert_eq!(h.matrix()[(0b010, 0b010)], 2.0);
    }

    #[test]
    fn translation_covariance() {
        let m = models::xy::<f64>(1.0, 1.0).unwrap();
        let a = m.build_interval_hamiltonian(0, 3).unwrap();
        let b = m.build_interval_hamiltonian(5, 8).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(b.support(), SiteInterval::new(5, 8).unwrap());
        assert!(m.build_interval_hamiltonian(3, 3).is_err());
    }

    #[test]
    fn rescaling() {
        let m = models::ising::<f64>(1.0, 2.0).unwrap();
        let r = m.rescale_to_unit_beta();
        assert_eq!(r.beta(), 1.0);
        assert_eq!(r.h().matrix()[(0, 0)], -2.0);
        assert_eq!(r.h_norm(), 2.0);
        let same = models::ising::<f64>(1.0, 1.0).unwrap().rescale_to_unit_beta();
        assert_eq!(same.h().matrix()[(0, 0)], -1.0);
    }

    #[test]
    fn beta_must_be_positive() {
        assert!(models::ising::<f64>(1.0, 0.0).is_err());
        assert!(models::ising::<f64>(1.0, f64::INFINITY).is_err());
        assert!(models::ising::<f64>(1.0, -1.0).is_err());
    }

    #[test]
    fn blocked_xy_term_matches_explicit_form() {
        let gamma = 2.0;
        let (x, y) = pauli();
        let i2 = Matrix::<C>::identity(2);
        let xxyy = &kron_all(&[&x, &x]).unwrap() + &kron_all(&[&y, &y]).unwrap();
        let first = kron_all(&[&xxyy, &i2, &i2]).unwrap();
        let second = kron_all(&[&i2, &xxyy, &i2]).unwrap().scaled_real(gamma);
        let expected = (&first + &second).scaled_real(-0.25);
        let blocked = models::xy::<C>(gamma, 1.0).unwrap();
        assert!((blocked.h().matrix() - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn blocked_matches_unblocked_up_to_last_cell() {
        let gamma = 2.0;
        let blocked = models::xy::<f64>(gamma, 1.0).unwrap();
        let hb = blocked.build_interval_hamiltonian(0, 1).unwrap();
        // unblocked H_[1,4] with bonds 1, gamma, 1
        let bond = models::xy_bond::<f64>();
        let mut direct = embed(&bond, 1, 4).unwrap();
        direct = &direct + &embed(&bond.scaled_real(gamma), 2, 2).unwrap();
        let last_intra = embed(&bond, 4, 1).unwrap();
        let full = &direct + &last_intra;
        assert_eq!(hb.matrix(), &direct);
        assert_eq!(&(hb.matrix() + &last_intra), &full);
    }

    #[test]
    fn blocking_zero_and_bad_cells() {
        let z = HermitianOperator::new(Matrix::<f64>::zeros(9), SiteInterval::new(0, 1).unwrap(), 3).unwrap();
        let b = block_sites(&[z.clone(), z.clone()], 4, 1.0).unwrap();
        assert_eq!(b.local_dim(), 9);
        assert_eq!(b.h().matrix(), &Matrix::zeros(81));
        assert!(block_sites(std::slice::from_ref(&z), 3, 1.0).is_err());
        assert!(block_sites(&[z], 4, 1.0).is_err());
    }

    #[test]
    fn interval_norm_bound() {
        let m = models::xy::<f64>(1.0, 1.0).unwrap();
        let h = m.build_interval_hamiltonian(0, 4).unwrap();
        assert!(h.norm().unwrap() <= 4.0 * m.h_norm() + 1e-12);
    }
}
