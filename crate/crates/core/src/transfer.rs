//! The transfer map `L*(Q) = tr_L(E (1 (x) Q) E^dagger)` on operators over
//! `L - 1` sites, its adjoint `L(X) = tr_1(E^dagger (X (x) 1) E)`, and the
//! power iteration for its spectral radius.
//!
//! Writing row indices of `E` as `(x, s)` with `s` the last site and column
//! indices as `(b, y)` with `b` the first site, the map has the Kraus form
//! `L*(Q) = sum_{s,b} K_{sb} Q K_{sb}^dagger` with `K_{sb}[x, y] = E[(x,s), (b,y)]`.

use std::time::Instant;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef};
use num_complex::Complex;
use num_traits::{Float, One, Zero};

use crate::budget::{dim_or_err, MemoryBudget};
use crate::chain::ChainModel;
use crate::error::{invalid, Error, Result};
use crate::linalg::eigen::relative_spectrum_bounds;
use crate::linalg::{trace_norm, DensityMatrix, HermitianEigen, Matrix};
use crate::scalar::{RealScalar, Scalar};

/// How the map is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferMode {
    /// Kraus blocks of `E`, `2 d^2 m^3` flops per application.
    #[default]
    MatrixFree,
    /// Explicit `m^2 x m^2` matrix acting on column-stacked operators.
    DenseSuperoperator,
}

/// Power iteration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stopping tolerance; `None` picks the default for the scalar precision
    /// (`1e-12` in double precision).
    pub tol: Option<f64>,
    /// Iteration cap; `None` means `ceil(100 L ln d)`.
    pub max_iter: Option<usize>,
    /// Keep per-iteration residuals and Hilbert gaps.
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: None,
            record_history: true,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol: Some(tol),
            ..Self::default()
        }
    }
}

/// Outcome of [`TransferMap::spectral_radius`].
#[derive(Debug, Clone)]
pub struct SpectralResult<T: Scalar> {
    /// Estimate of `r_L`, the trace of `L*(x)` for the last normalized iterate.
    pub radius: T::Re,
    /// Leading eigenvector, Hermitized and trace-normalized, on `L - 1` sites.
    pub eigenvector: DensityMatrix<T>,
    pub iterations: usize,
    /// `||L*(x) - r x||_1` at the last iterate.
    pub residual: T::Re,
    /// Hilbert metric distance between the last two iterates; infinite when
    /// an iterate is not strictly positive.
    pub hilbert_gap: T::Re,
    pub converged: bool,
    /// Requested tolerance.
    pub tol: f64,
    /// Tolerances actually applied after raising them to the roundoff floor
    /// of the current iterate.
    pub residual_tol: f64,
    pub gap_tol: f64,
    /// Per-iteration `(residual / r, hilbert_gap)`, if recorded.
    pub history: Vec<(f64, f64)>,
    pub wall_time_s: f64,
}

/// `L*` and `L` for one chain and window size.
#[derive(Debug, Clone)]
pub struct TransferMap<T: Scalar> {
    model: ChainModel<T>,
    window: usize,
    e: Matrix<T>,
    mode: TransferMode,
    superop: Option<Matrix<T>>,
    sigma_min_bound: T::Re,
}

/// Builds the transfer map of `model` (rescaled to unit `beta`) on `window` sites.
pub fn build_e<T: Scalar>(model: &ChainModel<T>, window: usize) -> Result<TransferMap<T>> {
    TransferMap::new(model, window)
}

impl<T: Scalar> TransferMap<T> {
    pub fn new(model: &ChainModel<T>, window: usize) -> Result<Self> {
        Self::with_mode(model, window, TransferMode::MatrixFree)
    }

    /// `E = exp(-H_[1,L]/2) exp(H_[2,L]/2)` from two Hermitian
    /// eigendecompositions, with `H_[2,L] = 1 (x) H_[1,L-1]`.
    pub fn with_mode(model: &ChainModel<T>, window: usize, mode: TransferMode) -> Result<Self> {
        if window < 2 {
            return Err(invalid(format!("window size must be at least 2, got {window}")));
        }
        let model = model.rescale_to_unit_beta();
        let d = model.local_dim();
        let n = dim_or_err(d, window, "transfer window")?;
        let m = n / d;
        let elem = std::mem::size_of::<T>();
        let budget = MemoryBudget::from_env();
        budget.require_matrices("transfer operator E", n as u128, 4, elem)?;
        if mode == TransferMode::DenseSuperoperator {
            budget.require_matrices("dense superoperator", (m as u128) * (m as u128), 1, elem)?;
        }

        let t0 = Instant::now();
        let h_full = model.chain_hamiltonian(window)?;
        let eig_full = HermitianEigen::new_unchecked(&h_full)?;
        drop(h_full);
        let h_tail = model.chain_hamiltonian(window - 1)?;
        let eig_tail = HermitianEigen::new_unchecked(&h_tail)?;
        drop(h_tail);
        let half = T::Re::lit(0.5);
        let left = eig_full.exp(-half);
        let right = eig_tail.exp(half);
        // E = left * (1_d (x) right), one column block per value of the first site
        let mut e = Mat::<T>::zeros(n, n);
        for b in 0..d {
            matmul(
                e.as_mut().subcols_mut(b * m, m),
                Accum::Replace,
                left.as_faer().subcols(b * m, m),
                right.as_faer(),
                T::one(),
                faer::get_global_parallelism(),
            );
        }
        let sigma_min_bound = ((eig_tail.min() - eig_full.max()) * half).exp();
        log::debug!(
            "built E for L={window}, d={d} in {:.3}s (sigma_min >= {sigma_min_bound:e})",
            t0.elapsed().as_secs_f64()
        );
        let mut map = Self {
            model,
            window,
            e: Matrix::from_faer_unchecked(e),
            mode,
            superop: None,
            sigma_min_bound,
        };
        if mode == TransferMode::DenseSuperoperator {
            map.superop = Some(map.dense_superoperator()?);
        }
        Ok(map)
    }

    /// The model at unit inverse temperature.
    pub fn model(&self) -> &ChainModel<T> {
        &self.model
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn local_dim(&self) -> usize {
        self.model.local_dim()
    }

    /// Dimension `d^(L-1)` of the operators the map acts on.
    pub fn operand_dim(&self) -> usize {
        self.e.dim() / self.local_dim()
    }

    pub fn e(&self) -> &Matrix<T> {
        &self.e
    }

    pub fn mode(&self) -> TransferMode {
        self.mode
    }

    /// Lower bound `exp((lambda_min(H_[1,L-1]) - lambda_max(H_[1,L]))/2)` on
    /// the smallest singular value of `E`.
    pub fn sigma_min_bound(&self) -> T::Re {
        self.sigma_min_bound
    }

    /// `K_{sb}` as a view into `E`.
    fn kraus(&self, s: usize, b: usize) -> MatRef<'_, T> {
        let d = self.local_dim();
        let m = self.operand_dim();
        // rows x*d + s, columns b*m .. b*m + m
        let rows = self.e.as_faer().subcols(b * m, m);
        let strided = rows.subrows(s, rows.nrows() - s);
        strided_rows(strided, d, m)
    }

    fn check_operand(&self, q: &Matrix<T>) -> Result<()> {
        if q.dim() != self.operand_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.operand_dim(),
                found: q.dim(),
            });
        }
        Ok(())
    }

    /// `L*(Q) = tr_L(E (1 (x) Q) E^dagger)`.
    pub fn apply_transfer(&self, q: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_operand(q)?;
        if let Some(sup) = &self.superop {
            return Ok(unvec(&mat_vec(sup, &vec_of(q)), q.dim()));
        }
        Ok(self.kraus_sum(q, false))
    }

    /// `L(X) = tr_1(E^dagger (X (x) 1) E)`.
    pub fn apply_adjoint(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_operand(x)?;
        Ok(self.kraus_sum(x, true))
    }

    fn kraus_sum(&self, q: &Matrix<T>, adjoint: bool) -> Matrix<T> {
        let d = self.local_dim();
        let m = self.operand_dim();
        let par = faer::get_global_parallelism();
        let mut out = Mat::<T>::zeros(m, m);
        let mut tmp = Mat::<T>::zeros(m, m);
        for s in 0..d {
            for b in 0..d {
                let k = self.kraus(s, b);
                if adjoint {
                    // K^dagger X K
                    matmul(tmp.as_mut(), Accum::Replace, q.as_faer(), k, T::one(), par);
                    matmul(out.as_mut(), Accum::Add, k.adjoint(), tmp.as_ref(), T::one(), par);
                } else {
                    // K Q K^dagger
                    matmul(tmp.as_mut(), Accum::Replace, k, q.as_faer(), T::one(), par);
                    matmul(out.as_mut(), Accum::Add, tmp.as_ref(), k.adjoint(), T::one(), par);
                }
            }
        }
        Matrix::from_faer_unchecked(out)
    }

    /// Matrix `M` with `M vec(Q) = vec(L*(Q))`, where `vec` stacks columns:
    /// `vec(Q)[i + j*m] = Q[i, j]`. Equals `sum_{s,b} conj(K_sb) (x) K_sb`.
    pub fn dense_superoperator(&self) -> Result<Matrix<T>> {
        self.assemble_superoperator(false)
    }

    /// Same as [`TransferMap::dense_superoperator`] for the adjoint map `L`.
    pub fn dense_adjoint_superoperator(&self) -> Result<Matrix<T>> {
        self.assemble_superoperator(true)
    }

    fn assemble_superoperator(&self, adjoint: bool) -> Result<Matrix<T>> {
        let d = self.local_dim();
        let m = self.operand_dim();
        let mm = m
            .checked_mul(m)
            .ok_or_else(|| invalid("superoperator dimension overflows usize"))?;
        MemoryBudget::from_env().require_matrices("dense superoperator", mm as u128, 1, std::mem::size_of::<T>())?;
        let mut out = Mat::<T>::zeros(mm, mm);
        for s in 0..d {
            for b in 0..d {
                let k = self.kraus(s, b);
                // vec(A X B) = (B^T (x) A) vec(X)
                // forward: A = K, B = K^dagger, B^T = conj(K)
                // adjoint: A = K^dagger, B = K, B^T = K^T
                for j1 in 0..m {
                    for i1 in 0..m {
                        let outer = if adjoint { k[(j1, i1)] } else { k[(i1, j1)].conj() };
                        if outer == T::zero() {
                            continue;
                        }
                        for j2 in 0..m {
                            for i2 in 0..m {
                                let inner = if adjoint { k[(j2, i2)].conj() } else { k[(i2, j2)] };
                                out[(i1 * m + i2, j1 * m + j2)] += outer * inner;
                            }
                        }
                    }
                }
            }
        }
        Ok(Matrix::from_faer_unchecked(out))
    }

    /// Eigenvalues of the dense superoperator, largest modulus first.
    pub fn dense_spectrum(&self) -> Result<Vec<Complex<T::Re>>> {
        let sup = match &self.superop {
            Some(s) => s.clone(),
            None => self.dense_superoperator()?,
        };
        spectrum_by_modulus(&sup)
    }

    /// Largest eigenvalue modulus of the dense superoperator.
    pub fn dense_spectral_radius(&self) -> Result<T::Re> {
        Ok(self.dense_spectrum()?[0].norm())
    }

    /// Collatz-Wielandt bounds `(inf(L*(v)/v), sup(L*(v)/v))` for strictly
    /// positive `v`; the spectral radius lies between them.
    pub fn collatz_wielandt_bounds(&self, v: &Matrix<T>) -> Result<(T::Re, T::Re)> {
        self.check_operand(v)?;
        let eig = HermitianEigen::new(v)?;
        if eig.min() <= T::Re::zero() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: eig.min().to_f64(),
            });
        }
        let image = self.apply_transfer(v)?.hermitized();
        relative_spectrum_bounds(&image, &eig)
    }

    /// Default iteration cap `ceil(100 L ln d)`.
    pub fn default_max_iter(&self) -> usize {
        let v = 100.0 * self.window as f64 * (self.local_dim() as f64).ln();
        (v.ceil() as usize).max(1)
    }

    /// Power iteration `x <- L*(x) / tr L*(x)` from `x = 1/m`.
    ///
    /// Stops once `||L*(x) - r x||_1 <= tol r` and the Hilbert metric distance
    /// between consecutive iterates is at most `tol`. Both tolerances are
    /// raised to the roundoff floor of the iterate when that floor is larger:
    /// the gap cannot resolve below roughly `eps * (m + sqrt(m) cond(x))`.
    pub fn spectral_radius(&self, opts: &SolverOptions) -> Result<SpectralResult<T>> {
        let start = Instant::now();
        let tol = opts.tol.unwrap_or(<T::Re as RealScalar>::SOLVER_TOL);
        if !(tol > 0.0) {
            return Err(invalid(format!("solver tolerance must be positive, got {tol}")));
        }
        let max_iter = opts.max_iter.unwrap_or_else(|| self.default_max_iter()).max(1);
        let m = self.operand_dim();
        let eps = <T::Re as Float>::epsilon().to_f64();
        let residual_floor = 64.0 * eps;

        let mut x = Matrix::<T>::identity(m).scaled_real(T::Re::one() / T::Re::from_usize(m));
        let mut x_eig = HermitianEigen::new_unchecked(&x)?;
        let mut history = Vec::new();
        let mut radius = T::Re::zero();
        let mut residual = T::Re::infinity();
        let mut gap = T::Re::infinity();
        let mut converged = false;
        let mut iterations = 0;
        let (mut residual_tol, mut gap_tol) = (tol, tol);

        while iterations < max_iter {
            iterations += 1;
            let mut y = self.apply_transfer(&x)?;
            y.hermitize();
            let r = y.trace().re();
            if !(r > T::Re::zero()) || !r.is_finite() {
                return Err(Error::NumericalBreakdown(format!(
                    "trace of the transferred iterate is {r} at iteration {iterations}"
                )));
            }
            let mut x_next = y;
            x_next.scale_in_place(T::from_real(T::Re::one() / r));
            let next_eig = HermitianEigen::new_unchecked(&x_next)?;
            let lam_min = next_eig.min();
            if lam_min < -x_next.psd_tol() {
                return Err(Error::NumericalBreakdown(format!(
                    "iterate lost positivity at iteration {iterations}: smallest eigenvalue {lam_min:e}"
                )));
            }

            // ||L*(x) - r x||_1 = r ||x_next - x||_1
            residual = r * trace_norm(&(&x_next - &x))?;
            let rel_res = (residual / r).to_f64();
            // the gap costs another eigendecomposition; skip it while the residual is still large
            let want_gap = rel_res <= tol.max(residual_floor) || opts.record_history;
            gap = if !want_gap {
                T::Re::infinity()
            } else if x_eig.min() > T::Re::zero() && lam_min > T::Re::zero() {
                let (lo, hi) = relative_spectrum_bounds(&x_next, &x_eig)?;
                if lo > T::Re::zero() {
                    (hi / lo).ln().max(T::Re::zero())
                } else {
                    T::Re::infinity()
                }
            } else {
                T::Re::infinity()
            };
            radius = r;

            let cond = if lam_min > T::Re::zero() {
                (next_eig.max() / lam_min).to_f64()
            } else {
                f64::INFINITY
            };
            residual_tol = tol.max(residual_floor);
            let mf = m as f64;
            gap_tol = tol.max(eps * (64.0 * mf + 32.0 * mf.sqrt() * cond));
            if opts.record_history {
                history.push((rel_res, gap.to_f64()));
            }
            log::trace!("iter {iterations}: r={r:e} res={rel_res:e} gap={:e}", gap.to_f64());

            x = x_next;
            x_eig = next_eig;
            if rel_res <= residual_tol && gap.to_f64() <= gap_tol {
                converged = true;
                break;
            }
        }
        if gap_tol > tol {
            log::debug!("Hilbert gap tolerance raised to {gap_tol:e} by the iterate's conditioning");
        }
        if !converged {
            log::warn!(
                "power iteration did not converge in {iterations} iterations (residual {:e}, gap {:e})",
                (residual / radius).to_f64(),
                gap.to_f64()
            );
        }
        let eigenvector = DensityMatrix::normalized(x, self.local_dim(), self.window - 1)?;
        Ok(SpectralResult {
            radius,
            eigenvector,
            iterations,
            residual,
            hilbert_gap: gap,
            converged,
            tol,
            residual_tol,
            gap_tol,
            history,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

/// Rows `0, d, 2d, ...` of `a`, `count` of them.
fn strided_rows<T: Scalar>(a: MatRef<'_, T>, d: usize, count: usize) -> MatRef<'_, T> {
    let rs = a.row_stride() * d as isize;
    let cs = a.col_stride();
    let ncols = a.ncols();
    debug_assert!(count == 0 || (count - 1) * d < a.nrows());
    // SAFETY: every row index x*d (x < count) lies inside `a`, and the view
    // keeps the lifetime and column stride of `a`
    unsafe { MatRef::from_raw_parts(a.as_ptr(), count, ncols, rs, cs) }
}

/// Column-stacked vectorization `vec(Q)[i + j*m] = Q[i, j]`.
pub fn vec_of<T: Scalar>(q: &Matrix<T>) -> Vec<T> {
    let m = q.dim();
    let mut v = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            v.push(q[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vec_of`].
pub fn unvec<T: Scalar>(v: &[T], m: usize) -> Matrix<T> {
    Matrix::from_fn(m, |i, j| v[i + j * m])
}

fn mat_vec<T: Scalar>(a: &Matrix<T>, v: &[T]) -> Vec<T> {
    let n = a.dim();
    let mut out = vec![T::zero(); n];
    for (j, &vj) in v.iter().enumerate() {
        if vj == T::zero() {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += a[(i, j)] * vj;
        }
    }
    out
}

/// Eigenvalues of a general square matrix, largest modulus first.
pub fn spectrum_by_modulus<T: Scalar>(a: &Matrix<T>) -> Result<Vec<Complex<T::Re>>> {
    let mut ev = a
        .as_faer()
        .eigenvalues()
        .map_err(|e| Error::Backend(format!("eigenvalues: {e:?}")))?;
    ev.sort_by(|p, q| q.norm().partial_cmp(&p.norm()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn zero_model_shifts_and_traces() {
        use crate::linalg::{kron, partial_trace};
        let chain = models::zero::<f64>(3, 1.0).unwrap();
        let t = TransferMap::new(&chain, 3).unwrap();
        assert_eq!(t.e(), &Matrix::identity(27));
        let q = Matrix::from_fn(9, |i, j| (i * 9 + j) as f64);
        let i3 = Matrix::identity(3);
        // L*(Q) = 1 (x) tr_last(Q), L(X) = tr_first(X) (x) 1
        let fwd = kron(&i3, &partial_trace(&q, 3, 2, &[1]).unwrap()).unwrap();
        let adj = kron(&partial_trace(&q, 3, 2, &[0]).unwrap(), &i3).unwrap();
        assert_eq!(t.apply_transfer(&q).unwrap(), fwd);
        assert_eq!(t.apply_adjoint(&q).unwrap(), adj);
        assert_eq!(
            t.apply_transfer(&Matrix::identity(9)).unwrap(),
            Matrix::identity(9).scaled(3.0)
        );
        let res = t.spectral_radius(&SolverOptions::default()).unwrap();
        assert_eq!(res.radius, 3.0);
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
        assert!((t.dense_spectral_radius().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let q = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(vec_of(&q), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(&vec_of(&q), 2), q);
    }

    #[test]
    fn rejects_bad_shapes() {
        let chain = models::ising::<f64>(1.0, 1.0).unwrap();
        assert!(TransferMap::new(&chain, 1).is_err());
        let t = TransferMap::new(&chain, 3).unwrap();
        assert!(matches!(
            t.apply_transfer(&Matrix::identity(8)),
            Err(Error::DimensionMismatch { expected: 4, found: 8 })
        ));
    }

    #[test]
    fn ising_radius_is_classical() {
        let chain = models::ising::<f64>(1.0, 1.0).unwrap();
        let t = TransferMap::new(&chain, 4).unwrap();
        let res = t.spectral_radius(&SolverOptions::default()).unwrap();
        assert!(res.converged);
        assert!((res.radius - 2.0 * 1f64.cosh()).abs() < 1e-10);
    }

    #[test]
    fn dense_mode_matches_matrix_free() {
        let chain = models::xy::<f64>(1.0, 1.0).unwrap();
        let free = TransferMap::new(&chain, 3).unwrap();
        let dense = TransferMap::with_mode(&chain, 3, TransferMode::DenseSuperoperator).unwrap();
        let q = Matrix::from_fn(4, |i, j| {
            ((i + 1) * (j + 2)) as f64 * 0.1 + if i == j { 1.0 } else { 0.0 }
        });
        let a = free.apply_transfer(&q).unwrap();
        let b = dense.apply_transfer(&q).unwrap();
        assert!((&a - &b).max_abs() < 1e-12);
    }
}
