//! Free energies and Gibbs marginals of translation-invariant quantum spin
//! chains from the spectrum of a finite noncommutative transfer map.
//!
//! A chain is a local dimension `d` and a two-site Hermitian term `h`. For a
//! window of `L` sites the map
//!
//! ```text
//! Q  ->  tr_L( E_L (1 (x) Q) E_L^dagger ),    E_L = exp(-H_[1,L]/2) exp(H_[2,L]/2)
//! ```
//!
//! acts on operators over `L - 1` sites. Its spectral radius `r_L` gives the
//! free energy per site as `-log(r_L)/beta`, and its leading eigenvector
//! approximates the Gibbs marginal of the infinite chain.
//!
//! All kernels are generic over [`Scalar`] (`f32`, `f64`, `Complex<f32>`,
//! `Complex<f64>`). Real Hamiltonians can run in real arithmetic; the type
//! aliases below pick double precision.
//!
//! ```
//! use transferkit::{models, thermo, RealChain};
//!
//! let chain: RealChain = models::ising(1.0, 1.0).unwrap();
//! let est = thermo::free_energy(&chain, 4, &Default::default()).unwrap();
//! let exact = -(2.0 * 1f64.cosh()).ln();
//! assert!((est.value - exact).abs() < 1e-8);
//! ```

pub mod budget;
pub mod chain;
pub mod error;
pub mod linalg;
pub mod models;
pub mod oracles;
pub mod scalar;
pub mod thermo;
pub mod transfer;

pub use budget::{MemoryBudget, DEFAULT_BUDGET_MIB, MEM_BUDGET_ENV};
pub use chain::ChainModel;
pub use error::{Error, Result};
pub use linalg::{DensityMatrix, HermitianOperator, Matrix, SiteInterval};
pub use scalar::{RealScalar, Scalar};
pub use transfer::{SolverOptions, SpectralResult, TransferMap};

pub use num_complex::{Complex32, Complex64};

pub type ComplexMatrix = Matrix<Complex64>;
pub type RealMatrix = Matrix<f64>;
pub type ComplexChain = ChainModel<Complex64>;
pub type RealChain = ChainModel<f64>;
pub type ComplexDensityMatrix = DensityMatrix<Complex64>;
pub type RealDensityMatrix = DensityMatrix<f64>;
