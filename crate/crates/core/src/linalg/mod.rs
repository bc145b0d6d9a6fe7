//! Dense linear algebra on tensor-product spaces.

pub mod density;
pub mod eigen;
pub mod hermitian;
pub mod matrix;
pub mod tensor;

pub use density::DensityMatrix;
pub use eigen::{
    eigvalsh, herm_expm, hermitian_norm, hilbert_metric, min_singular_value, operator_norm, trace_distance, trace_norm,
    HermitianEigen,
};
pub use hermitian::{HermitianOperator, SiteInterval};
pub use matrix::{embed, kron, kron_all, site_dim, Matrix, EXPM_TOL, HERMITICITY_TOL, PSD_TOL};
pub use tensor::{partial_trace, permute_sites, reduce_to};
