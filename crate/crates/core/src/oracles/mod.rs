//! Independent reference values: classical transfer matrices, free fermions
//! and exact diagonalization of finite open chains.

pub mod classical;
pub mod exact_diag;
pub mod free_fermion;

pub use classical::classical_transfer_free_energy;
pub use exact_diag::{
    exact_diag_free_energy, extrapolated_free_energy, gibbs_marginal_bruteforce, richardson_extrapolate,
    FiniteChainResult,
};
pub use free_fermion::{xy_exact, xy_exact_cross_checked, xy_exact_energy, xy_open_chain_log_z};
