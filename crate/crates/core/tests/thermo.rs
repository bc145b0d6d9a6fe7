use proptest::prelude::*;
use transferkit::linalg::{kron, partial_trace, trace_distance, DensityMatrix, Matrix};
use transferkit::oracles::{exact_diag_free_energy, gibbs_marginal_bruteforce};
use transferkit::thermo::{
    choose_l, conditional_mutual_information, entropy, expectation_by_derivative, free_energy, gibbs_marginal,
    leading_eigenvector, marginal_from, mutual_information, two_sided_marginal, two_sided_model, LogBase, WindowRule,
};
use transferkit::{models, RealChain, SolverOptions};

fn xy(beta: f64) -> RealChain {
    models::xy(1.0, beta).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn estimate_is_minus_log_radius_over_beta() {
    let chain = xy(2.0);
    let est = free_energy(&chain, 6, &opts()).unwrap();
    assert_eq!(est.value, -est.spectral.radius.ln() / 2.0);
    assert_eq!(est.window, 6);
    assert!(est.value.abs() <= chain.h_norm() + 2f64.ln() / 2.0);
}

#[test]
fn beta_rescaling_is_exact() {
    for beta in [0.5, 1.5, 3.0] {
        let direct = free_energy(&xy(beta), 6, &opts()).unwrap().value;
        let scaled = xy(beta).rescale_to_unit_beta();
        let unit = free_energy(&scaled, 6, &opts()).unwrap().value;
        assert!((direct - unit / beta).abs() < 1e-12, "beta={beta}");
    }
}

#[test]
fn blocked_chain_free_energy_per_spin() {
    // gamma = 2 blocks two spins per site; the per-spin value matches the oracle
    let chain: RealChain = models::xy(2.0, 1.0).unwrap();
    assert_eq!(chain.spins_per_site(), 2);
    let est = free_energy(&chain, 5, &opts()).unwrap();
    let oracle = transferkit::oracles::xy_exact(1.0, 2.0).unwrap();
    assert!((est.per_spin(2) * est.beta - oracle).abs() < 1e-5);
}

#[test]
fn marginal_chain_is_consistent() {
    let spectral = leading_eigenvector(&xy(1.0), 10, &opts()).unwrap();
    for k in 1..=6 {
        let small = marginal_from(&spectral, k).unwrap();
        let large = marginal_from(&spectral, k + 1).unwrap();
        let reduced = partial_trace(large.matrix(), 2, k + 1, &[k]).unwrap();
        assert!(trace_distance(&reduced, small.matrix()).unwrap() <= 1e-6);
    }
}

#[test]
fn zero_model_marginals_are_maximally_mixed() {
    let chain: RealChain = models::zero(2, 1.0).unwrap();
    let rho = gibbs_marginal(&chain, 5, 2, &opts()).unwrap();
    let mixed = Matrix::<f64>::identity(4).scaled_real(0.25);
    assert!((rho.matrix() - &mixed).max_abs() < 1e-14);
    assert!(gibbs_marginal(&chain, 5, 5, &opts()).is_err());
}

#[test]
fn log_partition_ratio_approaches_free_energy() {
    let chain = xy(1.0);
    let log_z: Vec<f64> = (4..=13)
        .map(|n| exact_diag_free_energy(&chain, n).unwrap().log_z)
        .collect();
    let f = free_energy(&chain, 10, &opts()).unwrap().value;
    let gaps: Vec<f64> = log_z.windows(2).map(|w| (w[1] - w[0] + f).abs()).collect();
    // strictly decreasing until it reaches roundoff
    for w in gaps.windows(2).filter(|w| w[1] > 1e-13) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
    assert!(gaps[0] < 1e-3 && *gaps.last().unwrap() < 1e-13);
}

#[test]
fn two_sided_recast_shapes() {
    let zero: RealChain = models::zero(3, 1.0).unwrap();
    let doubled = two_sided_model(&zero).unwrap();
    assert_eq!(doubled.local_dim(), 9);
    assert_eq!(doubled.h().matrix().dim(), 81);
    assert_eq!(doubled.h().matrix().max_abs(), 0.0);
}

#[test]
fn two_sided_marginal_is_reflection_symmetric() {
    // the uniform XY chain is symmetric under reflection, so the marginal on
    // (2u, 1u, 1d, 2d) equals its mirror image
    let rho = two_sided_marginal(&xy(1.0), 4, 2, &opts()).unwrap();
    let mirrored = rho.permuted(&[3, 2, 1, 0]).unwrap();
    assert!(rho.trace_distance(&mirrored).unwrap() < 1e-8);
}

#[test]
fn two_sided_marginal_matches_open_chain_bulk() {
    // two-sided nearest-neighbour correlation is the bulk value of a long open chain
    let chain = xy(1.0);
    let rho = two_sided_marginal(&chain, 5, 1, &opts()).unwrap();
    let open = gibbs_marginal_bruteforce(&chain, 8, 12).unwrap();
    // sites 3 and 4 of the leading seven sites sit three bonds from the open end
    let bulk = open.marginal(&[3, 4]).unwrap();
    assert!(rho.trace_distance(&bulk).unwrap() < 1e-4);
}

#[test]
fn magnetization_vanishes_by_symmetry() {
    let chain = xy(1.0);
    let z = Matrix::<f64>::from_diagonal(&[1.0, -1.0]);
    let p = kron(&z, &Matrix::identity(2)).unwrap();
    let est = expectation_by_derivative(&chain, &p, 1e-6, 8, None).unwrap();
    assert!(est.value.abs() < 1e-6, "{}", est.value);
    // finite chain agrees: <Z_1> = 0
    let rho = gibbs_marginal_bruteforce(&chain, 2, 10).unwrap();
    assert!(rho.expectation(&z).unwrap().abs() < 1e-12);
}

#[test]
fn entropic_quantities_are_nonnegative() {
    let rho = two_sided_marginal(&xy(1.0), 4, 3, &opts()).unwrap();
    for a in 0..6 {
        for c in a + 1..6 {
            let mi = mutual_information(&rho, &[a], &[c], LogBase::Two).unwrap();
            assert!(mi >= -1e-10);
            let rest: Vec<usize> = (0..6).filter(|&s| s != a && s != c).collect();
            let cmi = conditional_mutual_information(&rho, &[a], &rest, &[c], LogBase::Two).unwrap();
            assert!(cmi >= -1e-8);
        }
    }
    assert!(entropy(&rho, LogBase::Natural).unwrap() <= 6.0 * 2f64.ln());
}

#[test]
fn entropy_of_mixed_and_pure_states() {
    let mixed = DensityMatrix::<f64>::maximally_mixed(2, 2).unwrap();
    assert!((entropy(&mixed, LogBase::Two).unwrap() - 2.0).abs() < 1e-14);
    let pure = DensityMatrix::new(Matrix::<f64>::from_diagonal(&[0.0, 1.0, 0.0, 0.0]), 2, 2).unwrap();
    assert_eq!(entropy(&pure, LogBase::Two).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn choose_l_is_monotone(e1 in 1e-14..0.36f64, e2 in 1e-14..0.36f64, c in -1.0..3.0f64, g in 1.0..100.0f64) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let rule = WindowRule::Theoretical { c, g };
        prop_assert!(choose_l(lo, rule).unwrap() >= choose_l(hi, rule).unwrap());
        let rule = WindowRule::Practical { budget_l: 12 };
        prop_assert!(choose_l(lo, rule).unwrap() >= choose_l(hi, rule).unwrap());
    }
}
