mod common;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use transferkit::oracles::{
    classical_transfer_free_energy, exact_diag_free_energy, extrapolated_free_energy, gibbs_marginal_bruteforce,
    xy_exact, xy_exact_cross_checked,
};
use transferkit::thermo::{free_energy, gibbs_marginal};
use transferkit::{models, ChainModel, RealChain, SolverOptions};

fn xy(beta: f64) -> RealChain {
    models::xy(1.0, beta).unwrap()
}

#[test]
fn ising_partition_function_by_enumeration() {
    let chain: RealChain = models::ising(1.0, 1.0).unwrap();
    let mut z = 0.0;
    for conf in 0..32u32 {
        let spin = |i: u32| if conf >> i & 1 == 1 { -1.0 } else { 1.0 };
        let e: f64 = (0..4).map(|i| spin(i) * spin(i + 1)).sum();
        z += e.exp();
    }
    let r = exact_diag_free_energy(&chain, 5).unwrap();
    assert!((r.log_z - z.ln()).abs() < 1e-13);
    assert!((r.log_z - (2.0 * (2.0 * 1f64.cosh()).powi(4)).ln()).abs() < 1e-13);
}

#[test]
fn finite_size_differences_follow_inverse_length() {
    // f(N) = f + c/N + ...  =>  (f(N) - f(N+2)) / (f(N+2) - f(N+4)) ~ (N+4)/N
    let chain = xy(1.0);
    let f: Vec<f64> = [6, 8, 10, 12]
        .iter()
        .map(|&n| exact_diag_free_energy(&chain, n).unwrap().f_per_site)
        .collect();
    for (i, n) in [6.0, 8.0].iter().enumerate() {
        let ratio = (f[i] - f[i + 1]) / (f[i + 1] - f[i + 2]);
        let expected = (n + 4.0) / n;
        assert!(
            (ratio / expected - 1.0).abs() < 0.2,
            "N={n}: ratio {ratio}, expected {expected}"
        );
    }
}

#[test]
fn finite_size_error_exponent() {
    let chain = xy(1.0);
    let exact = xy_exact(1.0, 1.0).unwrap();
    let pts: Vec<(f64, f64)> = [6usize, 8, 10, 12, 14]
        .iter()
        .map(|&n| {
            let f = exact_diag_free_energy(&chain, n).unwrap().f_per_site;
            ((n as f64).ln(), (f - exact).abs().ln())
        })
        .collect();
    // least-squares slope of log|error| against log N
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    let exponent = -num / den;
    assert!((0.8..=1.2).contains(&exponent), "fitted exponent {exponent}");
}

#[test]
fn bruteforce_marginals_converge_in_length() {
    let chain = xy(1.0);
    let rho = |m| gibbs_marginal_bruteforce(&chain, 4, m).unwrap();
    let (r8, r10, r12) = (rho(8), rho(10), rho(12));
    let far = r8.trace_distance(&r10).unwrap();
    let near = r10.trace_distance(&r12).unwrap();
    assert!(near <= far, "{near} > {far}");
}

#[test]
fn bruteforce_marginal_matches_transfer_marginal() {
    let chain = xy(1.0);
    let brute = gibbs_marginal_bruteforce(&chain, 5, 12).unwrap();
    let transfer = gibbs_marginal(&chain, 10, 4, &SolverOptions::default()).unwrap();
    assert!(transfer.trace_distance(&brute).unwrap() <= 1e-4);
}

#[test]
fn classical_oracle_triangle() {
    for (chain, d) in [
        (models::ising::<f64>(1.0, 0.8).unwrap(), 2),
        (models::potts::<f64>(3, 1.0, 1.0).unwrap(), 3),
    ] {
        let beta = chain.beta();
        let classical = classical_transfer_free_energy(chain.h().matrix(), d, beta).unwrap();
        let ed = extrapolated_free_energy(&chain, [6, 7, 8]).unwrap();
        let transfer = free_energy(&chain, 4, &SolverOptions::default()).unwrap().value;
        assert!((classical - ed).abs() < 1e-6, "classical {classical}, ED {ed}");
        assert!(
            (classical - transfer).abs() < 1e-6,
            "classical {classical}, transfer {transfer}"
        );
        assert!((ed - transfer).abs() < 1e-6);
    }
}

#[test]
fn classical_oracle_rejects_off_diagonal_terms() {
    let chain = xy(1.0);
    assert!(classical_transfer_free_energy(chain.h().matrix(), 2, 1.0).is_err());
}

#[test]
fn free_fermion_reference_values() {
    assert!((xy_exact(0.0, 1.0).unwrap() + 2f64.ln()).abs() < 1e-15);
    let dimer = -0.5 * (2.0 + 2.0 * 0.5f64.cosh()).ln();
    assert!((xy_exact(1.0, 0.0).unwrap() - dimer).abs() < 1e-14);
    // 30-digit quadrature
    assert!((xy_exact(1.0, 1.0).unwrap() + 0.753_795_844_896_416_7).abs() < 1e-14);
    assert!((xy_exact(1.0, 2.0).unwrap() + 0.839_814_071_698_878_8).abs() < 1e-14);
}

#[test]
fn free_fermion_oracle_is_cross_checked() {
    for (beta, gamma) in [(1.0, 1.0), (2.0, 2.0)] {
        let v = xy_exact_cross_checked(beta, gamma).unwrap();
        assert_eq!(v, xy_exact(beta, gamma).unwrap());
    }
}

fn small_chain() -> impl Strategy<Value = ChainModel<C>> {
    common::chain(3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn bruteforce_marginals_are_states(model in small_chain(), m in 4usize..=7) {
        let rho = gibbs_marginal_bruteforce(&model, 3, m).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let lam = rho.eigenvalues().unwrap();
        prop_assert!(lam[0] >= -1e-12);
    }

    #[test]
    fn finite_chain_results_respect_the_envelope(model in small_chain(), n in 2usize..=7) {
        let r = exact_diag_free_energy(&model, n).unwrap();
        prop_assert!(r.log_z.is_finite());
        let envelope = model.h_norm() + 2f64.ln() / model.beta();
        prop_assert!(r.f_per_site.abs() <= envelope + 1e-12);
    }
}
