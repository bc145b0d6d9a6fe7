//! Strategies and property checks shared by the property suite and the
//! acceptance runner.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use transferkit::linalg::{herm_expm, hermitian_norm, hilbert_metric, kron, partial_trace, Matrix};
use transferkit::transfer::TransferMap;
use transferkit::{ChainModel, SolverOptions};

pub type Cm = Matrix<C>;

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
}

pub fn general(n: usize) -> impl Strategy<Value = Cm> {
    entries(n).prop_map(move |v| Matrix::from_fn(n, |i, j| C::new(v[i * n + j].0, v[i * n + j].1)))
}

pub fn hermitian(n: usize) -> impl Strategy<Value = Cm> {
    general(n).prop_map(|a| {
        let mut h = &a + &a.adjoint();
        h.scale_in_place(C::new(0.5, 0.0));
        h
    })
}

/// `G G^dagger / tr + shift * I / n`, positive definite for `shift > 0`.
pub fn positive(n: usize, shift: f64) -> impl Strategy<Value = Cm> {
    general(n).prop_map(move |g| {
        let mut p = g.mul_adjoint(&g);
        let t = p.trace().re;
        p.scale_in_place(C::new(1.0 / t, 0.0));
        &p + &Matrix::identity(n).scaled_real(shift / n as f64)
    })
}

/// Two-site term on qubits with operator norm in `[0, max_norm]`.
pub fn chain(max_norm: f64) -> impl Strategy<Value = ChainModel<C>> {
    (hermitian(4), 0.0..max_norm).prop_map(|(h, norm)| {
        let current = hermitian_norm(&h).unwrap();
        let h = if current > 0.0 {
            h.scaled_real(norm / current)
        } else {
            h
        };
        ChainModel::new(h, 2, 1.0).unwrap()
    })
}

fn operand_dim(window: usize) -> usize {
    1 << (window - 1)
}

/// Model, window in `2..=max_window`, and two operands of matching size.
pub fn map_inputs(max_window: usize) -> impl Strategy<Value = (ChainModel<C>, usize, Cm, Cm)> {
    (chain(3.0), 2..=max_window).prop_flat_map(|(model, window)| {
        let m = operand_dim(window);
        (Just(model), Just(window), positive(m, 0.0), hermitian(m))
    })
}

pub fn check_positivity(input: (ChainModel<C>, usize, Cm, Cm)) -> Result<(), TestCaseError> {
    let (model, window, q, _) = input;
    let map = TransferMap::new(&model, window).unwrap();
    let image = map.apply_transfer(&q).unwrap();
    prop_assert!(image.hermiticity_defect().0 <= image.hermiticity_tol());
    let tol = image.psd_tol();
    let lam = transferkit::linalg::eigvalsh(&image.hermitized()).unwrap();
    prop_assert!(lam[0] >= -tol, "smallest eigenvalue {}", lam[0]);
    Ok(())
}

pub fn check_duality(input: (ChainModel<C>, usize, Cm, Cm)) -> Result<(), TestCaseError> {
    let (model, window, q, x) = input;
    let map = TransferMap::new(&model, window).unwrap();
    let q = q.scaled_real(1.0 / q.frobenius_norm());
    let x = x.scaled_real(1.0 / x.frobenius_norm().max(1e-300));
    let lhs = map.apply_adjoint(&x).unwrap().inner_product(&q).unwrap();
    let rhs = x.inner_product(&map.apply_transfer(&q).unwrap()).unwrap();
    prop_assert!((lhs - rhs).norm() <= 1e-10, "<L(X),Q> = {lhs}, <X,L*(Q)> = {rhs}");
    Ok(())
}

pub fn radius_inputs(max_window: usize) -> impl Strategy<Value = (ChainModel<C>, usize)> {
    (chain(2.0), 2..=max_window)
}

pub fn check_radius(input: (ChainModel<C>, usize)) -> Result<(), TestCaseError> {
    let (model, window) = input;
    let map = TransferMap::new(&model, window).unwrap();
    let dense = map.dense_spectral_radius().unwrap();
    let power = map.spectral_radius(&SolverOptions::default()).unwrap();
    prop_assert!(power.converged);
    prop_assert!(
        (dense - power.radius).abs() <= 1e-8 * dense,
        "dense {dense}, power iteration {}",
        power.radius
    );
    Ok(())
}

pub fn hilbert_inputs() -> impl Strategy<Value = (Cm, Cm, Cm, f64, f64)> {
    (
        positive(4, 0.05),
        positive(4, 0.05),
        positive(4, 0.05),
        0.01..100.0f64,
        0.01..100.0f64,
    )
}

pub fn check_hilbert_axioms(input: (Cm, Cm, Cm, f64, f64)) -> Result<(), TestCaseError> {
    let (x, y, z, a, b) = input;
    let d = |p: &Cm, q: &Cm| hilbert_metric(p, q).unwrap();
    let dxy = d(&x, &y);
    prop_assert!(d(&x, &x).abs() <= 1e-10);
    prop_assert!(dxy >= 0.0);
    prop_assert!((dxy - d(&y, &x)).abs() <= 1e-9 * (1.0 + dxy));
    prop_assert!((dxy - d(&x.scaled_real(a), &y.scaled_real(b))).abs() <= 1e-9 * (1.0 + dxy));
    prop_assert!(d(&x, &z) <= dxy + d(&y, &z) + 1e-9);
    Ok(())
}

pub fn trace_inputs() -> impl Strategy<Value = (Cm, Cm, Cm, Vec<bool>)> {
    (
        general(4),
        general(2),
        general(8),
        prop::collection::vec(any::<bool>(), 3),
    )
}

pub fn check_partial_trace(input: (Cm, Cm, Cm, Vec<bool>)) -> Result<(), TestCaseError> {
    let (a, b, x, mask) = input;
    // tr_3(A (x) B) = tr(B) A
    let ab = kron(&a, &b).unwrap();
    let reduced = partial_trace(&ab, 2, 3, &[2]).unwrap();
    let expected = a.scaled(b.trace());
    prop_assert!((&reduced - &expected).max_abs() <= 1e-12);
    // traces are preserved for any traced subset
    let traced: Vec<usize> = (0..3).filter(|&i| mask[i]).collect();
    if traced.len() < 3 {
        let r = partial_trace(&x, 2, 3, &traced).unwrap();
        prop_assert!((r.trace() - x.trace()).norm() <= 1e-12);
    }
    Ok(())
}

pub fn expm_inputs() -> impl Strategy<Value = (Cm, f64, f64)> {
    (hermitian(8), -2.0..2.0f64, -2.0..2.0f64)
}

pub fn check_expm(input: (Cm, f64, f64)) -> Result<(), TestCaseError> {
    let (h, s, t) = input;
    let lhs = herm_expm(&h, s).unwrap().matmul(&herm_expm(&h, t).unwrap()).unwrap();
    let rhs = herm_expm(&h, s + t).unwrap();
    let scale = 1.0 + rhs.max_abs();
    prop_assert!((&lhs - &rhs).max_abs() <= 1e-9 * scale);
    // exp(sH) exp(-sH) = I
    let id = herm_expm(&h, s).unwrap().matmul(&herm_expm(&h, -s).unwrap()).unwrap();
    prop_assert!((&id - &Matrix::identity(8)).max_abs() <= 1e-9 * scale);
    Ok(())
}

pub fn integer_matrix(n: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-9i32..=9, n * n).prop_map(move |v| Matrix::from_fn(n, |i, j| f64::from(v[i * n + j])))
}

pub fn check_kron_associativity(input: (Matrix<f64>, Matrix<f64>, Matrix<f64>)) -> Result<(), TestCaseError> {
    let (a, b, c) = input;
    let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
    let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
    prop_assert_eq!(left, right);
    Ok(())
}
