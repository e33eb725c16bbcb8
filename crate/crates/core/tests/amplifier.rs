mod common;

use gapless::amplifier::{apply_odd_polynomial, build_amplifier, tail_bound, OddPolynomial};
use gapless::harness::generate::{gaussian_matrix, rng_from_seed};
use gapless::{thin_svd, Matrix};

#[test]
fn cubic_amplifier_values() {
    let phi = build_amplifier(2.0, 1.0, 1).unwrap();
    // (4x³ − 3x) / 13 evaluated by hand.
    for x in [0.0, 0.3, 1.0, 2.0, 3.5] {
        let expect = (4.0 * x * x * x - 3.0 * x) / 13.0;
        assert!((phi.eval(x) - expect).abs() < 1e-14 * expect.abs().max(1.0));
    }
    assert!((phi.eval(2.0) - 2.0).abs() < 1e-14);
    assert!(phi.eval(1.0) <= tail_bound(1.0, 1.0, 1));
    let c = phi.odd_coefficients().unwrap();
    assert!((c[0] + 3.0 / 13.0).abs() < 1e-15 && (c[1] - 4.0 / 13.0).abs() < 1e-15);
}

#[test]
fn degree_seven_amplifier_dominates_identity() {
    let phi = build_amplifier(2.0, 1.0, 3).unwrap();
    for i in 0..=16 {
        let x = 2.0 + 0.5 * i as f64;
        assert!(phi.eval(x) >= x * (1.0 - 1e-14), "x = {x}");
    }
}

#[test]
fn matrix_function_matches_svd_route() {
    let mut rng = rng_from_seed(21);
    let a = gaussian_matrix(7, 5, &mut rng);
    let x = gaussian_matrix(5, 2, &mut rng);
    let s = common::sigma(&a);
    let phi = build_amplifier(s[1], s[2], 2).unwrap();
    let direct = apply_odd_polynomial(&a, &phi, &x).unwrap();

    let svd = thin_svd(&a).unwrap();
    let r = svd.sigma().len();
    let fs = Matrix::diag(&phi.eval_diag(svd.sigma()));
    let via_svd = svd.u().col_range(0..r).matmul(&fs).matmul_tr(&svd.v().col_range(0..r)).matmul(&x);
    assert!(direct.max_abs_diff(&via_svd) <= 1e-9 * via_svd.max_abs());
}

#[test]
fn monomials_are_powers() {
    let mut rng = rng_from_seed(22);
    let a = gaussian_matrix(4, 3, &mut rng);
    let x = gaussian_matrix(3, 2, &mut rng);
    let id = apply_odd_polynomial(&a, &OddPolynomial::identity(), &x).unwrap();
    assert!(id.max_abs_diff(&a.matmul(&x)) < 1e-13);
    let cube = apply_odd_polynomial(&a, &OddPolynomial::monomial(vec![0.0, 1.0]), &x).unwrap();
    let expect = a.matmul(&a.tr_matmul(&a.matmul(&x)));
    assert!(cube.max_abs_diff(&expect) < 1e-12 * expect.max_abs());
}
