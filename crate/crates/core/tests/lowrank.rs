mod common;

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use gapless::basis::orthonormal_range;
use gapless::bounds::BoundContext;
use gapless::harness::generate::{gaussian_matrix, generate_guess, generate_test_matrix, rng_from_seed};
use gapless::harness::GuessMode;
use gapless::lowrank::{
    approx_error, best_rank_i_from_range, certify_lowrank, lowrank_certificate_in, lowrank_report,
    proto_algorithm, NormKind,
};
use gapless::spectrum::parse_spectrum;
use gapless::{Matrix, Oracle, Tolerances};

fn clustered(seed: u64) -> (Oracle, Matrix) {
    let sigma = parse_spectrum("5,4,2*4,1*2").unwrap();
    let o = Oracle::new(generate_test_matrix(&sigma, 14, 12, seed).unwrap()).unwrap();
    let x = generate_guess(o.svd(), 4, GuessMode::Random, seed + 1).unwrap();
    (o, x)
}

#[test]
fn exact_krylov_space_attains_the_optimum() {
    let r = proto_algorithm(&Matrix::diag(&[3.0, 2.0, 1.0]), &Matrix::identity(3), 2, 1, 1e-10).unwrap();
    assert!((r.errors_f[1] - 1.0).abs() < 1e-12 && (r.opt_errors_f[1] - 1.0).abs() < 1e-12);
}

#[test]
fn errors_match_reference_projection() {
    let (o, x) = clustered(51);
    let r = proto_algorithm(o.a(), &x, 4, 3, 1e-10).unwrap();
    let s = common::sigma(o.a());
    for i in 0..4 {
        let u = r.u_hat.col_range(0..i + 1);
        let resid = &o.a().clone() - &u.matmul(&u.tr_matmul(o.a()));
        assert!((r.errors2[i] - common::norm2(&resid)).abs() < 1e-10);
        assert!((r.errors_f[i] - resid.norm_fro()).abs() < 1e-10);
        assert!((r.opt_errors2[i] - s[i + 1]).abs() < 1e-10);
        let tail: f64 = s[i + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((r.opt_errors_f[i] - tail).abs() < 1e-10);
        assert!(r.captured[i] <= s[i] + 1e-10);
    }
}

#[test]
fn certified_errors_hold_on_a_grid() {
    let tols = Tolerances::default();
    for seed in 52..60 {
        let (o, x) = clustered(seed);
        for q in 0..4 {
            for t in 0..3 {
                let c = certify_lowrank(&o, &x, 4, q, t, FRAC_PI_4, &tols).unwrap();
                assert_eq!(c.violations, 0, "seed {seed} q {q} t {t}");
                assert_eq!(c.result.power, q + t + 1);
            }
        }
    }
}

#[test]
fn deltas_scale_with_the_secant_of_theta0() {
    let tols = Tolerances::default();
    let (o, x) = clustered(61);
    let mut ctx = BoundContext::new(&o, &x, 4, tols).unwrap();
    let a = lowrank_certificate_in(&mut ctx, 2, 1, FRAC_PI_4).unwrap();
    let b = lowrank_certificate_in(&mut ctx, 2, 1, FRAC_PI_6).unwrap();
    assert!((a.condition_rhs - FRAC_PI_4.sin()).abs() < 1e-15);
    assert_eq!(a.condition_lhs, b.condition_lhs);
    for (da, db) in a.deltas.iter().zip(&b.deltas) {
        assert!((da * FRAC_PI_4.cos() - db * FRAC_PI_6.cos()).abs() < 1e-12 * da.max(1.0));
    }
}

#[test]
fn deltas_do_not_increase_along_the_grid() {
    let tols = Tolerances::default();
    for seed in 62..66 {
        let (o, x) = clustered(seed);
        let mut ctx = BoundContext::new(&o, &x, 4, tols).unwrap();
        let q0 = ctx.partition().q0;
        let mut grid = Vec::new();
        for q in q0..q0 + 4 {
            let row: Vec<Vec<f64>> = (0..4)
                .map(|t| lowrank_certificate_in(&mut ctx, q, t, FRAC_PI_4).unwrap().deltas)
                .collect();
            grid.push(row);
        }
        for q in 0..grid.len() {
            for t in 0..grid[q].len() {
                for i in 0..4 {
                    let d = grid[q][t][i];
                    if q + 1 < grid.len() {
                        assert!(grid[q + 1][t][i] <= d * (1.0 + 1e-10) + 1e-14);
                    }
                    if t + 1 < grid[q].len() {
                        assert!(grid[q][t + 1][i] <= d * (1.0 + 1e-10) + 1e-14);
                    }
                }
            }
        }
    }
}

#[test]
fn incompatible_guesses_run_uncertified() {
    let tols = Tolerances::default();
    let sigma = parse_spectrum("3,2*3,1").unwrap();
    let o = Oracle::new(generate_test_matrix(&sigma, 8, 6, 67).unwrap()).unwrap();
    let x = generate_guess(o.svd(), 2, GuessMode::AdversarialOrthogonal, 68).unwrap();
    let rep = lowrank_report(&o, &x, 2, 1, 0, FRAC_PI_4, &tols).unwrap();
    assert!(rep.certificate.is_none() && rep.uncertified.is_some());
    assert_eq!(rep.result.power, 2);
}

#[test]
fn approx_error_matches_explicit_projector() {
    let mut rng = rng_from_seed(69);
    let a = gaussian_matrix(9, 6, &mut rng);
    let u = orthonormal_range(&gaussian_matrix(9, 3, &mut rng), 1e-12).unwrap();
    let e = approx_error(&a, &u).unwrap();
    let resid = &a - &u.projector().matmul(&a);
    assert!((e.two - common::norm2(&resid)).abs() < 1e-10);
    assert!((e.fro - resid.norm_fro()).abs() < 1e-10);
}

#[test]
fn range_restricted_truncation() {
    let mut rng = rng_from_seed(70);
    let a = gaussian_matrix(8, 6, &mut rng);
    // R(C) contains the dominant 2-space, so the restricted optimum is A_2.
    let svd = gapless::thin_svd(&a).unwrap();
    let c = Matrix::hcat(&[&svd.u_head(2), &gaussian_matrix(8, 1, &mut rng)]);
    let p = best_rank_i_from_range(&c, &a, 2, NormKind::Frobenius).unwrap();
    assert!(p.max_abs_diff(&common::truncate(&a, 2)) < 1e-9);
    let zero = best_rank_i_from_range(&c, &a, 0, NormKind::Two).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
    assert!(best_rank_i_from_range(&c, &a, 4, NormKind::Two).is_err());
}
