mod common;

use gapless::basis::orthonormal_range;
use gapless::harness::generate::{gaussian_matrix, rng_from_seed};
use gapless::subspace::{principal_angles, sin_tan_theta_norms, sin_theta};

#[test]
fn angle_and_projector_routes_agree() {
    let mut rng = rng_from_seed(11);
    for _ in 0..20 {
        let s = orthonormal_range(&gaussian_matrix(6, 2, &mut rng), 1e-12).unwrap();
        let t = orthonormal_range(&gaussian_matrix(6, 3, &mut rng), 1e-12).unwrap();
        let angles = sin_tan_theta_norms(&s, &t).unwrap();
        let proj = sin_theta(&s, &t).unwrap();
        let (r2, rf) = common::sin_theta_projectors(s.matrix(), t.matrix());
        for (x, y) in [(angles.sin2, proj.two), (angles.sin_f, proj.fro), (angles.sin2, r2), (angles.sin_f, rf)] {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }
}

#[test]
fn cosines_are_singular_values_of_the_cross_product() {
    let mut rng = rng_from_seed(12);
    let s = orthonormal_range(&gaussian_matrix(7, 3, &mut rng), 1e-12).unwrap();
    let t = orthonormal_range(&gaussian_matrix(7, 4, &mut rng), 1e-12).unwrap();
    let pair = principal_angles(&s, &t).unwrap();
    let reference = common::sigma(&s.matrix().tr_matmul(t.matrix()));
    for (c, r) in pair.angles.cosines.iter().zip(&reference) {
        assert!((c - r).abs() < 1e-12);
    }
    // Principal vectors realise the cosines.
    let cross = pair.u_basis.matrix().tr_matmul(pair.v_basis.matrix());
    for (i, c) in pair.angles.cosines.iter().enumerate() {
        assert!((cross[(i, i)] - c).abs() < 1e-12);
    }
}

#[test]
fn tangent_matches_angle_definition() {
    let mut rng = rng_from_seed(13);
    let s = orthonormal_range(&gaussian_matrix(8, 3, &mut rng), 1e-12).unwrap();
    let t = orthonormal_range(&gaussian_matrix(8, 3, &mut rng), 1e-12).unwrap();
    let n = sin_tan_theta_norms(&s, &t).unwrap();
    let tans: Vec<f64> = common::sigma(&s.matrix().tr_matmul(t.matrix()))
        .iter()
        .map(|c| c.min(1.0).acos().tan())
        .collect();
    let max = tans.iter().fold(0.0f64, |m, x| m.max(*x));
    let fro = tans.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((n.tan2 - max).abs() < 1e-9 * max.max(1.0));
    assert!((n.tan_f - fro).abs() < 1e-9 * fro.max(1.0));
}
