use gapless::amplifier::{apply_odd_polynomial, build_amplifier};
use gapless::basis::{orthonormal_range, pseudoinverse};
use gapless::harness::generate::{gaussian_matrix, rng_from_seed};
use gapless::io::{parse_matrix_market, to_matrix_market, MmFormat};
use gapless::krylov::{krylov_basis, DEFAULT_KRYLOV_TOL};
use gapless::spectrum::{partition_at, DEFAULT_CLUSTER_TOL};
use gapless::subspace::{sin_tan_theta_norms, sin_theta};
use gapless::Matrix;
use proptest::prelude::*;

fn seeded(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_matrix(rows, cols, &mut rng_from_seed(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn penrose_conditions(m in 1usize..7, n in 1usize..7, r in 1usize..4, seed in any::<u64>()) {
        let a = seeded(m, r, seed).matmul_tr(&seeded(n, r, seed ^ 1));
        let p = pseudoinverse(&a, 1e-12).unwrap();
        let scale = a.max_abs().max(1.0) * p.max_abs().max(1.0);
        prop_assert!(a.matmul(&p).matmul(&a).max_abs_diff(&a) < 1e-9 * scale * a.max_abs().max(1.0));
        prop_assert!(p.matmul(&a).matmul(&p).max_abs_diff(&p) < 1e-9 * scale * p.max_abs().max(1.0));
    }

    #[test]
    fn sines_lie_in_unit_interval_and_routes_agree(n in 2usize..9, a in 1usize..5, b in 1usize..5, seed in any::<u64>()) {
        let a = a.min(n);
        let b = b.min(n).max(a);
        let s = orthonormal_range(&seeded(n, a, seed), 1e-12).unwrap();
        let t = orthonormal_range(&seeded(n, b, seed ^ 7), 1e-12).unwrap();
        let p = sin_theta(&s, &t).unwrap();
        let q = sin_tan_theta_norms(&s, &t).unwrap();
        prop_assert!(p.two >= 0.0 && p.two <= 1.0 + 1e-12);
        prop_assert!(p.fro <= (s.dim() as f64).sqrt() + 1e-12);
        prop_assert!((p.two - q.sin2).abs() < 1e-10);
        prop_assert!((p.fro - q.sin_f).abs() < 1e-10);
        prop_assert!(q.tan2 + 1e-12 >= q.sin2);
    }

    #[test]
    fn equal_dimension_sines_are_symmetric(n in 2usize..9, d in 1usize..4, seed in any::<u64>()) {
        let d = d.min(n);
        let s = orthonormal_range(&seeded(n, d, seed), 1e-12).unwrap();
        let t = orthonormal_range(&seeded(n, d, seed ^ 3), 1e-12).unwrap();
        let st = sin_theta(&s, &t).unwrap();
        let ts = sin_theta(&t, &s).unwrap();
        prop_assert!((st.two - ts.two).abs() < 1e-10 && (st.fro - ts.fro).abs() < 1e-10);
    }

    #[test]
    fn krylov_bases_are_nested_and_orthonormal(m in 3usize..10, n in 3usize..10, r in 1usize..3, q in 0usize..4, seed in any::<u64>()) {
        let a = seeded(m, n, seed);
        let x = seeded(n, r, seed ^ 5);
        let kb = krylov_basis(&a, &x, q, DEFAULT_KRYLOV_TOL).unwrap();
        prop_assert!(kb.basis().matrix().orthonormality_defect() < 1e-10);
        prop_assert!(kb.dim() <= m.min(r * (q + 1)));
        prop_assert_eq!(kb.block_dims().len(), q + 1);
        for p in 0..q {
            prop_assert!(kb.prefix(p).dim() <= kb.prefix(p + 1).dim());
        }
    }

    #[test]
    fn odd_filters_are_odd(q in 0usize..4, seed in any::<u64>()) {
        let a = seeded(5, 4, seed);
        let x = seeded(4, 2, seed ^ 9);
        let phi = build_amplifier(2.0, 1.0, q).unwrap();
        let plus = apply_odd_polynomial(&a, &phi, &x).unwrap();
        let minus = apply_odd_polynomial(&a, &phi, &(-&x)).unwrap();
        let negated = -&plus;
        prop_assert_eq!(negated.as_slice(), minus.as_slice());
    }

    #[test]
    fn partitions_bracket_h(values in prop::collection::vec(1usize..5, 1..8), h_pick in 0usize..100) {
        let mut sigma: Vec<f64> = values.iter().map(|v| *v as f64).collect();
        sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let h = 1 + h_pick % sigma.len();
        let p = partition_at(&sigma, h, DEFAULT_CLUSTER_TOL).unwrap();
        prop_assert!(p.j < h && h <= p.k && p.k <= sigma.len());
        prop_assert!(sigma[p.j..p.k].iter().all(|s| *s == sigma[h - 1]));
        if p.j > 0 { prop_assert!(sigma[p.j - 1] > sigma[p.j]); }
        if p.k < sigma.len() { prop_assert!(sigma[p.k - 1] > sigma[p.k]); }
    }

    #[test]
    fn matrix_market_is_lossless(m in 1usize..6, n in 1usize..6, seed in any::<u64>(), coord in any::<bool>()) {
        let a = seeded(m, n, seed).scale(1e-7);
        let fmt = if coord { MmFormat::Coordinate } else { MmFormat::Array };
        let b = parse_matrix_market(&to_matrix_market(&a, fmt), "p.mtx").unwrap();
        prop_assert_eq!(a.as_slice(), b.as_slice());
    }
}
