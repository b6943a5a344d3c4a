mod common;

use common::{gaussian, gaussian_vec, with_spectrum};
use proptest::prelude::*;
use sparse_lsq_core::linalg::{
    frobenius_norm, lstsq, pinv, residual_norm, spectral_norm, svd_default, truncate, RankSplit,
};
use sparse_lsq_core::rng::seeded_stream;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_reconstructs_with_orthonormal_factors(seed in any::<u64>(), m in 1usize..12, n in 1usize..12) {
        let a = gaussian(m, n, &mut seeded_stream(seed));
        let f = svd_default(&a).unwrap();
        let err = frobenius_norm(&f.reconstruct().sub(&a).unwrap());
        prop_assert!(err <= 1e-8 * frobenius_norm(&a).max(1.0), "reconstruction error {err}");
        prop_assert!(f.u().orthonormality_defect(false) < 1e-10);
        prop_assert!(f.v().orthonormality_defect(false) < 1e-10);
        prop_assert!(f.sigma().windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(f.numerical_rank(), m.min(n));
    }

    #[test]
    fn svd_reconstructs_rank_deficient(seed in any::<u64>(), m in 3usize..10, n in 3usize..10) {
        let mut rng = seeded_stream(seed);
        let a = with_spectrum(m, n, &[5.0, 1.0], &mut rng);
        let f = svd_default(&a).unwrap();
        prop_assert_eq!(f.numerical_rank(), 2);
        prop_assert!(frobenius_norm(&f.reconstruct().sub(&a).unwrap()) <= 1e-8 * frobenius_norm(&a));
    }

    #[test]
    fn truncation_is_optimal_among_rank_k(seed in any::<u64>(), m in 3usize..10, n in 3usize..10, k in 1usize..3) {
        let mut rng = seeded_stream(seed);
        let a = gaussian(m, n, &mut rng);
        let a_k = truncate(&svd_default(&a).unwrap(), k).unwrap().reconstruct();
        let best_f = frobenius_norm(&a.sub(&a_k).unwrap());
        let best_2 = spectral_norm(&a.sub(&a_k).unwrap()).unwrap();
        for _ in 0..20 {
            let other = gaussian(m, k, &mut rng).matmul(&gaussian(k, n, &mut rng)).unwrap();
            let diff = a.sub(&other).unwrap();
            prop_assert!(best_f <= frobenius_norm(&diff) + 1e-10);
            prop_assert!(best_2 <= spectral_norm(&diff).unwrap() + 1e-10);
        }
    }

    #[test]
    fn minimum_norm_solution(seed in any::<u64>(), m in 4usize..10, n in 4usize..10) {
        let mut rng = seeded_stream(seed);
        let a = with_spectrum(m, n, &[3.0, 2.0, 1.0], &mut rng);
        let b = gaussian_vec(m, &mut rng);
        let x = lstsq(&a, &b).unwrap();
        let base_residual = residual_norm(&a, &x, &b).unwrap();
        let v = svd_default(&a).unwrap().v().clone();
        for _ in 0..5 {
            // a vector of the null space: remove the row-space component
            let z = gaussian_vec(n, &mut rng);
            let proj = v.matvec(&v.tr_matvec(&z).unwrap()).unwrap();
            let null: Vec<f64> = z.iter().zip(&proj).map(|(p, q)| p - q).collect();
            let shifted: Vec<f64> = x.iter().zip(&null).map(|(p, q)| p + q).collect();
            let norm = |y: &[f64]| y.iter().map(|t| t * t).sum::<f64>().sqrt();
            prop_assert!(norm(&shifted) > norm(&x));
            prop_assert!((residual_norm(&a, &shifted, &b).unwrap() - base_residual).abs() <= 1e-10 * (1.0 + base_residual));
        }
    }

    #[test]
    fn pseudo_inverse_penrose_conditions(seed in any::<u64>(), m in 1usize..9, n in 1usize..9) {
        let a = gaussian(m, n, &mut seeded_stream(seed));
        let p = pinv(&a).unwrap();
        let apa = a.matmul(&p).unwrap().matmul(&a).unwrap();
        let pap = p.matmul(&a).unwrap().matmul(&p).unwrap();
        prop_assert!(apa.max_abs_diff(&a).unwrap() < 1e-9);
        prop_assert!(pap.max_abs_diff(&p).unwrap() < 1e-9 * (1.0 + frobenius_norm(&p)));
        let ap = a.matmul(&p).unwrap();
        prop_assert!(ap.max_abs_diff(&ap.transpose()).unwrap() < 1e-9);
    }

    #[test]
    fn strong_submultiplicativity(seed in any::<u64>(), m in 1usize..8, p in 1usize..8, n in 1usize..8) {
        let mut rng = seeded_stream(seed);
        let x = gaussian(m, p, &mut rng);
        let y = gaussian(p, n, &mut rng);
        let xy = frobenius_norm(&x.matmul(&y).unwrap());
        prop_assert!(xy <= spectral_norm(&x).unwrap() * frobenius_norm(&y) + 1e-10);
        prop_assert!(xy <= frobenius_norm(&x) * spectral_norm(&y).unwrap() + 1e-10);
    }

    #[test]
    fn rank_split_residual_is_orthogonal(seed in any::<u64>(), m in 3usize..10, n in 3usize..10, k in 1usize..3) {
        let a = gaussian(m, n, &mut seeded_stream(seed));
        let split = RankSplit::new(&a, k).unwrap();
        let ev = split.residual().matmul(&split.v_k_t().transpose()).unwrap();
        prop_assert!(frobenius_norm(&ev) < 1e-10 * frobenius_norm(&a).max(1.0));
        let tail: f64 = split.factor().sigma()[k..].iter().map(|s| s * s).sum();
        prop_assert!((split.residual().frobenius_norm_sq() - tail).abs() < 1e-9 * (1.0 + tail));
    }
}

#[test]
fn normal_equations_agree_for_full_column_rank() {
    let mut rng = seeded_stream(99);
    let a = gaussian(9, 4, &mut rng);
    let b = gaussian_vec(9, &mut rng);
    let x = lstsq(&a, &b).unwrap();
    // A^T A x = A^T b
    let ata = a.transpose().matmul(&a).unwrap();
    let lhs = ata.matvec(&x).unwrap();
    let rhs = a.tr_matvec(&b).unwrap();
    for (p, q) in lhs.iter().zip(&rhs) {
        assert!((p - q).abs() < 1e-10);
    }
}
