mod common;

use common::{gaussian, orthonormal_rows};
use proptest::prelude::*;
use sparse_lsq_core::linalg::{frobenius_norm, svd};
use sparse_lsq_core::rng::seeded_stream;
use sparse_lsq_core::sampling::{
    deterministic_sampling, deterministic_sampling_observed, leverage_probabilities, random_sampling, SamplingPlan,
};

fn sigma_k(m: &sparse_lsq_core::DenseMatrix, k: usize) -> f64 {
    svd(m, 0.0).unwrap().sigma().get(k - 1).copied().unwrap_or(0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// Both guarantees of the dual-set sampler on random `(V, E, k, r)`.
    #[test]
    fn deterministic_sampler_contract(
        seed in any::<u64>(),
        n in 20usize..=60,
        k in 1usize..=5,
        r_frac in 0.0f64..=1.0,
        m in 2usize..12,
    ) {
        let mut rng = seeded_stream(seed);
        let r = 4 * k + ((n - 4 * k) as f64 * r_frac) as usize;
        let v_t = orthonormal_rows(k, n, &mut rng);
        let e = gaussian(m, n, &mut rng);
        let plan = deterministic_sampling_observed(&v_t, &e, r, |state| {
            assert!(state.lambda_min().unwrap() > state.shift());
        })
        .unwrap();
        prop_assert!(plan.len() <= r);
        prop_assert!(!plan.has_repeats());
        let lower = 1.0 - (k as f64 / r as f64).sqrt();
        prop_assert!(sigma_k(&plan.apply(&v_t).unwrap(), k) >= lower - 1e-9);
        prop_assert!(frobenius_norm(&plan.apply(&e).unwrap()) <= frobenius_norm(&e) + 1e-9);
    }

    #[test]
    fn plan_application_is_dense_product(seed in any::<u64>(), m in 1usize..8, n in 1usize..10, r in 1usize..12) {
        let mut rng = seeded_stream(seed);
        let x = gaussian(m, n, &mut rng);
        let v_t = orthonormal_rows(1, n, &mut rng);
        let plan = random_sampling(&v_t, r, &mut rng).unwrap();
        let dense = x.matmul(&plan.omega()).unwrap().matmul(&plan.rescaling()).unwrap();
        prop_assert_eq!(plan.apply(&x).unwrap(), dense);
    }

    #[test]
    fn merge_preserves_gram(seed in any::<u64>(), m in 1usize..8, n in 2usize..10, r in 1usize..20) {
        let mut rng = seeded_stream(seed);
        let x = gaussian(m, n, &mut rng);
        let v_t = orthonormal_rows(1, n, &mut rng);
        let plan = random_sampling(&v_t, r, &mut rng).unwrap();
        let merged = plan.merged();
        prop_assert!(!merged.has_repeats());
        let g = |p: &SamplingPlan| { let c = p.apply(&x).unwrap(); c.matmul(&c.transpose()).unwrap() };
        prop_assert!(g(&plan).max_abs_diff(&g(&merged)).unwrap() < 1e-10 * (1.0 + frobenius_norm(&g(&plan))));
    }

    #[test]
    fn leverage_probabilities_form_a_distribution(seed in any::<u64>(), k in 1usize..5, extra in 0usize..20) {
        let v_t = orthonormal_rows(k, k + extra, &mut seeded_stream(seed));
        let p = leverage_probabilities(&v_t).unwrap();
        prop_assert!(p.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_sampler_is_seed_reproducible(seed in any::<u64>(), k in 1usize..4, n in 4usize..20, r in 1usize..40) {
        let v_t = orthonormal_rows(k, n, &mut seeded_stream(seed ^ 0x5eed));
        let a = random_sampling(&v_t, r, &mut seeded_stream(seed)).unwrap();
        let b = random_sampling(&v_t, r, &mut seeded_stream(seed)).unwrap();
        prop_assert_eq!(a.len(), r);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn deterministic_sampler_is_bit_reproducible(seed in any::<u64>(), k in 1usize..4, n in 12usize..30) {
        let mut rng = seeded_stream(seed);
        let v_t = orthonormal_rows(k, n, &mut rng);
        let e = gaussian(5, n, &mut rng);
        let r = 3 * k + 1;
        let first = deterministic_sampling(&v_t, &e, r).unwrap();
        let second = deterministic_sampling(&v_t, &e, r).unwrap();
        prop_assert_eq!(first.selected(), second.selected());
        prop_assert!(first.scales().iter().zip(second.scales()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
