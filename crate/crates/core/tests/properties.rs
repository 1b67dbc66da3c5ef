use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fuzzy_prox::bridge::{rank_one_defect, BbBridge};
use fuzzy_prox::distance::{pushforward_state, PairContext};
use fuzzy_prox::group_rep::sphere_grid;
use fuzzy_prox::linalg::{
    c, op_norm, random_complex_matrix, random_hermitian, random_unit_vector, trace, CMat,
};
use fuzzy_prox::quantum_metric::random_state;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn defect_matches_dense_norm(d in 1usize..9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_complex_matrix(d, d, &mut r);
        let b = random_complex_matrix(d, d, &mut r);
        let v = random_unit_vector(d, &mut r);
        let p = &v * v.adjoint();
        let dense = op_norm(&(&a * &p - &p * &b));
        let fast = rank_one_defect(&a, &b, &v).unwrap();
        prop_assert!((dense - fast).abs() <= 1e-9 * (1.0 + dense));
    }

    #[test]
    fn bridge_norm_is_a_seminorm(m in 1usize..5, n in 1usize..5, seed in any::<u64>(), k in -3.0f64..3.0) {
        let grid = sphere_grid(m + n + 2).unwrap();
        let bridge = BbBridge::for_grid(m, n, &grid);
        let mut r = rng(seed);
        let (s1, t1) = (random_hermitian(m + 1, &mut r), random_hermitian(n + 1, &mut r));
        let (s2, t2) = (random_hermitian(m + 1, &mut r), random_hermitian(n + 1, &mut r));
        let n1 = bridge.sup(&s1, &t1).0;
        let n2 = bridge.sup(&s2, &t2).0;
        let sum = bridge.sup(&(&s1 + &s2), &(&t1 + &t2)).0;
        prop_assert!(sum <= n1 + n2 + 1e-10);
        let scaled = bridge.sup(&(&s1 * c(k)), &(&t1 * c(k))).0;
        prop_assert!((scaled - k.abs() * n1).abs() <= 1e-10 * (1.0 + n1));
    }

    #[test]
    fn scalar_pairs_have_zero_bridge(m in 1usize..5, n in 1usize..5, t in -5.0f64..5.0) {
        let grid = sphere_grid(m + n + 2).unwrap();
        let bridge = BbBridge::for_grid(m, n, &grid);
        let s = CMat::identity(m + 1, m + 1) * c(t);
        let u = CMat::identity(n + 1, n + 1) * c(t);
        prop_assert!(bridge.sup(&s, &u).0 < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pushforwards_are_states(m in 1usize..5, n in 1usize..5, seed in any::<u64>()) {
        let grid = Arc::new(sphere_grid(m + n + 2).unwrap());
        let ctx = PairContext::new(m, n, grid).unwrap();
        let mu = random_state(m + 1, seed).unwrap();
        let pushed = pushforward_state(&mu, &ctx.channel_mn).unwrap();
        let rho = pushed.as_density().unwrap();
        prop_assert_eq!(rho.nrows(), n + 1);
        prop_assert!((trace(rho).re - 1.0).abs() < 1e-10);
        let nu = random_state(n + 1, seed ^ 1).unwrap();
        let back = pushforward_state(&nu, &ctx.channel_nm).unwrap();
        prop_assert_eq!(back.as_density().unwrap().nrows(), m + 1);
    }

    #[test]
    fn compression_is_controlled_by_the_bridge(m in 1usize..4, n in 1usize..4, seed in any::<u64>()) {
        let grid = Arc::new(sphere_grid(m + n + 2).unwrap());
        let ctx = PairContext::new(m, n, grid).unwrap();
        let mut r = rng(seed);
        let s = random_hermitian(m + 1, &mut r);
        let t = random_hermitian(n + 1, &mut r);
        let g = ctx.gambit_bound(&s, &t, 1.0).unwrap();
        prop_assert!(g.direct <= g.bound + 1e-8);
        prop_assert!(g.symbol_gap >= 0.0);
    }
}
