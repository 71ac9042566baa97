//! Property tests for the tilted risk functionals: range, monotonicity in
//! the tilt, the convergence limits, the tilt-gap bound, consistency
//! between the quantum risk and the outcome statistic, and shift covariance.

use proptest::prelude::*;
use qterm_core::operator::{DensityOperator, Projector};
use qterm_core::risk::{
    erm, qterm_mu, qterm_risk, term, tilted_statistic_from_outcomes, LossVector,
};

fn loss_vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..=1.0, 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn term_stays_between_min_and_max(values in loss_vec_strategy(40), gamma in -60.0f64..60.0) {
        let lv = LossVector::new(values.clone()).unwrap();
        let t = term(&lv, gamma);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(t >= lo - 1e-12 && t <= hi + 1e-12);
    }

    #[test]
    fn term_is_nondecreasing_in_gamma(values in loss_vec_strategy(30)) {
        let lv = LossVector::new(values).unwrap();
        let grid = [-50.0, -10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0, 50.0];
        let mut prev = f64::NEG_INFINITY;
        for &g in &grid {
            let t = term(&lv, g);
            prop_assert!(t >= prev - 1e-9, "term({g}) = {t} below {prev}");
            prev = t;
        }
    }

    #[test]
    fn term_shift_covariance(values in loss_vec_strategy(30), shift in 0.0f64..3.0, gamma in -20.0f64..20.0) {
        let lv = LossVector::new(values.clone()).unwrap();
        let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
        let lv_shifted = LossVector::with_bound(shifted, 1.0 + shift).unwrap();
        let gap = term(&lv_shifted, gamma) - (term(&lv, gamma) + shift);
        prop_assert!(gap.abs() < 1e-10, "shift rule violated by {gap}");
    }

    #[test]
    fn small_gamma_matches_erm(values in loss_vec_strategy(30)) {
        let lv = LossVector::new(values).unwrap();
        prop_assert!((term(&lv, 1e-8) - erm(&lv)).abs() <= 1e-6);
    }

    #[test]
    fn tilt_gap_bound(values in loss_vec_strategy(64), gamma in -1.0f64..1.0) {
        // |tilted statistic - mean| <= |gamma| / 8 for outcomes in [0, 1].
        let stat = tilted_statistic_from_outcomes(&values, gamma).unwrap();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        prop_assert!((stat - mean).abs() <= gamma.abs() / 8.0 + 1e-9);
    }

    #[test]
    fn extreme_gamma_limits(values in proptest::collection::vec(0.0f64..=1.0, 3..40)) {
        let mut values = values;
        // Force the spread the limit statement assumes.
        values[0] = 0.1;
        values[1] = 0.7;
        let lv = LossVector::new(values.clone()).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((term(&lv, -50.0) - lo).abs() <= 0.1);
        prop_assert!((term(&lv, 50.0) - hi).abs() <= 0.1);
    }

    #[test]
    fn scaled_bound_limits(values in proptest::collection::vec(0.0f64..=2.0, 3..40)) {
        // Same limits under a loss bound of 2 with gamma = +/- 50 / bound.
        let mut values = values;
        values[0] = 0.2;
        values[1] = 1.4;
        let lv = LossVector::with_bound(values.clone(), 2.0).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((term(&lv, -25.0) - lo).abs() <= 0.2);
        prop_assert!((term(&lv, 25.0) - hi).abs() <= 0.2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quantum_risk_consistent_with_outcome_statistic(seed in any::<u64>(), gamma in -2.0f64..2.0) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let n = 6;
        let rhos: Vec<DensityOperator<f64>> = (0..n)
            .map(|_| qterm_core::operator::random_mixed_state(2, &mut rng).unwrap())
            .collect();
        let pis: Vec<Projector<f64>> = (0..n)
            .map(|_| qterm_core::operator::random_rank_projector(2, 1, &mut rng).unwrap())
            .collect();
        let exact: Vec<f64> = rhos
            .iter()
            .zip(pis.iter())
            .map(|(r, p)| qterm_core::operator::expectation(r, p).unwrap())
            .collect();
        let risk = qterm_risk(&rhos, &pis, gamma).unwrap();
        let stat = tilted_statistic_from_outcomes(&exact, gamma).unwrap();
        prop_assert!((risk - (1.0 - stat)).abs() < 1e-12);
        let mu = qterm_mu(&rhos, &pis, gamma).unwrap();
        prop_assert!((mu - stat).abs() < 1e-12);
    }
}
