//! Properties of the tilted Hamiltonian risk: the zero-tilt limit, the
//! Jensen sign, monotonicity in the tilt, the spectral range, the overlap
//! identity, and the Renyi entropy against a relative-entropy oracle.

use qterm_core::operator::{
    hermitian_eigen, random_hermitian, random_mixed_state, trace_product, DensityOperator,
};
use qterm_core::qtr::{
    partition_function, qtr, qtr_limit, renyi_relative_entropy, tilted_overlap_check,
    TiltedHamiltonianModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn random_model(dim: usize, rng: &mut ChaCha12Rng) -> TiltedHamiltonianModel<f64> {
    let h = random_hermitian::<f64>(dim, rng).unwrap();
    let rho = random_mixed_state::<f64>(dim, rng).unwrap();
    TiltedHamiltonianModel::new(h, rho).unwrap()
}

#[test]
fn small_tilt_approaches_the_limit() {
    let mut rng = ChaCha12Rng::seed_from_u64(301);
    for _ in 0..50 {
        let model = random_model(4, &mut rng);
        let limit = qtr_limit(&model);
        let near = qtr(&model, 1e-6).unwrap();
        assert!((near - limit).abs() <= 1e-4, "gap {}", (near - limit).abs());
    }
}

#[test]
fn jensen_sign_of_the_tilt() {
    let mut rng = ChaCha12Rng::seed_from_u64(302);
    for _ in 0..50 {
        let model = random_model(4, &mut rng);
        let limit = qtr_limit(&model);
        assert!(qtr(&model, 1.0).unwrap() >= limit - 1e-10);
        assert!(qtr(&model, -1.0).unwrap() <= limit + 1e-10);
    }
}

#[test]
fn tilt_is_nondecreasing_on_a_grid() {
    let mut rng = ChaCha12Rng::seed_from_u64(303);
    for _ in 0..20 {
        let model = random_model(3, &mut rng);
        let mut prev = f64::NEG_INFINITY;
        for step in 0..21 {
            let gamma = -5.0 + 0.5 * step as f64;
            let value = if gamma == 0.0 { qtr_limit(&model) } else { qtr(&model, gamma).unwrap() };
            assert!(value >= prev - 1e-10, "qtr({gamma}) = {value} < {prev}");
            prev = value;
        }
    }
}

#[test]
fn value_stays_in_the_spectral_range() {
    let mut rng = ChaCha12Rng::seed_from_u64(304);
    for _ in 0..30 {
        let model = random_model(4, &mut rng);
        let (eigs, _) = hermitian_eigen(model.hamiltonian().matrix());
        let lo = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for gamma in [-4.0, -0.3, 0.2, 3.0] {
            let v = qtr(&model, gamma).unwrap();
            assert!(v >= lo - 1e-10 && v <= hi + 1e-10);
        }
    }
}

#[test]
fn partition_function_is_log_convex() {
    // Cauchy-Schwarz: Z((g1+g2)/2) <= sqrt(Z(g1) Z(g2)) on a dense grid.
    let mut rng = ChaCha12Rng::seed_from_u64(305);
    for _ in 0..10 {
        let model = random_model(3, &mut rng);
        for step in 0..20 {
            let g1 = -2.0 + 0.2 * step as f64;
            let g2 = g1 + 0.6;
            let mid = partition_function(&model, 0.5 * (g1 + g2));
            let ends = (partition_function(&model, g1) * partition_function(&model, g2)).sqrt();
            assert!(mid <= ends * (1.0 + 1e-12), "log-convexity violated: {mid} > {ends}");
        }
    }
}

#[test]
fn overlap_identity_on_random_pairs() {
    let mut rng = ChaCha12Rng::seed_from_u64(306);
    for _ in 0..20 {
        let rho = random_mixed_state::<f64>(4, &mut rng).unwrap();
        let sigma = random_mixed_state::<f64>(4, &mut rng).unwrap();
        for gamma in [0.3, 0.9, 1.7] {
            let (via_log, direct) = tilted_overlap_check(&rho, &sigma, gamma).unwrap();
            assert!((via_log - direct).abs() < 1e-10);
        }
    }
}

#[test]
fn renyi_alpha_near_one_matches_relative_entropy() {
    // Oracle: Tr rho (log rho - log sigma) via eigendecompositions.
    let mut rng = ChaCha12Rng::seed_from_u64(307);
    for _ in 0..15 {
        let rho = random_mixed_state::<f64>(3, &mut rng).unwrap();
        let sigma = random_mixed_state::<f64>(3, &mut rng).unwrap();
        let oracle = {
            let log_of = |state: &DensityOperator<f64>| {
                let (eigs, vecs) = hermitian_eigen(state.matrix());
                let mut scaled = vecs.clone();
                for (c, q) in eigs.iter().enumerate() {
                    let w = q.max(1e-300).ln();
                    for r in 0..scaled.nrows() {
                        scaled[(r, c)] *= num_complex::Complex::new(w, 0.0);
                    }
                }
                &scaled * vecs.adjoint()
            };
            let diff = log_of(&rho) - log_of(&sigma);
            trace_product(rho.matrix(), &diff).re
        };
        let near = renyi_relative_entropy(&rho, &sigma, 1.0 + 1e-4).unwrap();
        assert!((near - oracle).abs() <= 1e-3, "gap {}", (near - oracle).abs());
        let below = renyi_relative_entropy(&rho, &sigma, 1.0 - 1e-4).unwrap();
        assert!((below - oracle).abs() <= 1e-3);
    }
}

#[test]
fn renyi_is_nonnegative_for_states() {
    let mut rng = ChaCha12Rng::seed_from_u64(308);
    for _ in 0..20 {
        let rho = random_mixed_state::<f64>(3, &mut rng).unwrap();
        let sigma = random_mixed_state::<f64>(3, &mut rng).unwrap();
        for alpha in [0.5, 2.0] {
            assert!(renyi_relative_entropy(&rho, &sigma, alpha).unwrap() >= -1e-10);
        }
    }
}
