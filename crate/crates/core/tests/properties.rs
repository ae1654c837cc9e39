//! Property tests for the spec-level invariants that hold across random
//! inputs.

mod common;

use proptest::prelude::*;

use gradmem::buffer::{CriticalBuffer, ReplacementStrategy, SelectionStrategy};
use gradmem::harness::config::ExperimentConfig;
use gradmem::numerics::{
    companion_matrix, companion_spectral_radius, gaussian, spectral_norm, symmetric_eigenvalues,
    Matrix, RandomState, Vector,
};
use gradmem::optim::{aggregate, AggregationMode};

fn coeff_strategy(max_k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1..=max_k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Two code paths for the same number: companion-matrix eigenvalues
    // against a Durand-Kerner root oracle.
    #[test]
    fn companion_radius_matches_root_oracle(coeffs in coeff_strategy(8)) {
        let got = companion_spectral_radius(&coeffs).unwrap();
        let want = common::max_root_modulus(&coeffs);
        prop_assert!(
            (got - want).abs() <= 1e-7 * want.max(1.0),
            "companion {got} vs roots {want} for {coeffs:?}"
        );
    }

    // The spectral norm dominates every eigenvalue modulus.
    #[test]
    fn spectral_norm_dominates_companion_radius(coeffs in coeff_strategy(6)) {
        let radius = companion_spectral_radius(&coeffs).unwrap();
        let norm = spectral_norm(&companion_matrix(&coeffs).unwrap()).unwrap();
        prop_assert!(norm >= radius - 1e-9);
    }

    #[test]
    fn spectral_norm_dominates_symmetric_eigenvalues(seed in 0u64..1000) {
        let mut rs = RandomState::new(seed);
        let mut m = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in i..4 {
                let x = rs.next_gaussian();
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        let eigs = symmetric_eigenvalues(&m).unwrap();
        let lmax = eigs.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        prop_assert!(spectral_norm(&m).unwrap() >= lmax - 1e-9);
    }

    // KOTH with min-proxy replacement equals an independent brute-force
    // simulation of the same rules, on arbitrary norm streams.
    #[test]
    fn koth_equals_reference_simulation(
        norms in prop::collection::vec(0.05f64..5.0, 1..80),
        capacity in 1usize..6,
        decay in 0.1f64..0.99,
    ) {
        let mut buf = CriticalBuffer::koth(capacity, decay).unwrap();
        let mut reference: Vec<f64> = Vec::new();
        for (step, &n) in norms.iter().enumerate() {
            buf.offer(Vector::new(vec![n]).unwrap(), step as u64).unwrap();
            if reference.len() < capacity {
                reference.push(n);
            } else {
                let (imin, &pmin) = reference
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| a.total_cmp(b))
                    .unwrap();
                if n > pmin {
                    reference.remove(imin);
                    reference.push(n);
                }
            }
            buf.decay_all();
            for p in &mut reference {
                *p *= decay;
            }
        }
        let mut got: Vec<f64> = buf.entries().iter().map(|e| e.proxy_norm()).collect();
        got.sort_by(f64::total_cmp);
        reference.sort_by(f64::total_cmp);
        prop_assert_eq!(got, reference);
    }

    // Capacity is never exceeded and a non-full buffer accepts, for every
    // strategy pair.
    #[test]
    fn capacity_and_warmup_invariants(
        seed in 0u64..500,
        capacity in 0usize..5,
        selection_idx in 0usize..7,
        replacement_idx in 0usize..3,
    ) {
        let selection = SelectionStrategy::ALL[selection_idx];
        let replacement = ReplacementStrategy::ALL[replacement_idx];
        let mut buf = CriticalBuffer::new(
            capacity, 0.9, selection, replacement, RandomState::new(seed),
        ).unwrap();
        let mut stream = RandomState::new(seed ^ 0x9e37);
        for step in 0..50u64 {
            let g = gaussian(&mut stream, 3, 1.0).unwrap();
            let was_full = buf.is_full();
            let accepted = buf.offer(g, step).unwrap();
            if !was_full {
                prop_assert!(accepted);
            }
            prop_assert!(buf.len() <= capacity);
            buf.decay_all();
        }
    }

    // mean * (n + 1) == g + n * (sum - g): the two ensemble aggregations
    // are exact rescalings of each other.
    #[test]
    fn mean_sum_parallel_identity(
        entries in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 1..6),
        g in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let mut buf = CriticalBuffer::koth(8, 0.9).unwrap();
        for (i, e) in entries.iter().enumerate() {
            buf.offer(Vector::new(e.clone()).unwrap(), i as u64).unwrap();
        }
        let g = Vector::new(g).unwrap();
        let mean = aggregate(&g, &buf, AggregationMode::Mean).unwrap();
        let sum = aggregate(&g, &buf, AggregationMode::Sum).unwrap();
        let n = buf.len() as f64;
        let lhs = mean.scale(n + 1.0);
        let rhs = g.axpy(n, &(&sum - &g));
        for i in 0..3 {
            prop_assert!((lhs[i] - rhs[i]).abs() < 1e-10);
        }
    }

    // Identical seeds give identical Gaussian vectors; distinct seeds
    // essentially never collide.
    #[test]
    fn gaussian_reproducibility(seed in 0u64..10_000) {
        let a = gaussian(&mut RandomState::new(seed), 6, 1.3).unwrap();
        let b = gaussian(&mut RandomState::new(seed), 6, 1.3).unwrap();
        prop_assert_eq!(a.as_slice(), b.as_slice());
    }

    // Config serialization round-trips exactly.
    #[test]
    fn config_json_round_trip(
        steps in 0u64..5000,
        topc in 0usize..30,
        decay in 0.0f64..0.99,
        lr in 0.0001f64..1.0,
        threshold in prop::option::of(1e-9f64..1.0),
    ) {
        let mut config = ExperimentConfig::default_quadratic();
        config.steps = steps;
        config.buffer.topc = topc;
        config.buffer.decay = decay;
        config.optimizer.lr = lr;
        config.loss_threshold = threshold;
        let back = ExperimentConfig::from_json(&config.to_json()).unwrap();
        prop_assert_eq!(config, back);
    }
}
