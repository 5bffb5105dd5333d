mod common;

use common::{as_vector, max_abs_diff, reference_evolve, spec};
use hqnc_core::quantum::{evolve, fidelity, initial_state, StateVector, Propagator};
use proptest::prelude::*;

fn fields(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn chain() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (1usize..=5).prop_flat_map(|n| (fields(n), 0.0..10.0f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary((h, t) in chain()) {
        let psi = evolve(&spec(&h, t), &initial_state(h.len()).unwrap()).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_dense_matrix_exponential((h, t) in chain()) {
        let psi = evolve(&spec(&h, t), &initial_state(h.len()).unwrap()).unwrap();
        let reference = reference_evolve(1.0, &h, t);
        let err = max_abs_diff(&as_vector(&psi), &reference);
        prop_assert!(err < 1e-9, "max amplitude error {err}");
    }

    #[test]
    fn fidelity_ignores_global_phase((h, t) in chain(), theta in -10.0..10.0f64, t2 in 0.0..5.0f64) {
        let psi0 = initial_state(h.len()).unwrap();
        let a = evolve(&spec(&h, t), &psi0).unwrap();
        let b = evolve(&spec(&h, t2), &psi0).unwrap();
        let f = fidelity(&a, &b).unwrap();
        let g = fidelity(&a.with_global_phase(theta), &b).unwrap();
        prop_assert!((f - g).abs() < 1e-12);
    }

    #[test]
    fn evolution_composes((h, t1) in chain(), t2 in 0.0..10.0f64) {
        let psi0 = initial_state(h.len()).unwrap();
        let direct = evolve(&spec(&h, t1 + t2), &psi0).unwrap();
        let first = evolve(&spec(&h, t1), &psi0).unwrap();
        let stepped = evolve(&spec(&h, t2), &first).unwrap();
        let err = max_abs_diff(&as_vector(&direct), &as_vector(&stepped));
        prop_assert!(err < 1e-9, "max amplitude error {err}");
    }

    #[test]
    fn odd_parity_amplitudes_vanish((h, t) in chain()) {
        let psi = evolve(&spec(&h, t), &initial_state(h.len()).unwrap()).unwrap();
        for (i, a) in psi.amplitudes().iter().enumerate() {
            if i.count_ones() % 2 == 1 {
                prop_assert!(a.norm() < 1e-10, "index {i} amplitude {a}");
            }
        }
    }

    #[test]
    fn single_qubit_states_differ_by_phase(h1 in -5.0..5.0f64, h2 in -5.0..5.0f64, t in 0.0..20.0f64) {
        let psi0 = initial_state(1).unwrap();
        let a = evolve(&spec(&[h1], t), &psi0).unwrap();
        let b = evolve(&spec(&[h2], t), &psi0).unwrap();
        prop_assert!((fidelity(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cached_propagator_matches_fresh_evolution((h, t) in chain(), t2 in 0.0..10.0f64) {
        let psi0 = initial_state(h.len()).unwrap();
        let prop = Propagator::new(&spec(&h, t)).unwrap();
        let cached = prop.evolve_for(&psi0, t2).unwrap();
        let fresh = evolve(&spec(&h, t2), &psi0).unwrap();
        prop_assert!(max_abs_diff(&as_vector(&cached), &as_vector(&fresh)) < 1e-10);
    }
}

#[test]
fn random_initial_states_stay_normalized() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for n in 1..=6 {
        let psi0 = StateVector::random(n, &mut rng).unwrap();
        let h: Vec<f64> = (0..n).map(|k| 0.3 * k as f64 - 0.5).collect();
        let psi = evolve(&spec(&h, 7.5), &psi0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-10);
    }
}
