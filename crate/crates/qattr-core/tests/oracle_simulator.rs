//! Simulator correctness against the dense-matrix oracle and sampling
//! consistency against exact marginals.

mod common;

use common::*;
use num_complex::Complex64;
use qattr_core::statevector::{
    apply_gate, measure_probability, run_circuit, sample_counts, Gate, StateVector,
};
use rand::Rng;

#[test]
fn random_controlled_unitary_matches_dense_product() {
    let mut rng = seeded(101);
    for trial in 0..20 {
        let u = random_unitary(4, &mut rng);
        let gate = Gate::unitary(vec![0, 1], u);
        let amps = random_complex_state(2, &mut rng);
        let state = StateVector::from_amplitudes(2, amps.clone()).unwrap();
        let fast = apply_gate(&state, &gate).unwrap();
        let dense = dense_gate_matrix(&gate, 2);
        let expected = mat_vec(&dense, &amps);
        assert!(
            max_abs_diff(fast.amplitudes(), &expected) < 1e-12,
            "trial {trial}"
        );
    }
}

#[test]
fn random_circuits_match_dense_oracle_up_to_six_qubits() {
    let mut rng = seeded(202);
    for n in 2..=6 {
        for trial in 0..6 {
            let circuit = random_circuit(n, 14, &mut rng);
            let amps = random_complex_state(n, &mut rng);
            let initial = StateVector::from_amplitudes(n, amps.clone()).unwrap();
            let fast = run_circuit(&circuit, &initial).unwrap();
            let dense = dense_circuit_matrix(&circuit);
            let expected = mat_vec(&dense, &amps);
            let err = max_abs_diff(fast.amplitudes(), &expected);
            assert!(err < 1e-9, "n={n} trial={trial} err={err}");
        }
    }
}

#[test]
fn twenty_gate_circuit_matches_oracle_on_six_qubits() {
    let mut rng = seeded(303);
    let circuit = random_circuit(6, 20, &mut rng);
    let initial = StateVector::zero_state(6).unwrap();
    let fast = run_circuit(&circuit, &initial).unwrap();
    let dense = dense_circuit_matrix(&circuit);
    let mut basis = vec![Complex64::ZERO; 64];
    basis[0] = Complex64::ONE;
    let expected = mat_vec(&dense, &basis);
    assert!(max_abs_diff(fast.amplitudes(), &expected) < 1e-10);
}

#[test]
fn eight_qubit_circuits_stay_within_oracle_tolerance() {
    let mut rng = seeded(404);
    let circuit = random_circuit(8, 16, &mut rng);
    let amps = random_complex_state(8, &mut rng);
    let initial = StateVector::from_amplitudes(8, amps.clone()).unwrap();
    let fast = run_circuit(&circuit, &initial).unwrap();
    let expected = mat_vec(&dense_circuit_matrix(&circuit), &amps);
    assert!(max_abs_diff(fast.amplitudes(), &expected) < 1e-9);
}

#[test]
fn kron_construction_agrees_with_columnwise_oracle() {
    let mut rng = seeded(505);
    for _ in 0..30 {
        let n = rng.random_range(2..=4);
        let mut gate = loop {
            let g = random_gate(n, &mut rng);
            if g.targets.len() == 1 {
                break g;
            }
        };
        if gate.controls.is_empty() && rng.random::<bool>() {
            let ctrl = (gate.targets[0] + 1) % n;
            if !gate.targets.contains(&ctrl) {
                gate = gate.with_control(ctrl, rng.random::<bool>());
            }
        }
        let a = dense_gate_matrix(&gate, n);
        let b = kron_gate_matrix(&gate, n);
        for (row_a, row_b) in a.iter().zip(&b) {
            assert!(max_abs_diff(row_a, row_b) < 1e-12);
        }
    }
}

#[test]
fn control_on_zero_trigger_ignores_set_control_bit() {
    // Exhaustive on basis states: a trigger-0 controlled gate acts exactly
    // on the half of the basis where the control bit is clear.
    let mut rng = seeded(606);
    let u = random_unitary(2, &mut rng);
    for trigger in [false, true] {
        let gate = Gate::unitary(vec![2], u.clone()).with_control(0, trigger);
        for k in 0..8usize {
            let state = StateVector::basis_state(3, k).unwrap();
            let out = apply_gate(&state, &gate).unwrap();
            let control_set = k & 0b100 != 0;
            if control_set != trigger {
                assert_eq!(out, state, "k={k} trigger={trigger} should be untouched");
            } else {
                let moved = max_abs_diff(out.amplitudes(), state.amplitudes());
                // Random unitaries are never accidentally identity.
                assert!(moved > 1e-3, "k={k} trigger={trigger} should act");
            }
        }
    }
}

#[test]
fn sampled_frequencies_track_exact_marginals() {
    let mut rng = seeded(707);
    let shots = 100_000u64;
    for trial in 0..20 {
        let n = rng.random_range(1..=4);
        let circuit = random_circuit(n, 10, &mut rng);
        let state = run_circuit(&circuit, &StateVector::zero_state(n).unwrap()).unwrap();
        let subset: Vec<usize> = (0..n).collect();
        let counts = sample_counts(&state, &subset, shots, 9_000 + trial).unwrap();
        for (outcome, &count) in counts.iter().enumerate() {
            let bits: Vec<bool> = (0..n).map(|q| outcome & (1 << (n - 1 - q)) != 0).collect();
            let p = measure_probability(&state, &subset, &bits).unwrap();
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            let freq = count as f64 / shots as f64;
            assert!(
                (freq - p).abs() <= 4.0 * sigma + 1e-9,
                "trial {trial} outcome {outcome}: freq {freq} vs p {p}"
            );
        }
    }
}
