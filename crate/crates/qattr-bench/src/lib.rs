//! Shared fixture builders for the criterion benchmarks.

use qattr_core::encoding::{EncodedInput, EncodingMode, FitPolicy};
use qattr_core::model::{Activation, AnsatzSpec, ObservableSpec, QuantumModel};
use qattr_core::rng::seeded_rng;
use qattr_core::statevector::{Circuit, Gate, StateVector};
use rand::Rng;

/// Deterministic pseudo-random model in the shipped configuration shape.
pub fn bench_model(n_qubits: usize, n_layers: usize, seed: u64) -> QuantumModel {
    let ansatz = AnsatzSpec::new(n_qubits, n_layers);
    let mut rng = seeded_rng(seed);
    let theta: Vec<f64> = (0..ansatz.parameter_count())
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect();
    QuantumModel::new(
        ansatz,
        theta,
        ObservableSpec::z(0),
        Activation::Tanh,
        EncodingMode::AmplitudeOverflow {
            n_qubits,
            fit_policy: FitPolicy::TruncateLast,
        },
    )
    .unwrap()
}

pub fn bench_pixels(n_qubits: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..(1usize << n_qubits) - 1)
        .map(|_| rng.random::<f64>() * 0.8)
        .collect()
}

pub fn bench_input(model: &QuantumModel, seed: u64) -> EncodedInput {
    model
        .encode(&bench_pixels(model.n_qubits(), seed))
        .unwrap()
}

/// A layered circuit of rotations and CNOTs for raw gate-throughput runs.
pub fn layered_circuit(n_qubits: usize, layers: usize) -> Circuit {
    let mut circuit = Circuit::new(n_qubits);
    for layer in 0..layers {
        for q in 0..n_qubits {
            circuit
                .push(Gate::rx(q, 0.1 + layer as f64 * 0.01 + q as f64 * 0.02))
                .unwrap();
        }
        for q in 0..n_qubits - 1 {
            circuit.push(Gate::cnot(q, q + 1)).unwrap();
        }
    }
    circuit
}

pub fn zero_state(n_qubits: usize) -> StateVector {
    StateVector::zero_state(n_qubits).unwrap()
}
