use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qattr_bench::{layered_circuit, zero_state};
use qattr_core::statevector::run_circuit;

fn gate_throughput(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_circuit");
    for n_qubits in [6usize, 10, 14] {
        let circuit = layered_circuit(n_qubits, 4);
        let initial = zero_state(n_qubits);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n_qubits}q")),
            &circuit,
            |b, circuit| b.iter(|| run_circuit(black_box(circuit), black_box(&initial)).unwrap()),
        );
    }
    group.finish();
}

fn state_preparation(c: &mut Criterion) {
    let mut group = c.benchmark_group("state_preparation");
    for n_qubits in [4usize, 6, 8] {
        let pixels = qattr_bench::bench_pixels(n_qubits, 5);
        let encoded =
            qattr_core::encoding::encode_amplitude_overflow(&pixels, n_qubits).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n_qubits}q")),
            &encoded,
            |b, encoded| {
                b.iter(|| {
                    qattr_core::encoding::amplitude_state_preparation_circuit(black_box(encoded))
                        .unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, gate_throughput, state_preparation);
criterion_main!(benches);
