//! Shared test oracles, independent of the simulator's amplitude-dispatch
//! implementation: dense matrices built index-wise from the gate
//! definitions, Kronecker-product construction for single-qubit gates, and
//! finite-difference gradients of the dense bilinear form.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use qattr_core::encoding::{EncodingMode, FitPolicy};
use qattr_core::model::{
    build_ansatz_circuit, Activation, AnsatzSpec, ObservableSpec, Pauli, QuantumModel,
};
use qattr_core::rng::seeded_rng;
use qattr_core::statevector::{bit_of, Circuit, Gate, GateKind, UnitaryMatrix};

pub type Matrix = Vec<Vec<Complex64>>;

pub fn zeros(dim: usize) -> Matrix {
    vec![vec![Complex64::ZERO; dim]; dim]
}

pub fn identity(dim: usize) -> Matrix {
    let mut m = zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::ONE;
    }
    m
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let dim = a.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik == Complex64::ZERO {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn dagger(m: &Matrix) -> Matrix {
    let dim = m.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out[j][i] = m[i][j].conj();
        }
    }
    out
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (da, db) = (a.len(), b.len());
    let mut out = zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Definitional 2×2 matrices, written out independently of the simulator.
pub fn base_matrix_2x2(kind: &GateKind) -> Matrix {
    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    match kind {
        GateKind::H => {
            let h = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
            vec![vec![h, h], vec![h, -h]]
        }
        GateKind::X => vec![vec![z, one], vec![one, z]],
        GateKind::SDag => vec![vec![one, z], vec![z, Complex64::new(0.0, -1.0)]],
        GateKind::Rx(t) => {
            let c = Complex64::new((t / 2.0).cos(), 0.0);
            let s = Complex64::new(0.0, -(t / 2.0).sin());
            vec![vec![c, s], vec![s, c]]
        }
        GateKind::Rz(t) => vec![
            vec![Complex64::from_polar(1.0, -t / 2.0), z],
            vec![z, Complex64::from_polar(1.0, t / 2.0)],
        ],
        _ => panic!("not a single-qubit kind"),
    }
}

fn payload_matrix(gate: &Gate) -> Matrix {
    match &gate.kind {
        GateKind::Cnot => {
            // Over targets [control, target], first target = payload MSB.
            let z = Complex64::ZERO;
            let one = Complex64::ONE;
            vec![
                vec![one, z, z, z],
                vec![z, one, z, z],
                vec![z, z, z, one],
                vec![z, z, one, z],
            ]
        }
        GateKind::Unitary(u) => {
            let d = u.dim();
            (0..d)
                .map(|i| (0..d).map(|j| u.elems()[i * d + j]).collect())
                .collect()
        }
        kind => base_matrix_2x2(kind),
    }
}

/// The full `2^n × 2^n` matrix of one gate, built column-by-column from the
/// definition of controlled unitaries: columns whose control bits match the
/// triggers get the payload action on the target bits; other columns are
/// identity.
pub fn dense_gate_matrix(gate: &Gate, n_qubits: usize) -> Matrix {
    let dim = 1usize << n_qubits;
    let payload = payload_matrix(gate);
    let t = gate.targets.len();
    let mut out = zeros(dim);
    for col in 0..dim {
        let matches = gate
            .controls
            .iter()
            .all(|c| bit_of(col, n_qubits, c.qubit) == c.trigger);
        if !matches {
            out[col][col] = Complex64::ONE;
            continue;
        }
        let col_bits: usize = (0..t)
            .map(|j| (bit_of(col, n_qubits, gate.targets[j]) as usize) << (t - 1 - j))
            .sum();
        for row_bits in 0..(1 << t) {
            let entry = payload[row_bits][col_bits];
            if entry == Complex64::ZERO {
                continue;
            }
            let mut row = col;
            for j in 0..t {
                let mask = 1 << (n_qubits - 1 - gate.targets[j]);
                if row_bits & (1 << (t - 1 - j)) != 0 {
                    row |= mask;
                } else {
                    row &= !mask;
                }
            }
            out[row][col] = entry;
        }
    }
    out
}

/// Kronecker-product construction for (optionally controlled) single-qubit
/// gates: the independent cross-check of [`dense_gate_matrix`].
pub fn kron_gate_matrix(gate: &Gate, n_qubits: usize) -> Matrix {
    assert_eq!(gate.targets.len(), 1, "kron oracle covers 1-target gates");
    let base = match &gate.kind {
        GateKind::Unitary(u) => {
            assert_eq!(u.dim(), 2);
            vec![
                vec![u.elems()[0], u.elems()[1]],
                vec![u.elems()[2], u.elems()[3]],
            ]
        }
        kind => base_matrix_2x2(kind),
    };
    let proj0 = vec![
        vec![Complex64::ONE, Complex64::ZERO],
        vec![Complex64::ZERO, Complex64::ZERO],
    ];
    let proj1 = vec![
        vec![Complex64::ZERO, Complex64::ZERO],
        vec![Complex64::ZERO, Complex64::ONE],
    ];
    let eye = identity(2);
    let n_ctrl = gate.controls.len();
    let mut total = zeros(1 << n_qubits);
    for pattern in 0..(1usize << n_ctrl) {
        let fires = (0..n_ctrl).all(|i| {
            let bit = pattern & (1 << i) != 0;
            bit == gate.controls[i].trigger
        });
        let mut term = vec![vec![Complex64::ONE]];
        for q in 0..n_qubits {
            let factor = if let Some(i) = gate.controls.iter().position(|c| c.qubit == q) {
                if pattern & (1 << i) != 0 {
                    &proj1
                } else {
                    &proj0
                }
            } else if q == gate.targets[0] && fires {
                &base
            } else {
                &eye
            };
            term = kron(&term, factor);
        }
        for i in 0..total.len() {
            for j in 0..total.len() {
                total[i][j] += term[i][j];
            }
        }
    }
    total
}

pub fn dense_circuit_matrix(circuit: &Circuit) -> Matrix {
    let mut total = identity(1 << circuit.n_qubits());
    for gate in circuit.gates() {
        total = mat_mul(&dense_gate_matrix(gate, circuit.n_qubits()), &total);
    }
    total
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Random unitary from Gram-Schmidt over a complex Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> UnitaryMatrix {
    let normal = Normal::new(0.0, 1.0).unwrap();
    loop {
        let mut cols: Vec<Vec<Complex64>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
                    .collect()
            })
            .collect();
        let mut ok = true;
        for i in 0..dim {
            for j in 0..i {
                let proj: Complex64 = cols[j]
                    .iter()
                    .zip(&cols[i])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for k in 0..dim {
                    let adjust = proj * cols[j][k];
                    cols[i][k] -= adjust;
                }
            }
            let norm: f64 = cols[i].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for k in 0..dim {
                cols[i][k] /= norm;
            }
        }
        if !ok {
            continue;
        }
        let mut elems = vec![Complex64::ZERO; dim * dim];
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                elems[i * dim + j] = v;
            }
        }
        if let Ok(u) = UnitaryMatrix::new(dim, elems) {
            return u;
        }
    }
}

pub fn random_complex_state(n_qubits: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut amps: Vec<Complex64> = (0..1usize << n_qubits)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    amps
}

pub fn random_real_state(n_qubits: usize, rng: &mut impl Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut amps: Vec<f64> = (0..1usize << n_qubits).map(|_| normal.sample(rng)).collect();
    let norm: f64 = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    amps
}

/// Pixel vectors in [0, 1] sized for the overflow slots of `n_qubits`.
pub fn random_pixels(n_qubits: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..(1usize << n_qubits) - 1)
        .map(|_| rng.random::<f64>() * 0.8)
        .collect()
}

fn pick_qubit(free: &mut Vec<usize>, rng: &mut impl Rng) -> usize {
    let i = rng.random_range(0..free.len());
    free.swap_remove(i)
}

/// A random gate drawing from every kind, including controlled payloads.
pub fn random_gate(n_qubits: usize, rng: &mut impl Rng) -> Gate {
    let mut free: Vec<usize> = (0..n_qubits).collect();
    let angle = rng.random::<f64>() * std::f64::consts::TAU - std::f64::consts::PI;
    let mut gate = match rng.random_range(0..8) {
        0 => Gate::h(pick_qubit(&mut free, rng)),
        1 => Gate::x(pick_qubit(&mut free, rng)),
        2 => Gate::s_dag(pick_qubit(&mut free, rng)),
        3 => Gate::rx(pick_qubit(&mut free, rng), angle),
        4 => Gate::rz(pick_qubit(&mut free, rng), angle),
        5 if n_qubits >= 2 => {
            let control = pick_qubit(&mut free, rng);
            let target = pick_qubit(&mut free, rng);
            Gate::cnot(control, target)
        }
        6 if n_qubits >= 2 => {
            let targets = vec![pick_qubit(&mut free, rng), pick_qubit(&mut free, rng)];
            Gate::unitary(targets, random_unitary(4, rng))
        }
        _ => Gate::unitary(vec![pick_qubit(&mut free, rng)], random_unitary(2, rng)),
    };
    if !free.is_empty() && rng.random::<f64>() < 0.4 {
        gate = gate.with_control(pick_qubit(&mut free, rng), rng.random::<bool>());
    }
    gate
}

pub fn random_circuit(n_qubits: usize, len: usize, rng: &mut impl Rng) -> Circuit {
    let mut circuit = Circuit::new(n_qubits);
    for _ in 0..len {
        circuit.push(random_gate(n_qubits, rng)).unwrap();
    }
    circuit
}

pub fn amplitude_mode(n_qubits: usize) -> EncodingMode {
    EncodingMode::AmplitudeOverflow {
        n_qubits,
        fit_policy: FitPolicy::TruncateLast,
    }
}

pub fn random_observable(n_qubits: usize, rng: &mut impl Rng) -> ObservableSpec {
    let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
    let qubit = rng.random_range(0..n_qubits);
    let mut spec = ObservableSpec::single(qubit, paulis[rng.random_range(0..3)]);
    if n_qubits > 1 && rng.random::<f64>() < 0.3 {
        let other = (qubit + 1 + rng.random_range(0..n_qubits - 1)) % n_qubits;
        let mut factors = spec.factors().clone();
        factors.insert(other, paulis[rng.random_range(0..3)]);
        spec = ObservableSpec::from_factors(factors).unwrap();
    }
    spec
}

pub fn random_model(n_qubits: usize, n_layers: usize, rng: &mut impl Rng) -> QuantumModel {
    let ansatz = AnsatzSpec::new(n_qubits, n_layers);
    let theta: Vec<f64> = (0..ansatz.parameter_count())
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU - std::f64::consts::PI)
        .collect();
    QuantumModel::new(
        ansatz,
        theta,
        random_observable(n_qubits, rng),
        Activation::None,
        amplitude_mode(n_qubits),
    )
    .unwrap()
}

pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    seeded_rng(seed)
}

const PAULI_DENSE: fn(Pauli) -> Matrix = |p| {
    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    match p {
        Pauli::X => vec![vec![z, one], vec![one, z]],
        Pauli::Y => vec![
            vec![z, Complex64::new(0.0, -1.0)],
            vec![Complex64::new(0.0, 1.0), z],
        ],
        Pauli::Z => vec![vec![one, z], vec![z, -one]],
    }
};

/// Dense observable matrix by Kronecker products of definitional Paulis.
pub fn dense_observable(spec: &ObservableSpec, n_qubits: usize) -> Matrix {
    let mut total = vec![vec![Complex64::ONE]];
    for q in 0..n_qubits {
        let factor = match spec.factors().get(&q) {
            Some(&p) => PAULI_DENSE(p),
            None => identity(2),
        };
        total = kron(&total, &factor);
    }
    total
}

/// Dense `U†OU` for the bilinear-form oracle, built from the dense ansatz
/// matrix rather than the simulator.
pub fn dense_conjugated_observable(model: &QuantumModel) -> Matrix {
    let ansatz = build_ansatz_circuit(&model.ansatz, &model.theta).unwrap();
    let u = dense_circuit_matrix(&ansatz);
    let o = dense_observable(&model.observable, model.n_qubits());
    mat_mul(&dagger(&u), &mat_mul(&o, &u))
}

/// The raw bilinear form `F(a) = Re(a† Õ a)`, defined for any (not
/// necessarily normalized) vector.
pub fn bilinear_value(tilde: &Matrix, a: &[Complex64]) -> f64 {
    let oa = mat_vec(tilde, a);
    a.iter()
        .zip(&oa)
        .map(|(x, y)| (x.conj() * y).re)
        .sum()
}

/// Central finite differences of the bilinear form over the real amplitude
/// coordinates (renormalization deliberately excluded).
pub fn fd_bilinear_gradient(tilde: &Matrix, a: &[f64], step: f64) -> Vec<f64> {
    (0..a.len())
        .map(|k| {
            let mut plus: Vec<Complex64> =
                a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let mut minus = plus.clone();
            plus[k] += step;
            minus[k] -= step;
            (bilinear_value(tilde, &plus) - bilinear_value(tilde, &minus)) / (2.0 * step)
        })
        .collect()
}
