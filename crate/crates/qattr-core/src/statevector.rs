//! Dense statevector simulator: state allocation, gate application,
//! controlled unitaries, measurement probabilities and shot sampling.
//!
//! # Bit ordering
//!
//! Basis index `k` corresponds to the bitstring `b_k` with **qubit 0 as the
//! most significant bit**: the bit of qubit `q` in an `n`-qubit index is
//! `(k >> (n - 1 - q)) & 1`. This is the single place the convention is
//! defined; every other module goes through [`qubit_mask`] / [`bit_of`].

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::rng::seeded_rng;

/// Hard cap on register width; a dense state above this is not worth holding.
pub const MAX_QUBITS: usize = 16;

/// Tolerance used for norm and unitarity checks.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    InvalidQubitCount(usize),
    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndexOutOfRange { index: usize, dim: usize },
    #[error("expected {expected} amplitudes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("gate targets and controls must be distinct qubits")]
    OverlappingIndices,
    #[error("matrix is not unitary (max |U†U - I| = {deviation:.3e})")]
    NonUnitary { deviation: f64 },
    #[error("state is not normalized (Σ|amp|² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("outcome length {outcome} does not match subset size {subset}")]
    OutcomeLengthMismatch { outcome: usize, subset: usize },
}

/// Bit mask selecting qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// Value of qubit `q` in basis index `k` of an `n`-qubit register.
#[inline]
pub fn bit_of(index: usize, n_qubits: usize, qubit: usize) -> bool {
    index & qubit_mask(n_qubits, qubit) != 0
}

/// Dense complex amplitude vector of length `2^n` with unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state `|0…0⟩`.
    pub fn zero_state(n_qubits: usize) -> Result<Self, StateError> {
        Self::basis_state(n_qubits, 0)
    }

    /// The computational basis state `|b_k⟩`.
    pub fn basis_state(n_qubits: usize, k: usize) -> Result<Self, StateError> {
        check_qubit_count(n_qubits)?;
        let dim = 1 << n_qubits;
        if k >= dim {
            return Err(StateError::BasisIndexOutOfRange { index: k, dim });
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[k] = Complex64::ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Build a state from explicit amplitudes; must already be normalized.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, StateError> {
        check_qubit_count(n_qubits)?;
        let dim = 1 << n_qubits;
        if amps.len() != dim {
            return Err(StateError::DimensionMismatch {
                expected: dim,
                actual: amps.len(),
            });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized { norm_sqr });
        }
        Ok(Self { n_qubits, amps })
    }

    /// Build a state from real amplitudes; must already be normalized.
    pub fn from_real_amplitudes(n_qubits: usize, amps: &[f64]) -> Result<Self, StateError> {
        Self::from_amplitudes(
            n_qubits,
            amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64, StateError> {
        if self.dim() != other.dim() {
            return Err(StateError::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Rotate the global phase so the first nonzero amplitude is real and
    /// non-negative. Makes state comparison a plain vector comparison.
    pub fn canonical_global_phase(&self) -> StateVector {
        let first = self
            .amps
            .iter()
            .find(|a| a.norm_sqr() > NORM_TOLERANCE * NORM_TOLERANCE);
        let phase = match first {
            Some(a) => a / a.norm(),
            None => Complex64::ONE,
        };
        StateVector {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a / phase).collect(),
        }
    }

    /// Apply a gate in place. Prefer this in hot loops; [`apply_gate`] is the
    /// value-returning variant.
    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<(), StateError> {
        gate.validate(self.n_qubits)?;
        match &gate.kind {
            GateKind::Cnot => {
                // CNOT is X on the second target, controlled on the first.
                let mut controls = gate.controls.clone();
                controls.push(Control {
                    qubit: gate.targets[0],
                    trigger: true,
                });
                self.apply_single(&single_qubit_matrix(&GateKind::X), gate.targets[1], &controls);
            }
            GateKind::Unitary(matrix) => {
                if gate.targets.len() == 1 {
                    let m = [
                        [matrix.elems[0], matrix.elems[1]],
                        [matrix.elems[2], matrix.elems[3]],
                    ];
                    self.apply_single(&m, gate.targets[0], &gate.controls);
                } else {
                    self.apply_multi(matrix, &gate.targets, &gate.controls);
                }
            }
            kind => {
                self.apply_single(&single_qubit_matrix(kind), gate.targets[0], &gate.controls);
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, m: &[[Complex64; 2]; 2], target: usize, controls: &[Control]) {
        let n = self.n_qubits;
        let t_mask = qubit_mask(n, target);
        let (ctrl_mask, trigger_pattern) = control_masks(n, controls);
        for base in 0..self.amps.len() {
            if base & t_mask != 0 || base & ctrl_mask != trigger_pattern {
                continue;
            }
            let hi = base | t_mask;
            let a0 = self.amps[base];
            let a1 = self.amps[hi];
            self.amps[base] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[hi] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_multi(&mut self, matrix: &UnitaryMatrix, targets: &[usize], controls: &[Control]) {
        let n = self.n_qubits;
        let t = targets.len();
        let block = 1 << t;
        // Payload index bit (t-1-j) belongs to targets[j], mirroring the
        // global MSB-first convention.
        let masks: Vec<usize> = targets.iter().map(|&q| qubit_mask(n, q)).collect();
        let all_targets: usize = masks.iter().sum();
        let (ctrl_mask, trigger_pattern) = control_masks(n, controls);
        let mut scratch = vec![Complex64::ZERO; block];
        for base in 0..self.amps.len() {
            if base & all_targets != 0 || base & ctrl_mask != trigger_pattern {
                continue;
            }
            let idx_of = |p: usize| -> usize {
                let mut idx = base;
                for (j, mask) in masks.iter().enumerate() {
                    if p & (1 << (t - 1 - j)) != 0 {
                        idx |= mask;
                    }
                }
                idx
            };
            for (row, slot) in scratch.iter_mut().enumerate() {
                let mut acc = Complex64::ZERO;
                for col in 0..block {
                    acc += matrix.elems[row * block + col] * self.amps[idx_of(col)];
                }
                *slot = acc;
            }
            for (row, value) in scratch.iter().enumerate() {
                self.amps[idx_of(row)] = *value;
            }
        }
    }
}

fn control_masks(n_qubits: usize, controls: &[Control]) -> (usize, usize) {
    let mut ctrl_mask = 0;
    let mut trigger_pattern = 0;
    for c in controls {
        let mask = qubit_mask(n_qubits, c.qubit);
        ctrl_mask |= mask;
        if c.trigger {
            trigger_pattern |= mask;
        }
    }
    (ctrl_mask, trigger_pattern)
}

fn check_qubit_count(n_qubits: usize) -> Result<(), StateError> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(StateError::InvalidQubitCount(n_qubits));
    }
    Ok(())
}

/// Dense square complex matrix, validated unitary at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    elems: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Build from row-major elements; `dim` must be a power of two and the
    /// matrix must satisfy `max |U†U - I| ≤ 1e-10`.
    pub fn new(dim: usize, elems: Vec<Complex64>) -> Result<Self, StateError> {
        if !dim.is_power_of_two() || elems.len() != dim * dim {
            return Err(StateError::DimensionMismatch {
                expected: dim * dim,
                actual: elems.len(),
            });
        }
        let mut deviation: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::ZERO;
                for k in 0..dim {
                    acc += elems[k * dim + i].conj() * elems[k * dim + j];
                }
                let expected = if i == j { Complex64::ONE } else { Complex64::ZERO };
                deviation = deviation.max((acc - expected).norm());
            }
        }
        if deviation > NORM_TOLERANCE {
            return Err(StateError::NonUnitary { deviation });
        }
        Ok(Self { dim, elems })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elems(&self) -> &[Complex64] {
        &self.elems
    }

    /// Conjugate transpose (the inverse, since the matrix is unitary).
    pub fn dagger(&self) -> UnitaryMatrix {
        let d = self.dim;
        let mut elems = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                elems[j * d + i] = self.elems[i * d + j].conj();
            }
        }
        UnitaryMatrix { dim: d, elems }
    }

    /// Phase gate S = diag(1, i); the inverse of the built-in S†.
    pub fn s() -> UnitaryMatrix {
        UnitaryMatrix {
            dim: 2,
            elems: vec![
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::I,
            ],
        }
    }

    /// Pauli Y = [[0, -i], [i, 0]].
    pub fn pauli_y() -> UnitaryMatrix {
        UnitaryMatrix {
            dim: 2,
            elems: vec![
                Complex64::ZERO,
                -Complex64::I,
                Complex64::I,
                Complex64::ZERO,
            ],
        }
    }

    /// Pauli Z = diag(1, -1).
    pub fn pauli_z() -> UnitaryMatrix {
        UnitaryMatrix {
            dim: 2,
            elems: vec![
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ZERO,
                -Complex64::ONE,
            ],
        }
    }
}

/// Control terminal: the gate fires only when `qubit` is measured-basis equal
/// to `trigger` (`true` ⇒ `|1⟩`-triggered, `false` ⇒ `|0⟩`-triggered).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub trigger: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    SDag,
    Rx(f64),
    Rz(f64),
    Cnot,
    Unitary(UnitaryMatrix),
}

/// A single circuit element: a base unitary over `targets`, optionally
/// predicated on `controls`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn h(qubit: usize) -> Gate {
        Gate::single(GateKind::H, qubit)
    }

    pub fn x(qubit: usize) -> Gate {
        Gate::single(GateKind::X, qubit)
    }

    pub fn s_dag(qubit: usize) -> Gate {
        Gate::single(GateKind::SDag, qubit)
    }

    pub fn rx(qubit: usize, theta: f64) -> Gate {
        Gate::single(GateKind::Rx(theta), qubit)
    }

    pub fn rz(qubit: usize, theta: f64) -> Gate {
        Gate::single(GateKind::Rz(theta), qubit)
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate {
            kind: GateKind::Cnot,
            targets: vec![control, target],
            controls: Vec::new(),
        }
    }

    pub fn unitary(targets: Vec<usize>, matrix: UnitaryMatrix) -> Gate {
        Gate {
            kind: GateKind::Unitary(matrix),
            targets,
            controls: Vec::new(),
        }
    }

    fn single(kind: GateKind, qubit: usize) -> Gate {
        Gate {
            kind,
            targets: vec![qubit],
            controls: Vec::new(),
        }
    }

    pub fn with_control(mut self, qubit: usize, trigger: bool) -> Gate {
        self.controls.push(Control { qubit, trigger });
        self
    }

    pub fn with_controls(mut self, controls: &[Control]) -> Gate {
        self.controls.extend_from_slice(controls);
        self
    }

    /// The inverse gate, with the same controls.
    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::H => GateKind::H,
            GateKind::X => GateKind::X,
            GateKind::SDag => GateKind::Unitary(UnitaryMatrix::s()),
            GateKind::Rx(theta) => GateKind::Rx(-theta),
            GateKind::Rz(theta) => GateKind::Rz(-theta),
            GateKind::Cnot => GateKind::Cnot,
            GateKind::Unitary(m) => GateKind::Unitary(m.dagger()),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), StateError> {
        let expected_targets = match &self.kind {
            GateKind::Cnot => 2,
            GateKind::Unitary(m) => {
                let t = self.targets.len();
                if m.dim() != 1 << t {
                    return Err(StateError::DimensionMismatch {
                        expected: 1 << t,
                        actual: m.dim(),
                    });
                }
                t
            }
            _ => 1,
        };
        if self.targets.len() != expected_targets {
            return Err(StateError::DimensionMismatch {
                expected: expected_targets,
                actual: self.targets.len(),
            });
        }
        let mut seen = 0usize;
        for &q in self.targets.iter().chain(self.controls.iter().map(|c| &c.qubit)) {
            if q >= n_qubits {
                return Err(StateError::QubitOutOfRange { qubit: q, n_qubits });
            }
            let mask = 1 << q;
            if seen & mask != 0 {
                return Err(StateError::OverlappingIndices);
            }
            seen |= mask;
        }
        Ok(())
    }
}

fn single_qubit_matrix(kind: &GateKind) -> [[Complex64; 2]; 2] {
    let zero = Complex64::ZERO;
    match kind {
        GateKind::H => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        GateKind::X => [[zero, Complex64::ONE], [Complex64::ONE, zero]],
        GateKind::SDag => [[Complex64::ONE, zero], [zero, -Complex64::I]],
        GateKind::Rx(theta) => {
            let c = Complex64::new((theta / 2.0).cos(), 0.0);
            let s = Complex64::new(0.0, -(theta / 2.0).sin());
            [[c, s], [s, c]]
        }
        GateKind::Rz(theta) => {
            let phase = Complex64::from_polar(1.0, theta / 2.0);
            [[phase.conj(), zero], [zero, phase]]
        }
        GateKind::Cnot | GateKind::Unitary(_) => unreachable!("handled by caller"),
    }
}

/// Ordered gate list over a fixed-width register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Circuit {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), StateError> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend_from(&mut self, other: &Circuit) -> Result<(), StateError> {
        for gate in &other.gates {
            self.push(gate.clone())?;
        }
        Ok(())
    }

    /// The inverse circuit: every gate inverted, order reversed.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Re-home the circuit onto a wider register (indices are unchanged; the
    /// extra qubits are appended after the existing ones) and predicate every
    /// gate on `controls`.
    pub fn controlled_on(
        &self,
        n_qubits: usize,
        controls: &[Control],
    ) -> Result<Circuit, StateError> {
        let mut out = Circuit::new(n_qubits);
        for gate in &self.gates {
            out.push(gate.clone().with_controls(controls))?;
        }
        Ok(out)
    }
}

/// Apply one gate, returning the new state.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector, StateError> {
    let mut out = state.clone();
    out.apply_gate_mut(gate)?;
    Ok(out)
}

/// Run a circuit on an initial state.
pub fn run_circuit(circuit: &Circuit, initial: &StateVector) -> Result<StateVector, StateError> {
    if circuit.n_qubits() != initial.n_qubits() {
        return Err(StateError::DimensionMismatch {
            expected: 1 << circuit.n_qubits(),
            actual: initial.dim(),
        });
    }
    let mut state = initial.clone();
    for gate in circuit.gates() {
        state.apply_gate_mut(gate)?;
    }
    debug_assert!((state.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
    Ok(state)
}

/// Probability of observing `outcome` on `qubit_subset` (first listed qubit
/// is the most significant outcome bit).
pub fn measure_probability(
    state: &StateVector,
    qubit_subset: &[usize],
    outcome: &[bool],
) -> Result<f64, StateError> {
    if outcome.len() != qubit_subset.len() {
        return Err(StateError::OutcomeLengthMismatch {
            outcome: outcome.len(),
            subset: qubit_subset.len(),
        });
    }
    let (mask, pattern) = subset_masks(state.n_qubits(), qubit_subset, outcome)?;
    let p: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(k, _)| k & mask == pattern)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

/// Exact marginal distribution over a qubit subset, indexed by outcome value
/// (first listed qubit is the most significant outcome bit).
pub fn marginal_distribution(
    state: &StateVector,
    qubit_subset: &[usize],
) -> Result<Vec<f64>, StateError> {
    let n = state.n_qubits();
    validate_subset(n, qubit_subset)?;
    let mut probs = vec![0.0; 1 << qubit_subset.len()];
    for (k, amp) in state.amplitudes().iter().enumerate() {
        let mut outcome = 0usize;
        for (pos, &q) in qubit_subset.iter().enumerate() {
            if bit_of(k, n, q) {
                outcome |= 1 << (qubit_subset.len() - 1 - pos);
            }
        }
        probs[outcome] += amp.norm_sqr();
    }
    Ok(probs)
}

/// Sample measurement shots over a qubit subset from the exact marginal
/// distribution. Returns a dense histogram indexed by outcome value.
/// Deterministic for a fixed seed.
pub fn sample_counts(
    state: &StateVector,
    qubit_subset: &[usize],
    shots: u64,
    seed: u64,
) -> Result<Vec<u64>, StateError> {
    if shots == 0 {
        return Err(StateError::ZeroShots);
    }
    let probs = marginal_distribution(state, qubit_subset)?;
    let total: f64 = probs.iter().sum();
    let mut rng = seeded_rng(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut picked = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                picked = i;
                break;
            }
        }
        counts[picked] += 1;
    }
    Ok(counts)
}

fn validate_subset(n_qubits: usize, subset: &[usize]) -> Result<(), StateError> {
    let mut seen = 0usize;
    for &q in subset {
        if q >= n_qubits {
            return Err(StateError::QubitOutOfRange {
                qubit: q,
                n_qubits,
            });
        }
        let mask = 1 << q;
        if seen & mask != 0 {
            return Err(StateError::OverlappingIndices);
        }
        seen |= mask;
    }
    Ok(())
}

fn subset_masks(
    n_qubits: usize,
    subset: &[usize],
    outcome: &[bool],
) -> Result<(usize, usize), StateError> {
    validate_subset(n_qubits, subset)?;
    let mut mask = 0;
    let mut pattern = 0;
    for (&q, &bit) in subset.iter().zip(outcome) {
        let m = qubit_mask(n_qubits, q);
        mask |= m;
        if bit {
            pattern |= m;
        }
    }
    Ok((mask, pattern))
}
