//! The trained model: hardware-efficient ansatz construction, Pauli-string
//! observable, forward evaluation of the expectation value and the optional
//! tanh output activation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{encode, EncodedInput, EncodingError, EncodingMode};
use crate::statevector::{
    qubit_mask, Circuit, Gate, StateError, StateVector, UnitaryMatrix,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("ansatz expects {expected} parameters, got {actual}")]
    ParameterCountMismatch { expected: usize, actual: usize },
    #[error("input encoding does not match the model encoding")]
    EncodingMismatch,
    #[error("observable needs at least one non-identity Pauli factor")]
    EmptyObservable,
    #[error("cannot parse observable string {0:?}")]
    ObservableParse(String),
    #[error("observable qubit {qubit} out of range for {n_qubits} qubits")]
    ObservableOutOfRange { qubit: usize, n_qubits: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("model file I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file format: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A Pauli-string observable (identity factors implicit). Hermitian and
/// unitary by construction, so its conjugation by the ansatz is itself a
/// valid circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableSpec {
    factors: BTreeMap<usize, Pauli>,
}

impl ObservableSpec {
    pub fn single(qubit: usize, pauli: Pauli) -> ObservableSpec {
        let mut factors = BTreeMap::new();
        factors.insert(qubit, pauli);
        ObservableSpec { factors }
    }

    /// The default observable: Z on qubit 0.
    pub fn z(qubit: usize) -> ObservableSpec {
        Self::single(qubit, Pauli::Z)
    }

    pub fn from_factors(factors: BTreeMap<usize, Pauli>) -> Result<ObservableSpec, ModelError> {
        if factors.is_empty() {
            return Err(ModelError::EmptyObservable);
        }
        Ok(ObservableSpec { factors })
    }

    pub fn factors(&self) -> &BTreeMap<usize, Pauli> {
        &self.factors
    }

    pub fn max_qubit(&self) -> usize {
        *self.factors.keys().last().expect("non-empty by invariant")
    }

    fn check_fits(&self, n_qubits: usize) -> Result<(), ModelError> {
        if self.max_qubit() >= n_qubits {
            return Err(ModelError::ObservableOutOfRange {
                qubit: self.max_qubit(),
                n_qubits,
            });
        }
        Ok(())
    }

    /// `O|ψ⟩`, computed by direct amplitude manipulation.
    pub fn apply_to(&self, state: &StateVector) -> Result<StateVector, ModelError> {
        let n = state.n_qubits();
        self.check_fits(n)?;
        let mut amps = state.amplitudes().to_vec();
        for (&qubit, &pauli) in &self.factors {
            let mask = qubit_mask(n, qubit);
            match pauli {
                Pauli::X => {
                    for base in 0..amps.len() {
                        if base & mask == 0 {
                            amps.swap(base, base | mask);
                        }
                    }
                }
                Pauli::Y => {
                    for base in 0..amps.len() {
                        if base & mask == 0 {
                            let hi = base | mask;
                            let a0 = amps[base];
                            let a1 = amps[hi];
                            amps[base] = -Complex64::I * a1;
                            amps[hi] = Complex64::I * a0;
                        }
                    }
                }
                Pauli::Z => {
                    for (k, amp) in amps.iter_mut().enumerate() {
                        if k & mask != 0 {
                            *amp = -*amp;
                        }
                    }
                }
            }
        }
        // Pauli strings are unitary, so the result is exactly normalized.
        Ok(StateVector::from_amplitudes(n, amps)?)
    }

    /// The observable as a gate sequence (for use inside controlled blocks).
    /// Z and Y need exact matrices, so they are emitted as unitary payloads;
    /// RZ(π) would differ by a global phase that turns relative under
    /// control.
    pub fn gates(&self) -> Vec<Gate> {
        self.factors
            .iter()
            .map(|(&qubit, &pauli)| match pauli {
                Pauli::X => Gate::x(qubit),
                Pauli::Y => Gate::unitary(vec![qubit], UnitaryMatrix::pauli_y()),
                Pauli::Z => Gate::unitary(vec![qubit], UnitaryMatrix::pauli_z()),
            })
            .collect()
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (qubit, pauli) in &self.factors {
            let letter = match pauli {
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{letter}{qubit}")?;
        }
        Ok(())
    }
}

impl FromStr for ObservableSpec {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::ObservableParse(s.to_string());
        let mut factors = BTreeMap::new();
        let mut chars = s.chars().peekable();
        while let Some(letter) = chars.next() {
            let pauli = match letter {
                'X' | 'x' => Pauli::X,
                'Y' | 'y' => Pauli::Y,
                'Z' | 'z' => Pauli::Z,
                _ => return Err(bad()),
            };
            let mut digits = String::new();
            while let Some(c) = chars.peek() {
                if c.is_ascii_digit() {
                    digits.push(*c);
                    chars.next();
                } else {
                    break;
                }
            }
            let qubit: usize = digits.parse().map_err(|_| bad())?;
            if factors.insert(qubit, pauli).is_some() {
                return Err(bad());
            }
        }
        Self::from_factors(factors).map_err(|_| bad())
    }
}

impl Serialize for ObservableSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ObservableSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    None,
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::None => x,
            Activation::Tanh => x.tanh(),
        }
    }

    /// d(activation)/dx at `x`.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::None => 1.0,
            Activation::Tanh => 1.0 - x.tanh() * x.tanh(),
        }
    }
}

/// Hardware-efficient ansatz layout: per layer, RX and RZ on every qubit
/// followed by a linear CNOT chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_layers: usize) -> AnsatzSpec {
        AnsatzSpec { n_qubits, n_layers }
    }

    /// One RX and one RZ angle per qubit per layer.
    pub fn parameter_count(&self) -> usize {
        2 * self.n_qubits * self.n_layers
    }
}

/// Build the ansatz circuit: for each layer, RX(θ) on every qubit, RZ(θ) on
/// every qubit, then the CNOT chain 0→1, 1→2, …, (n-2)→(n-1).
pub fn build_ansatz_circuit(spec: &AnsatzSpec, theta: &[f64]) -> Result<Circuit, ModelError> {
    if theta.len() != spec.parameter_count() {
        return Err(ModelError::ParameterCountMismatch {
            expected: spec.parameter_count(),
            actual: theta.len(),
        });
    }
    let n = spec.n_qubits;
    let mut circuit = Circuit::new(n);
    for layer in 0..spec.n_layers {
        let base = 2 * n * layer;
        for q in 0..n {
            circuit.push(Gate::rx(q, theta[base + q]))?;
        }
        for q in 0..n {
            circuit.push(Gate::rz(q, theta[base + n + q]))?;
        }
        for q in 0..n.saturating_sub(1) {
            circuit.push(Gate::cnot(q, q + 1))?;
        }
    }
    Ok(circuit)
}

/// Ansatz layout, parameter vector, observable and output activation; the
/// full classifier evaluated as `⟨x|U†(θ) O U(θ)|x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumModel {
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    pub observable: ObservableSpec,
    pub activation: Activation,
    pub encoding: EncodingMode,
}

/// Pre-activation expectation and activated output of one forward pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub expectation: f64,
    pub output: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub label: i8,
    pub score: f64,
}

impl QuantumModel {
    pub fn new(
        ansatz: AnsatzSpec,
        theta: Vec<f64>,
        observable: ObservableSpec,
        activation: Activation,
        encoding: EncodingMode,
    ) -> Result<QuantumModel, ModelError> {
        if theta.len() != ansatz.parameter_count() {
            return Err(ModelError::ParameterCountMismatch {
                expected: ansatz.parameter_count(),
                actual: theta.len(),
            });
        }
        observable.check_fits(ansatz.n_qubits)?;
        Ok(QuantumModel {
            ansatz,
            theta,
            observable,
            activation,
            encoding,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.ansatz.n_qubits
    }

    pub fn circuit(&self) -> Result<Circuit, ModelError> {
        build_ansatz_circuit(&self.ansatz, &self.theta)
    }

    pub fn encode(&self, features: &[f64]) -> Result<EncodedInput, EncodingError> {
        encode(&self.encoding, features)
    }

    /// Expectation `⟨ψ|U†OU|ψ⟩` for an already-prepared input state.
    pub fn expectation_of_state(&self, state: &StateVector) -> Result<f64, ModelError> {
        let mut evolved = state.clone();
        for gate in self.circuit()?.gates() {
            evolved.apply_gate_mut(gate)?;
        }
        let observed = self.observable.apply_to(&evolved)?;
        Ok(evolved.inner_product(&observed)?.re)
    }
}

/// Forward pass: expectation value of Eq-style model output plus activation.
pub fn evaluate(model: &QuantumModel, input: &EncodedInput) -> Result<Evaluation, ModelError> {
    if input.mode != model.encoding {
        return Err(ModelError::EncodingMismatch);
    }
    let state = input.state_vector()?;
    let expectation = model.expectation_of_state(&state)?;
    Ok(Evaluation {
        expectation,
        output: model.activation.apply(expectation),
    })
}

/// The circuit realizing `U†(θ) O U(θ)`: ansatz gates, observable gates, then
/// the inverted ansatz. Usable as a controlled block.
pub fn conjugated_observable_circuit(model: &QuantumModel) -> Result<Circuit, ModelError> {
    let ansatz = model.circuit()?;
    let mut circuit = Circuit::new(model.n_qubits());
    circuit.extend_from(&ansatz)?;
    for gate in model.observable.gates() {
        circuit.push(gate)?;
    }
    circuit.extend_from(&ansatz.inverse())?;
    Ok(circuit)
}

/// Binary decision: label = sign of the activated score, ties broken to +1.
pub fn classify(model: &QuantumModel, raw_features: &[f64]) -> Result<Classification, ModelError> {
    let input = model.encode(raw_features)?;
    let eval = evaluate(model, &input)?;
    Ok(Classification {
        label: if eval.output < 0.0 { -1 } else { 1 },
        score: eval.output,
    })
}

/// Model persistence metadata; field names are part of the format contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub dataset: String,
    pub accuracy: Option<f64>,
}

/// On-disk model document. Exact field names are part of the format
/// contract: `{ansatz, theta, observable, activation, encoding, metadata}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    pub observable: ObservableSpec,
    pub activation: Activation,
    pub encoding: EncodingMode,
    pub metadata: ModelMetadata,
}

impl ModelFile {
    pub fn from_model(model: &QuantumModel, metadata: ModelMetadata) -> ModelFile {
        ModelFile {
            ansatz: model.ansatz,
            theta: model.theta.clone(),
            observable: model.observable.clone(),
            activation: model.activation,
            encoding: model.encoding,
            metadata,
        }
    }

    pub fn to_model(&self) -> Result<QuantumModel, ModelError> {
        QuantumModel::new(
            self.ansatz,
            self.theta.clone(),
            self.observable.clone(),
            self.activation,
            self.encoding,
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ModelFile, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::FitPolicy;
    use crate::statevector::GateKind;
    use approx::assert_abs_diff_eq;

    fn overflow_mode(n_qubits: usize) -> EncodingMode {
        EncodingMode::AmplitudeOverflow {
            n_qubits,
            fit_policy: FitPolicy::TruncateLast,
        }
    }

    fn zero_layer_model(n_qubits: usize) -> QuantumModel {
        QuantumModel::new(
            AnsatzSpec::new(n_qubits, 0),
            vec![],
            ObservableSpec::z(0),
            Activation::None,
            overflow_mode(n_qubits),
        )
        .unwrap()
    }

    #[test]
    fn ansatz_gate_count() {
        let spec = AnsatzSpec::new(6, 1);
        let circuit = build_ansatz_circuit(&spec, &vec![0.0; spec.parameter_count()]).unwrap();
        // 12 rotations + 5 CNOTs for one 6-qubit layer.
        assert_eq!(circuit.len(), 17);
        let spec = AnsatzSpec::new(4, 3);
        let circuit = build_ansatz_circuit(&spec, &vec![0.1; spec.parameter_count()]).unwrap();
        assert_eq!(circuit.len(), (2 * 4 + 3) * 3);
    }

    #[test]
    fn zero_angle_single_layer_acts_as_cnot_chain() {
        let spec = AnsatzSpec::new(2, 1);
        let circuit = build_ansatz_circuit(&spec, &[0.0; 4]).unwrap();
        let out = crate::statevector::run_circuit(&circuit, &StateVector::zero_state(2).unwrap())
            .unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ansatz_rejects_wrong_parameter_count() {
        assert!(matches!(
            build_ansatz_circuit(&AnsatzSpec::new(3, 2), &[0.0; 5]),
            Err(ModelError::ParameterCountMismatch { .. })
        ));
    }

    #[test]
    fn zero_layer_expectation_is_z_eigenvalue() {
        let model = zero_layer_model(2);
        // |00⟩: qubit 0 bit is 0 → F = +1.
        let zero = StateVector::zero_state(2).unwrap();
        assert_abs_diff_eq!(model.expectation_of_state(&zero).unwrap(), 1.0, epsilon = 1e-12);
        // Measured qubit bit 1 → F = -1.
        let flipped = StateVector::basis_state(2, 0b10).unwrap();
        assert_abs_diff_eq!(
            model.expectation_of_state(&flipped).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn conjugated_circuit_of_bare_observable_is_pauli_gate() {
        let model = zero_layer_model(2);
        let circuit = conjugated_observable_circuit(&model).unwrap();
        assert_eq!(circuit.len(), 1);
        assert!(matches!(circuit.gates()[0].kind, GateKind::Unitary(_)));
        assert_eq!(circuit.gates()[0].targets, vec![0]);
    }

    #[test]
    fn conjugated_circuit_squares_to_identity_on_basis_states() {
        let model = QuantumModel::new(
            AnsatzSpec::new(3, 2),
            (0..12).map(|i| 0.3 + 0.17 * i as f64).collect(),
            ObservableSpec::z(0),
            Activation::None,
            overflow_mode(3),
        )
        .unwrap();
        let circuit = conjugated_observable_circuit(&model).unwrap();
        for k in 0..8 {
            let basis = StateVector::basis_state(3, k).unwrap();
            let once = crate::statevector::run_circuit(&circuit, &basis).unwrap();
            let twice = crate::statevector::run_circuit(&circuit, &once).unwrap();
            for (a, b) in twice.amplitudes().iter().zip(basis.amplitudes()) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn classify_signs_and_tie_break() {
        let model = zero_layer_model(2);
        // Blank features → pure overflow state |11⟩ → qubit 0 bit 1 → F = -1.
        let c = classify(&model, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(c.label, -1);
        assert!(c.score < 0.0);
        // Tie goes to +1.
        assert_eq!(if 0.0f64 < 0.0 { -1 } else { 1 }, 1);
    }

    #[test]
    fn tanh_activation_applied_to_output() {
        let model = QuantumModel {
            activation: Activation::Tanh,
            ..zero_layer_model(2)
        };
        let input = model.encode(&[0.0, 0.0, 0.0]).unwrap();
        let eval = evaluate(&model, &input).unwrap();
        assert_abs_diff_eq!(eval.expectation, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eval.output, (-1.0f64).tanh(), epsilon = 1e-12);
    }

    #[test]
    fn observable_string_roundtrip() {
        let o: ObservableSpec = "Z0".parse().unwrap();
        assert_eq!(o, ObservableSpec::z(0));
        assert_eq!(o.to_string(), "Z0");
        let o: ObservableSpec = "X1Z3".parse().unwrap();
        assert_eq!(o.to_string(), "X1Z3");
        assert!("".parse::<ObservableSpec>().is_err());
        assert!("Q2".parse::<ObservableSpec>().is_err());
    }

    #[test]
    fn model_file_format_contract() {
        let model = QuantumModel::new(
            AnsatzSpec::new(2, 1),
            vec![0.1, 0.2, 0.3, 0.4],
            ObservableSpec::z(0),
            Activation::Tanh,
            overflow_mode(2),
        )
        .unwrap();
        let file = ModelFile::from_model(
            &model,
            ModelMetadata {
                seed: 7,
                dataset: "bars_and_stripes".into(),
                accuracy: Some(0.95),
            },
        );
        let json = serde_json::to_string(&file).unwrap();
        for field in [
            "\"ansatz\"",
            "\"n_qubits\"",
            "\"n_layers\"",
            "\"theta\"",
            "\"observable\":\"Z0\"",
            "\"activation\":\"tanh\"",
            "\"encoding\"",
            "\"kind\":\"amplitude_overflow\"",
            "\"metadata\"",
            "\"seed\"",
            "\"dataset\"",
            "\"accuracy\"",
        ] {
            assert!(json.contains(field), "missing {field} in {json}");
        }
        let parsed: ModelFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        assert_eq!(parsed.to_model().unwrap(), model);
    }
}
