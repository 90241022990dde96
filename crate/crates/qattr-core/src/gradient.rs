//! The four gradient backends: exact analytic input gradients, the
//! single-ancilla Hadamard-test estimator, the multi-ancilla parallel
//! estimator, and parameter-shift gradients.
//!
//! Amplitude-space input gradients are `∂F/∂c_k = 2·Re⟨b_k|U†OU|x⟩` (and the
//! imaginary counterpart `∂F/∂d_k = 2·Im⟨…⟩`); the Hadamard-test circuits
//! encode the same inner products into the ancilla-zero measurement
//! probability.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{
    basis_state_circuit, overflow_scale, state_preparation_circuit_real, EncodedInput,
    EncodingError, EncodingMode,
};
use crate::model::{conjugated_observable_circuit, ModelError, QuantumModel};
use crate::rng::derive_seed;
use crate::statevector::{
    marginal_distribution, measure_probability, run_circuit, sample_counts, Circuit, Control,
    Gate, StateError, StateVector, UnitaryMatrix,
};

/// Practical cap on parallelization ancillas (simulation width).
pub const MAX_ANCILLAS: usize = 4;

/// Overflow amplitudes below this are treated as a chain-rule singularity.
pub const OVERFLOW_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GradientError {
    #[error("operation requires an amplitude-encoded input")]
    AmplitudeInputRequired,
    #[error("operation requires an angle-encoded model")]
    AngleEncodingRequired,
    #[error("operation requires the overflow amplitude encoding")]
    OverflowEncodingRequired,
    #[error("parameter index {index} out of range for {count} parameters")]
    ParameterIndexOutOfRange { index: usize, count: usize },
    #[error("component index {index} out of range for dimension {dim}")]
    ComponentIndexOutOfRange { index: usize, dim: usize },
    #[error("component indices must be distinct")]
    DuplicateComponentIndices,
    #[error("{ancillas} ancillas provide slots for {expected} components, got {got}")]
    ComponentCountMismatch {
        ancillas: usize,
        expected: usize,
        got: usize,
    },
    #[error("ancilla count {0} outside supported range 1..={MAX_ANCILLAS}")]
    AncillaCountUnsupported(usize),
    #[error("gradient method {0:?} is not defined for this encoding")]
    MethodIncompatible(GradientMethod),
    #[error("overflow amplitude {overflow:.3e} too close to zero for the pixel chain rule")]
    OverflowSingularity { overflow: f64 },
    #[error("ancilla probabilities sum to {sum}, expected 1")]
    ProbabilitiesNotNormalized { sum: f64 },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Shot budget for an estimator: exact probabilities or sampled counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl Serialize for Shots {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => serializer.serialize_str("exact"),
            Shots::Finite(n) => serializer.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Shots;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a shot count or the string \"exact\"")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Shots, E> {
                Ok(Shots::Finite(v))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Shots, E> {
                if v < 0 {
                    return Err(E::custom("shot count must be non-negative"));
                }
                Ok(Shots::Finite(v as u64))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Shots, E> {
                if v.eq_ignore_ascii_case("exact") {
                    Ok(Shots::Exact)
                } else {
                    v.parse::<u64>()
                        .map(Shots::Finite)
                        .map_err(|_| E::custom(format!("bad shot budget {v:?}")))
                }
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

impl FromStr for Shots {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        s.parse::<u64>()
            .map(Shots::Finite)
            .map_err(|_| format!("bad shot budget {s:?} (expected a count or \"exact\")"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    Exact,
    HadamardSingle,
    HadamardMulti { ancillas: usize },
    ParamShift,
}

impl FromStr for GradientMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "exact" => Ok(GradientMethod::Exact),
            "hadamard-single" => Ok(GradientMethod::HadamardSingle),
            "param-shift" => Ok(GradientMethod::ParamShift),
            other => {
                if let Some(m) = other.strip_prefix("hadamard-multi:") {
                    let ancillas = m
                        .parse::<usize>()
                        .map_err(|_| format!("bad ancilla count in {s:?}"))?;
                    Ok(GradientMethod::HadamardMulti { ancillas })
                } else {
                    Err(format!(
                        "unknown gradient method {s:?} (expected exact, hadamard-single, \
                         hadamard-multi:<m> or param-shift)"
                    ))
                }
            }
        }
    }
}

/// Which part of the inner product a Hadamard test reads out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Real,
    Imag,
}

/// A gradient over amplitude indices (amplitude modes) or features (angle
/// mode), together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    pub values: Vec<f64>,
    pub method: GradientMethod,
    pub shots: Shots,
    pub seed: u64,
}

fn complex_amplitudes(input: &EncodedInput) -> Result<Vec<Complex64>, GradientError> {
    let amps = input
        .amplitudes()
        .ok_or(GradientError::AmplitudeInputRequired)?;
    Ok(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
}

/// `U†OU|x⟩`; reading component `k` of the result against `⟨b_k|` yields all
/// gradient inner products in one simulation pass.
fn conjugated_observable_applied(
    model: &QuantumModel,
    x: &[Complex64],
) -> Result<StateVector, GradientError> {
    let state = StateVector::from_amplitudes(model.n_qubits(), x.to_vec())?;
    let circuit = conjugated_observable_circuit(model)?;
    Ok(run_circuit(&circuit, &state)?)
}

/// Both gradient parts for a (possibly complex) amplitude vector:
/// `(2·Re⟨b_k|U†OU|x⟩, 2·Im⟨b_k|U†OU|x⟩)` for every `k` at once.
pub fn input_gradient_parts(
    model: &QuantumModel,
    x: &[Complex64],
) -> Result<(Vec<f64>, Vec<f64>), GradientError> {
    let phi = conjugated_observable_applied(model, x)?;
    let re = phi.amplitudes().iter().map(|a| 2.0 * a.re).collect();
    let im = phi.amplitudes().iter().map(|a| 2.0 * a.im).collect();
    Ok((re, im))
}

/// Exact analytic input gradient (real parts), one simulation pass for all
/// components.
pub fn exact_input_gradient(
    model: &QuantumModel,
    input: &EncodedInput,
) -> Result<GradientVector, GradientError> {
    let (re, _) = input_gradient_parts(model, &complex_amplitudes(input)?)?;
    Ok(GradientVector {
        values: re,
        method: GradientMethod::Exact,
        shots: Shots::Exact,
        seed: 0,
    })
}

/// Companion of [`exact_input_gradient`] returning the imaginary parts
/// (derivatives with respect to the imaginary amplitude components).
pub fn exact_input_gradient_imag(
    model: &QuantumModel,
    input: &EncodedInput,
) -> Result<GradientVector, GradientError> {
    let (_, im) = input_gradient_parts(model, &complex_amplitudes(input)?)?;
    Ok(GradientVector {
        values: im,
        method: GradientMethod::Exact,
        shots: Shots::Exact,
        seed: 0,
    })
}

/// A unitary whose first column is the (normalized) vector `x`, via a
/// Householder reflection. Used to realize `V(x)` for complex amplitudes,
/// where the multiplexed-rotation synthesis does not apply.
pub fn completion_unitary(x: &[Complex64]) -> Result<UnitaryMatrix, GradientError> {
    let d = x.len();
    let x0 = x[0];
    let alpha = if x0.norm() > 0.0 {
        -x0 / x0.norm()
    } else {
        -Complex64::ONE
    };
    let mut v: Vec<Complex64> = x.to_vec();
    v[0] -= alpha;
    let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let mut elems = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut r = if i == j { Complex64::ONE } else { Complex64::ZERO };
            r -= 2.0 * v[i] * v[j].conj() / vv;
            // Column 0 carries the diag(α, 1, …, 1) factor so U|0⟩ = x.
            elems[i * d + j] = if j == 0 { r * alpha } else { r };
        }
    }
    Ok(UnitaryMatrix::new(d, elems)?)
}

/// Preparation circuit for an arbitrary normalized amplitude vector. Real
/// vectors get the multiplexed-rotation synthesis; complex ones fall back to
/// a dense completion unitary over the data register.
pub fn preparation_circuit(
    amplitudes: &[Complex64],
    n_qubits: usize,
) -> Result<Circuit, GradientError> {
    if amplitudes.iter().all(|a| a.im.abs() <= 1e-14) {
        let real: Vec<f64> = amplitudes.iter().map(|a| a.re).collect();
        Ok(state_preparation_circuit_real(&real, n_qubits)?)
    } else {
        let mut circuit = Circuit::new(n_qubits);
        circuit.push(Gate::unitary(
            (0..n_qubits).collect(),
            completion_unitary(amplitudes)?,
        ))?;
        Ok(circuit)
    }
}

/// Assemble the single-ancilla Hadamard-test circuit for gradient component
/// `k` and return the final (n+1)-qubit state. The ancilla is the last qubit.
fn hadamard_test_state(
    model: &QuantumModel,
    x: &[Complex64],
    k: usize,
    part: Part,
) -> Result<StateVector, GradientError> {
    let n = model.n_qubits();
    let dim = 1usize << n;
    if k >= dim {
        return Err(GradientError::ComponentIndexOutOfRange { index: k, dim });
    }
    let ancilla = n;
    let n_total = n + 1;
    let on_one = [Control {
        qubit: ancilla,
        trigger: true,
    }];
    let on_zero = [Control {
        qubit: ancilla,
        trigger: false,
    }];

    let mut circuit = Circuit::new(n_total);
    circuit.push(Gate::h(ancilla))?;
    if part == Part::Imag {
        circuit.push(Gate::s_dag(ancilla))?;
    }
    circuit.extend_from(&preparation_circuit(x, n)?.controlled_on(n_total, &on_one)?)?;
    circuit.extend_from(&basis_state_circuit(k, n)?.controlled_on(n_total, &on_zero)?)?;
    circuit.extend_from(
        &conjugated_observable_circuit(model)?.controlled_on(n_total, &on_one)?,
    )?;
    circuit.push(Gate::h(ancilla))?;
    Ok(run_circuit(&circuit, &StateVector::zero_state(n_total)?)?)
}

/// Estimate one gradient component with the single-ancilla Hadamard test.
///
/// `P(A=0) = ½(1 + Re⟨b_k|U†OU|x⟩)`, so the component is `4·P̂(A=0) − 2`.
/// With `Part::Imag` an S† gate follows the first Hadamard and the circuit
/// reads out the imaginary part instead.
pub fn hadamard_test_gradient_component(
    model: &QuantumModel,
    input: &EncodedInput,
    k: usize,
    shots: Shots,
    seed: u64,
    part: Part,
) -> Result<f64, GradientError> {
    hadamard_component_for_amplitudes(model, &complex_amplitudes(input)?, k, shots, seed, part)
}

/// [`hadamard_test_gradient_component`] for a raw amplitude vector (allows
/// synthetic complex inputs).
pub fn hadamard_component_for_amplitudes(
    model: &QuantumModel,
    x: &[Complex64],
    k: usize,
    shots: Shots,
    seed: u64,
    part: Part,
) -> Result<f64, GradientError> {
    let state = hadamard_test_state(model, x, k, part)?;
    let ancilla = model.n_qubits();
    let p_zero = match shots {
        Shots::Exact => measure_probability(&state, &[ancilla], &[false])?,
        Shots::Finite(n) => {
            let counts = sample_counts(&state, &[ancilla], n, seed)?;
            counts[0] as f64 / n as f64
        }
    };
    Ok(4.0 * p_zero - 2.0)
}

/// The linear system tying the multi-ancilla outcome distribution to the
/// unknown gradient components:
/// `4^m·P(t) = 2^m + 2·Σ_j W[t][j]·Re g_j` with a Walsh sign pattern `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct AncillaLinearSystem {
    pub ancillas: usize,
    /// `2^m × (2^m − 1)` matrix of ±1 entries; columns are Walsh characters.
    pub sign_matrix: Vec<Vec<f64>>,
    /// Measured (or exact) ancilla outcome distribution, length `2^m`.
    pub probabilities: Vec<f64>,
    pub component_indices: Vec<usize>,
}

impl AncillaLinearSystem {
    pub fn new(
        ancillas: usize,
        probabilities: Vec<f64>,
        component_indices: Vec<usize>,
    ) -> Result<AncillaLinearSystem, GradientError> {
        if ancillas == 0 || ancillas > MAX_ANCILLAS {
            return Err(GradientError::AncillaCountUnsupported(ancillas));
        }
        let outcomes = 1usize << ancillas;
        if probabilities.len() != outcomes {
            return Err(GradientError::ProbabilitiesNotNormalized {
                sum: f64::NAN,
            });
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(GradientError::ProbabilitiesNotNormalized { sum });
        }
        if component_indices.len() != outcomes - 1 {
            return Err(GradientError::ComponentCountMismatch {
                ancillas,
                expected: outcomes - 1,
                got: component_indices.len(),
            });
        }
        let sign_matrix = (0..outcomes)
            .map(|t| {
                (0..outcomes - 1)
                    .map(|j| walsh_sign(j, t))
                    .collect::<Vec<f64>>()
            })
            .collect();
        Ok(AncillaLinearSystem {
            ancillas,
            sign_matrix,
            probabilities,
            component_indices,
        })
    }

    /// Least-squares solution for `Re g_j` over all `2^m` equations. The
    /// Walsh columns are mutually orthogonal with squared norm `2^m`, so the
    /// normal equations collapse to a single projection.
    pub fn solve(&self) -> Vec<f64> {
        let outcomes = 1usize << self.ancillas;
        let four_m = (outcomes * outcomes) as f64;
        let rhs: Vec<f64> = self
            .probabilities
            .iter()
            .map(|&p| (four_m * p - outcomes as f64) / 2.0)
            .collect();
        (0..outcomes - 1)
            .map(|j| {
                let dot: f64 = (0..outcomes)
                    .map(|t| self.sign_matrix[t][j] * rhs[t])
                    .sum();
                dot / outcomes as f64
            })
            .collect()
    }
}

/// Sign of component pattern `s = j` at ancilla outcome `t`:
/// `(-1)^(popcount(j & t) + popcount(t))`. The `popcount(t)` term comes from
/// the all-ones pattern reserved for the `U†OU|x⟩` branch.
fn walsh_sign(j: usize, t: usize) -> f64 {
    if ((j & t).count_ones() + t.count_ones()) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Final state of the m-ancilla parallel gradient circuit. Component `j` is
/// prepared behind ancilla pattern `j`; the all-ones pattern carries
/// `U†OU·V(x)`.
fn hadamard_multi_state(
    model: &QuantumModel,
    x: &[Complex64],
    component_indices: &[usize],
    ancillas: usize,
) -> Result<StateVector, GradientError> {
    let n = model.n_qubits();
    let dim = 1usize << n;
    if ancillas == 0 || ancillas > MAX_ANCILLAS {
        return Err(GradientError::AncillaCountUnsupported(ancillas));
    }
    let patterns = 1usize << ancillas;
    if component_indices.len() != patterns - 1 {
        return Err(GradientError::ComponentCountMismatch {
            ancillas,
            expected: patterns - 1,
            got: component_indices.len(),
        });
    }
    for (pos, &idx) in component_indices.iter().enumerate() {
        if idx >= dim {
            return Err(GradientError::ComponentIndexOutOfRange { index: idx, dim });
        }
        if component_indices[..pos].contains(&idx) {
            return Err(GradientError::DuplicateComponentIndices);
        }
    }

    let n_total = n + ancillas;
    let pattern_controls = |s: usize| -> Vec<Control> {
        (0..ancillas)
            .map(|j| Control {
                qubit: n + j,
                trigger: s & (1 << (ancillas - 1 - j)) != 0,
            })
            .collect()
    };

    let mut circuit = Circuit::new(n_total);
    for j in 0..ancillas {
        circuit.push(Gate::h(n + j))?;
    }
    let all_ones = pattern_controls(patterns - 1);
    circuit.extend_from(&preparation_circuit(x, n)?.controlled_on(n_total, &all_ones)?)?;
    for (s, &idx) in component_indices.iter().enumerate() {
        let controls = pattern_controls(s);
        circuit.extend_from(&basis_state_circuit(idx, n)?.controlled_on(n_total, &controls)?)?;
    }
    circuit.extend_from(
        &conjugated_observable_circuit(model)?.controlled_on(n_total, &all_ones)?,
    )?;
    for j in 0..ancillas {
        circuit.push(Gate::h(n + j))?;
    }
    Ok(run_circuit(&circuit, &StateVector::zero_state(n_total)?)?)
}

/// The measured (or exact) ancilla distribution of the parallel circuit,
/// wrapped as its linear system.
pub fn hadamard_multi_system(
    model: &QuantumModel,
    input: &EncodedInput,
    component_indices: &[usize],
    ancillas: usize,
    shots: Shots,
    seed: u64,
) -> Result<AncillaLinearSystem, GradientError> {
    let x = complex_amplitudes(input)?;
    let state = hadamard_multi_state(model, &x, component_indices, ancillas)?;
    let n = model.n_qubits();
    let subset: Vec<usize> = (n..n + ancillas).collect();
    let probabilities = match shots {
        Shots::Exact => marginal_distribution(&state, &subset)?,
        Shots::Finite(count) => {
            let counts = sample_counts(&state, &subset, count, seed)?;
            counts
                .iter()
                .map(|&c| c as f64 / count as f64)
                .collect()
        }
    };
    AncillaLinearSystem::new(ancillas, probabilities, component_indices.to_vec())
}

/// Estimate `2^m − 1` gradient components concurrently with `m` ancillas.
/// Returns the components (already scaled by 2) parallel to
/// `component_indices`.
pub fn hadamard_multi_gradient(
    model: &QuantumModel,
    input: &EncodedInput,
    component_indices: &[usize],
    ancillas: usize,
    shots: Shots,
    seed: u64,
) -> Result<Vec<f64>, GradientError> {
    let system = hadamard_multi_system(model, input, component_indices, ancillas, shots, seed)?;
    Ok(system.solve().iter().map(|g| 2.0 * g).collect())
}

/// Parameter-shift gradient `∂F/∂θ_i = ½·[F(θ_i + π/2) − F(θ_i − π/2)]` for
/// the selected rotation parameters (all ansatz parameters are RX/RZ, two
/// eigenvalues ±½, so r = ½ and s = π/2). Exact, not a finite difference.
pub fn parameter_shift_gradient(
    model: &QuantumModel,
    input: &EncodedInput,
    which: &[usize],
) -> Result<GradientVector, GradientError> {
    let count = model.theta.len();
    for &i in which {
        if i >= count {
            return Err(GradientError::ParameterIndexOutOfRange { index: i, count });
        }
    }
    let state = input.state_vector()?;
    let shift = std::f64::consts::FRAC_PI_2;
    let values = which
        .par_iter()
        .map(|&i| {
            let mut shifted = model.clone();
            shifted.theta[i] += shift;
            let plus = shifted.expectation_of_state(&state)?;
            shifted.theta[i] -= 2.0 * shift;
            let minus = shifted.expectation_of_state(&state)?;
            Ok(0.5 * (plus - minus))
        })
        .collect::<Result<Vec<f64>, GradientError>>()?;
    Ok(GradientVector {
        values,
        method: GradientMethod::ParamShift,
        shots: Shots::Exact,
        seed: 0,
    })
}

/// Input-feature gradient for angle-encoded models: the encoding rotations
/// are RX(x_i), so the parameter-shift rule applies to the features
/// themselves.
pub fn angle_feature_gradient(
    model: &QuantumModel,
    features: &[f64],
) -> Result<Vec<f64>, GradientError> {
    let EncodingMode::Angle { n_qubits } = model.encoding else {
        return Err(GradientError::AngleEncodingRequired);
    };
    if features.len() > n_qubits {
        return Err(GradientError::Encoding(EncodingError::TooManyFeatures {
            got: features.len(),
            capacity: n_qubits,
            n_qubits,
        }));
    }
    let shift = std::f64::consts::FRAC_PI_2;
    let expectation = |feats: &[f64]| -> Result<f64, GradientError> {
        let circuit = crate::encoding::encode_angle_circuit(feats, n_qubits)?;
        let state = run_circuit(&circuit, &StateVector::zero_state(n_qubits)?)?;
        Ok(model.expectation_of_state(&state)?)
    };
    (0..features.len())
        .into_par_iter()
        .map(|i| {
            let mut plus = features.to_vec();
            plus[i] += shift;
            let mut minus = features.to_vec();
            minus[i] -= shift;
            Ok(0.5 * (expectation(&plus)? - expectation(&minus)?))
        })
        .collect()
}

/// Full amplitude-space gradient through the chosen backend. Sampled
/// backends derive one seed per component (or per circuit for the parallel
/// estimator), so results are independent of evaluation order.
pub fn amplitude_gradient(
    model: &QuantumModel,
    input: &EncodedInput,
    method: GradientMethod,
    shots: Shots,
    seed: u64,
) -> Result<Vec<f64>, GradientError> {
    let dim = 1usize << model.n_qubits();
    match method {
        GradientMethod::Exact => Ok(exact_input_gradient(model, input)?.values),
        GradientMethod::HadamardSingle => (0..dim)
            .into_par_iter()
            .map(|k| {
                hadamard_test_gradient_component(
                    model,
                    input,
                    k,
                    shots,
                    derive_seed(seed, &[k as u64]),
                    Part::Real,
                )
            })
            .collect(),
        GradientMethod::HadamardMulti { ancillas } => {
            if ancillas == 0 || ancillas > MAX_ANCILLAS {
                return Err(GradientError::AncillaCountUnsupported(ancillas));
            }
            let group = (1usize << ancillas) - 1;
            if group >= dim {
                return Err(GradientError::ComponentCountMismatch {
                    ancillas,
                    expected: dim.saturating_sub(1),
                    got: group,
                });
            }
            let chunk_jobs: Vec<(usize, Vec<usize>)> = (0..dim)
                .step_by(group)
                .enumerate()
                .map(|(chunk_no, start)| {
                    let mut indices: Vec<usize> = (start..(start + group).min(dim)).collect();
                    // Pad short tail chunks with leading indices; their
                    // recovered values are discarded.
                    let mut filler = 0usize;
                    while indices.len() < group {
                        if !indices.contains(&filler) {
                            indices.push(filler);
                        }
                        filler += 1;
                    }
                    (chunk_no, indices)
                })
                .collect();
            let chunks: Vec<(Vec<usize>, Vec<f64>)> = chunk_jobs
                .par_iter()
                .map(|(chunk_no, indices)| {
                    let values = hadamard_multi_gradient(
                        model,
                        input,
                        indices,
                        ancillas,
                        shots,
                        derive_seed(seed, &[*chunk_no as u64]),
                    )?;
                    Ok((indices.clone(), values))
                })
                .collect::<Result<_, GradientError>>()?;
            let mut out = vec![0.0; dim];
            for (chunk_no, (indices, values)) in chunks.iter().enumerate() {
                let start = chunk_no * group;
                let real = (start + group).min(dim) - start;
                for pos in 0..real {
                    out[indices[pos]] = values[pos];
                }
            }
            Ok(out)
        }
        GradientMethod::ParamShift => Err(GradientError::MethodIncompatible(method)),
    }
}

/// Chain rule through the overflow encoding:
/// `∂F/∂p_i = s·G_i − (s²·p_i / a_of)·G_of`, with `s` the pixel scale,
/// `a_of` the overflow amplitude and `G` the amplitude-space gradient.
pub fn pixel_space_gradient(
    model: &QuantumModel,
    raw_features: &[f64],
    method: GradientMethod,
    shots: Shots,
    seed: u64,
) -> Result<Vec<f64>, GradientError> {
    let EncodingMode::AmplitudeOverflow { n_qubits, .. } = model.encoding else {
        return Err(GradientError::OverflowEncodingRequired);
    };
    let input = model.encode(raw_features)?;
    let overflow = input
        .overflow_amplitude()
        .ok_or(GradientError::OverflowEncodingRequired)?;
    if overflow <= OVERFLOW_EPSILON {
        return Err(GradientError::OverflowSingularity { overflow });
    }
    let gradient = amplitude_gradient(model, &input, method, shots, seed)?;
    let scale = overflow_scale(n_qubits);
    let capacity = (1usize << n_qubits) - 1;
    let g_overflow = gradient[capacity];
    let mut out = vec![0.0; raw_features.len()];
    for (i, slot) in out.iter_mut().enumerate().take(capacity.min(raw_features.len())) {
        *slot = scale * gradient[i] - (scale * scale * raw_features[i] / overflow) * g_overflow;
    }
    Ok(out)
}
