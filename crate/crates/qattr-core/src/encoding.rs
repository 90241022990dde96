//! Feature-to-state encoders: overflow amplitude embedding, plain normalized
//! amplitude embedding, basis-state preparation and angle embedding, plus the
//! multiplexed-rotation synthesis that turns a real amplitude vector into a
//! preparation circuit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statevector::{run_circuit, Circuit, Control, Gate, StateError, StateVector};

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("feature {index} = {value} outside [0, 1]")]
    FeatureOutOfRange { index: usize, value: f64 },
    #[error("{got} features exceed capacity {capacity} for {n_qubits} qubits")]
    TooManyFeatures {
        got: usize,
        capacity: usize,
        n_qubits: usize,
    },
    #[error("input has zero norm; normalized embedding needs a non-degenerate vector")]
    ZeroNorm,
    #[error("target amplitudes are not normalized (Σ a² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("expected an amplitude-mode input")]
    NotAmplitudeMode,
    #[error(transparent)]
    State(#[from] StateError),
}

/// What to do when the feature count does not fit `2^n - 1` overflow slots
/// (e.g. 64 pixels against 63 slots at 6 qubits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitPolicy {
    /// Drop trailing features until they fit (typically a background corner).
    TruncateLast,
    /// Size the register up instead; encoding still rejects overlong input.
    PadNextQubit,
    /// Fall back to plain normalized embedding over all `2^n` slots.
    PlainNormalize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodingMode {
    AmplitudeOverflow {
        n_qubits: usize,
        fit_policy: FitPolicy,
    },
    AmplitudeNormalized {
        n_qubits: usize,
    },
    Angle {
        n_qubits: usize,
    },
}

impl EncodingMode {
    pub fn n_qubits(&self) -> usize {
        match *self {
            EncodingMode::AmplitudeOverflow { n_qubits, .. }
            | EncodingMode::AmplitudeNormalized { n_qubits }
            | EncodingMode::Angle { n_qubits } => n_qubits,
        }
    }

    pub fn is_amplitude(&self) -> bool {
        !matches!(self, EncodingMode::Angle { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EncodedData {
    /// Real amplitude vector of length `2^n`.
    Amplitudes(Vec<f64>),
    /// One rotation angle per qubit.
    Angles(Vec<f64>),
}

/// A raw feature vector together with its encoding mode and resulting state
/// data.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedInput {
    pub raw_features: Vec<f64>,
    pub mode: EncodingMode,
    pub data: EncodedData,
}

impl EncodedInput {
    pub fn amplitudes(&self) -> Option<&[f64]> {
        match &self.data {
            EncodedData::Amplitudes(a) => Some(a),
            EncodedData::Angles(_) => None,
        }
    }

    /// The overflow amplitude (last slot), if this is an overflow encoding.
    pub fn overflow_amplitude(&self) -> Option<f64> {
        match (&self.mode, &self.data) {
            (EncodingMode::AmplitudeOverflow { .. }, EncodedData::Amplitudes(a)) => {
                a.last().copied()
            }
            _ => None,
        }
    }

    /// Materialize the encoded state.
    pub fn state_vector(&self) -> Result<StateVector, EncodingError> {
        match &self.data {
            EncodedData::Amplitudes(a) => {
                Ok(StateVector::from_real_amplitudes(self.mode.n_qubits(), a)?)
            }
            EncodedData::Angles(angles) => {
                let circuit = angle_circuit(angles, self.mode.n_qubits())?;
                let zero = StateVector::zero_state(self.mode.n_qubits())?;
                Ok(run_circuit(&circuit, &zero)?)
            }
        }
    }
}

/// Scale applied to each pixel in the overflow embedding: `(2^n - 1)^(-1/2)`.
pub fn overflow_scale(n_qubits: usize) -> f64 {
    1.0 / (((1usize << n_qubits) - 1) as f64).sqrt()
}

fn check_range(features: &[f64]) -> Result<(), EncodingError> {
    for (index, &value) in features.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(EncodingError::FeatureOutOfRange { index, value });
        }
    }
    Ok(())
}

/// Overflow amplitude embedding: `a_i = s·x_i` over `2^n - 1` slots with the
/// last slot absorbing the leftover norm.
pub fn encode_amplitude_overflow(
    features: &[f64],
    n_qubits: usize,
) -> Result<EncodedInput, EncodingError> {
    check_range(features)?;
    let dim = 1usize << n_qubits;
    let capacity = dim - 1;
    if features.len() > capacity {
        return Err(EncodingError::TooManyFeatures {
            got: features.len(),
            capacity,
            n_qubits,
        });
    }
    let s = overflow_scale(n_qubits);
    let mut amps = vec![0.0; dim];
    let mut used = 0.0;
    for (i, &f) in features.iter().enumerate() {
        let a = s * f;
        amps[i] = a;
        used += a * a;
    }
    amps[dim - 1] = (1.0 - used).max(0.0).sqrt();
    Ok(EncodedInput {
        raw_features: features.to_vec(),
        mode: EncodingMode::AmplitudeOverflow {
            n_qubits,
            fit_policy: FitPolicy::TruncateLast,
        },
        data: EncodedData::Amplitudes(amps),
    })
}

/// Plain normalized amplitude embedding: `a = x / ‖x‖` over `2^n` slots.
pub fn encode_amplitude_normalized(
    features: &[f64],
    n_qubits: usize,
) -> Result<EncodedInput, EncodingError> {
    let dim = 1usize << n_qubits;
    if features.len() > dim {
        return Err(EncodingError::TooManyFeatures {
            got: features.len(),
            capacity: dim,
            n_qubits,
        });
    }
    let norm: f64 = features.iter().map(|f| f * f).sum::<f64>().sqrt();
    if norm <= 0.0 {
        return Err(EncodingError::ZeroNorm);
    }
    let mut amps = vec![0.0; dim];
    for (i, &f) in features.iter().enumerate() {
        amps[i] = f / norm;
    }
    Ok(EncodedInput {
        raw_features: features.to_vec(),
        mode: EncodingMode::AmplitudeNormalized { n_qubits },
        data: EncodedData::Amplitudes(amps),
    })
}

/// Angle embedding: one feature per qubit, stored as rotation angles.
pub fn encode_angle(features: &[f64], n_qubits: usize) -> Result<EncodedInput, EncodingError> {
    if features.len() > n_qubits {
        return Err(EncodingError::TooManyFeatures {
            got: features.len(),
            capacity: n_qubits,
            n_qubits,
        });
    }
    Ok(EncodedInput {
        raw_features: features.to_vec(),
        mode: EncodingMode::Angle { n_qubits },
        data: EncodedData::Angles(features.to_vec()),
    })
}

/// The angle-embedding preparation circuit: `RX(x_i)` on qubit `i`.
pub fn encode_angle_circuit(features: &[f64], n_qubits: usize) -> Result<Circuit, EncodingError> {
    if features.len() > n_qubits {
        return Err(EncodingError::TooManyFeatures {
            got: features.len(),
            capacity: n_qubits,
            n_qubits,
        });
    }
    angle_circuit(features, n_qubits)
}

fn angle_circuit(angles: &[f64], n_qubits: usize) -> Result<Circuit, EncodingError> {
    let mut circuit = Circuit::new(n_qubits);
    for (q, &angle) in angles.iter().enumerate() {
        circuit.push(Gate::rx(q, angle))?;
    }
    Ok(circuit)
}

/// Encode features under `mode`, applying the mode's fit policy.
pub fn encode(mode: &EncodingMode, features: &[f64]) -> Result<EncodedInput, EncodingError> {
    match *mode {
        EncodingMode::AmplitudeOverflow {
            n_qubits,
            fit_policy,
        } => {
            let capacity = (1usize << n_qubits) - 1;
            let mut encoded = if features.len() > capacity {
                match fit_policy {
                    FitPolicy::TruncateLast => {
                        encode_amplitude_overflow(&features[..capacity], n_qubits)?
                    }
                    FitPolicy::PlainNormalize => {
                        return encode_amplitude_normalized(features, n_qubits)
                    }
                    FitPolicy::PadNextQubit => {
                        return Err(EncodingError::TooManyFeatures {
                            got: features.len(),
                            capacity,
                            n_qubits,
                        })
                    }
                }
            } else {
                encode_amplitude_overflow(features, n_qubits)?
            };
            encoded.raw_features = features.to_vec();
            encoded.mode = *mode;
            Ok(encoded)
        }
        EncodingMode::AmplitudeNormalized { n_qubits } => {
            encode_amplitude_normalized(features, n_qubits)
        }
        EncodingMode::Angle { n_qubits } => encode_angle(features, n_qubits),
    }
}

/// Pick an overflow encoding for `feature_count` features, honoring the fit
/// policy when `requested_qubits` slots are too few.
pub fn resolve_overflow_encoding(
    feature_count: usize,
    requested_qubits: usize,
    fit_policy: FitPolicy,
) -> EncodingMode {
    match fit_policy {
        FitPolicy::TruncateLast => EncodingMode::AmplitudeOverflow {
            n_qubits: requested_qubits,
            fit_policy,
        },
        FitPolicy::PadNextQubit => {
            let mut n = requested_qubits.max(1);
            while (1usize << n) - 1 < feature_count {
                n += 1;
            }
            EncodingMode::AmplitudeOverflow {
                n_qubits: n,
                fit_policy,
            }
        }
        FitPolicy::PlainNormalize => {
            let mut n = requested_qubits.max(1);
            while (1usize << n) < feature_count {
                n += 1;
            }
            EncodingMode::AmplitudeNormalized { n_qubits: n }
        }
    }
}

/// The computational basis state `|b_k⟩`.
pub fn prepare_basis_state(k: usize, n_qubits: usize) -> Result<StateVector, EncodingError> {
    Ok(StateVector::basis_state(n_qubits, k)?)
}

/// The circuit-level analog `V(b_k)`: X on each qubit whose bit in `b_k` is 1.
pub fn basis_state_circuit(k: usize, n_qubits: usize) -> Result<Circuit, EncodingError> {
    if k >= (1usize << n_qubits) {
        return Err(EncodingError::State(StateError::BasisIndexOutOfRange {
            index: k,
            dim: 1 << n_qubits,
        }));
    }
    let mut circuit = Circuit::new(n_qubits);
    for q in 0..n_qubits {
        if crate::statevector::bit_of(k, n_qubits, q) {
            circuit.push(Gate::x(q))?;
        }
    }
    Ok(circuit)
}

/// Synthesize a preparation circuit `V(x)` with `V(x)|0…0⟩ = |x⟩` for a real,
/// normalized amplitude-mode input.
pub fn amplitude_state_preparation_circuit(
    target: &EncodedInput,
) -> Result<Circuit, EncodingError> {
    let amps = target
        .amplitudes()
        .ok_or(EncodingError::NotAmplitudeMode)?;
    state_preparation_circuit_real(amps, target.mode.n_qubits())
}

/// Recursive binary-split multiplexed-rotation synthesis for a real
/// normalized amplitude vector. Signs are absorbed by the leaf rotations, so
/// the prepared state equals the target exactly (no residual global phase).
pub fn state_preparation_circuit_real(
    amps: &[f64],
    n_qubits: usize,
) -> Result<Circuit, EncodingError> {
    let dim = 1usize << n_qubits;
    if amps.len() != dim {
        return Err(EncodingError::State(StateError::DimensionMismatch {
            expected: dim,
            actual: amps.len(),
        }));
    }
    let norm_sqr: f64 = amps.iter().map(|a| a * a).sum();
    if (norm_sqr - 1.0).abs() > 1e-8 {
        return Err(EncodingError::NotNormalized { norm_sqr });
    }

    // mass[l][p] = Σ amps² over the subtree with qubit-0..l-1 prefix p.
    let mut mass: Vec<Vec<f64>> = Vec::with_capacity(n_qubits + 1);
    mass.push(amps.iter().map(|a| a * a).collect());
    for _ in 0..n_qubits {
        let prev = mass.last().unwrap();
        let folded: Vec<f64> = prev.chunks(2).map(|pair| pair[0] + pair[1]).collect();
        mass.push(folded);
    }
    mass.reverse(); // mass[l] now has 2^l entries.

    let mut circuit = Circuit::new(n_qubits);
    for level in 0..n_qubits {
        let massful: Vec<usize> = (0..(1usize << level))
            .filter(|&p| mass[level][p] > 0.0)
            .collect();
        for &prefix in &massful {
            // Child values: non-negative subtree norms internally, signed
            // amplitudes at the leaves (this is where signs enter).
            let (c0, c1) = if level == n_qubits - 1 {
                (amps[2 * prefix], amps[2 * prefix + 1])
            } else {
                (
                    mass[level + 1][2 * prefix].sqrt(),
                    mass[level + 1][2 * prefix + 1].sqrt(),
                )
            };
            // Controls on the full prefix; omitted when the state has support
            // on a single branch, which keeps basis targets a pure X pattern.
            let controls: Vec<Control> = if massful.len() == 1 {
                Vec::new()
            } else {
                (0..level)
                    .map(|q| Control {
                        qubit: q,
                        trigger: prefix & (1 << (level - 1 - q)) != 0,
                    })
                    .collect()
            };
            if c1 == 0.0 && c0 > 0.0 {
                continue; // identity branch
            }
            if c0 == 0.0 && c1 > 0.0 {
                circuit.push(Gate::x(level).with_controls(&controls))?;
                continue;
            }
            let theta = 2.0 * c1.atan2(c0);
            // RY(θ) from the available gate set: RZ(π/2)·RX(θ)·RZ(-π/2).
            let half_pi = std::f64::consts::FRAC_PI_2;
            circuit.push(Gate::rz(level, -half_pi).with_controls(&controls))?;
            circuit.push(Gate::rx(level, theta).with_controls(&controls))?;
            circuit.push(Gate::rz(level, half_pi).with_controls(&controls))?;
        }
    }
    Ok(circuit)
}
