//! Integrated-gradients attribution over a straight-line path, with
//! selectable gradient backend, baseline handling and the completeness
//! check.
//!
//! `IG_i(x) = (x_i − x_i′) ∫₀¹ ∂F(x′ + α(x − x′))/∂x_i dα`, approximated by
//! a midpoint Riemann sum; the residual of the completeness axiom
//! (attributions sum to the output difference) is always recorded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{encode, EncodingError, EncodingMode};
use crate::gradient::{
    amplitude_gradient, angle_feature_gradient, pixel_space_gradient, GradientError,
    GradientMethod, Shots,
};
use crate::model::{evaluate, ModelError, QuantumModel};
use crate::rng::derive_seed;
use crate::statevector::StateVector;

#[derive(Debug, Error)]
pub enum AttributionError {
    #[error("baseline has {baseline} features, input has {input}")]
    BaselineDimensionMismatch { baseline: usize, input: usize },
    #[error("path_steps must be at least 1")]
    ZeroPathSteps,
    #[error("feature {index} = {value} outside [0, 1]")]
    FeatureOutOfRange { index: usize, value: f64 },
    #[error("gradient method {method:?} is not usable with encoding {encoding:?}")]
    MethodIncompatible {
        method: GradientMethod,
        encoding: EncodingMode,
    },
    #[error("amplitude-space attribution needs an amplitude encoding")]
    AmplitudeSpaceNeedsAmplitudeEncoding,
    #[error("pixel-space attribution is undefined for the plain normalized encoding")]
    PixelSpaceNeedsOverflowEncoding,
    #[error("interpolated amplitude vector vanishes on the path")]
    DegeneratePathPoint,
    #[error("overflow singularity on the path at alpha = {alpha}")]
    OverflowSingularityOnPath { alpha: f64 },
    #[error("similarity of a zero attribution vector is undefined")]
    ZeroVector,
    #[error("attribution maps have {a} and {b} scores")]
    SimilarityDimensionMismatch { a: usize, b: usize },
    #[error(transparent)]
    Gradient(#[from] GradientError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

/// Which coordinates attributions attach to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionSpace {
    /// Per-pixel scores through the encoding chain rule (the shipped
    /// default; this is what the heatmaps plot).
    Pixel,
    /// Scores attached to state amplitudes directly, for ablation.
    Amplitude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionConfig {
    /// Baseline in pixel space, same dimension as the input.
    pub baseline: Vec<f64>,
    /// Riemann resolution of the path integral.
    pub path_steps: usize,
    pub gradient_method: GradientMethod,
    pub shots: Shots,
    pub seed: u64,
    pub space: AttributionSpace,
}

impl AttributionConfig {
    /// Exact-gradient pixel-space attribution against the blank image.
    pub fn exact_blank_baseline(dim: usize, path_steps: usize) -> AttributionConfig {
        AttributionConfig {
            baseline: vec![0.0; dim],
            path_steps,
            gradient_method: GradientMethod::Exact,
            shots: Shots::Exact,
            seed: 0,
            space: AttributionSpace::Pixel,
        }
    }
}

/// Per-feature integrated-gradients scores with the residual of the
/// completeness axiom. Serialized as `{scores, residual, config, …}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionMap {
    pub scores: Vec<f64>,
    #[serde(rename = "residual")]
    pub completeness_residual: f64,
    pub config: AttributionConfig,
    pub model_output_at_x: f64,
    pub model_output_at_baseline: f64,
}

/// Anything integrated gradients can attribute: an output value and its
/// gradient at a point. Implemented for quantum models via
/// [`QuantumAttributionTarget`]; tests substitute analytic doubles.
pub trait DifferentiableOutput {
    fn output(&self, point: &[f64]) -> Result<f64, AttributionError>;
    /// Gradient of the output at `point`; `seed` feeds sampled backends.
    fn output_gradient(&self, point: &[f64], seed: u64) -> Result<Vec<f64>, AttributionError>;
}

/// Core midpoint-rule integrated gradients over an arbitrary differentiable
/// target. Coordinates are whatever the target exposes (pixels or
/// amplitudes).
pub fn integrated_gradients_for<T: DifferentiableOutput>(
    target: &T,
    features: &[f64],
    config: &AttributionConfig,
    point_of_alpha: impl Fn(f64) -> Vec<f64>,
) -> Result<AttributionMap, AttributionError> {
    if config.path_steps == 0 {
        return Err(AttributionError::ZeroPathSteps);
    }
    let dim = features.len();
    let steps = config.path_steps;
    let mut mean_gradient = vec![0.0; dim];
    for step in 0..steps {
        let alpha = (step as f64 + 0.5) / steps as f64;
        let point = point_of_alpha(alpha);
        let g = target
            .output_gradient(&point, derive_seed(config.seed, &[step as u64]))
            .map_err(|e| annotate_singularity(e, alpha))?;
        for (acc, gi) in mean_gradient.iter_mut().zip(&g) {
            *acc += gi / steps as f64;
        }
    }
    let start = point_of_alpha(0.0);
    let end = point_of_alpha(1.0);
    let scores: Vec<f64> = (0..dim)
        .map(|i| (end[i] - start[i]) * mean_gradient[i])
        .collect();
    let out_x = target.output(&end)?;
    let out_baseline = target.output(&start)?;
    let completeness_residual = (scores.iter().sum::<f64>() - (out_x - out_baseline)).abs();
    Ok(AttributionMap {
        scores,
        completeness_residual,
        config: config.clone(),
        model_output_at_x: out_x,
        model_output_at_baseline: out_baseline,
    })
}

fn annotate_singularity(e: AttributionError, alpha: f64) -> AttributionError {
    match e {
        AttributionError::Gradient(GradientError::OverflowSingularity { .. }) => {
            AttributionError::OverflowSingularityOnPath { alpha }
        }
        other => other,
    }
}

/// A quantum model exposed as a differentiable output in a chosen coordinate
/// space. The activation chain rule is folded into the gradient.
pub struct QuantumAttributionTarget<'a> {
    model: &'a QuantumModel,
    method: GradientMethod,
    shots: Shots,
    space: AttributionSpace,
}

impl QuantumAttributionTarget<'_> {
    fn pre_activation(&self, point: &[f64]) -> Result<f64, AttributionError> {
        match self.space {
            AttributionSpace::Pixel => {
                let input = encode(&self.model.encoding, point)?;
                Ok(evaluate(self.model, &input)?.expectation)
            }
            AttributionSpace::Amplitude => {
                // Bilinear extension: F(a) = ‖a‖²·F(â) for the interpolated
                // (generally non-normalized) amplitude vector.
                let norm_sqr: f64 = point.iter().map(|a| a * a).sum();
                if norm_sqr < 1e-24 {
                    return Err(AttributionError::DegeneratePathPoint);
                }
                let unit: Vec<f64> = point.iter().map(|a| a / norm_sqr.sqrt()).collect();
                let state = StateVector::from_real_amplitudes(self.model.n_qubits(), &unit)
                    .map_err(GradientError::from)?;
                Ok(norm_sqr * self.model.expectation_of_state(&state)?)
            }
        }
    }
}

impl DifferentiableOutput for QuantumAttributionTarget<'_> {
    fn output(&self, point: &[f64]) -> Result<f64, AttributionError> {
        Ok(self.model.activation.apply(self.pre_activation(point)?))
    }

    fn output_gradient(&self, point: &[f64], seed: u64) -> Result<Vec<f64>, AttributionError> {
        let raw = match self.space {
            AttributionSpace::Pixel => match self.model.encoding {
                EncodingMode::AmplitudeOverflow { .. } => {
                    pixel_space_gradient(self.model, point, self.method, self.shots, seed)?
                }
                EncodingMode::Angle { .. } => angle_feature_gradient(self.model, point)?,
                EncodingMode::AmplitudeNormalized { .. } => {
                    return Err(AttributionError::PixelSpaceNeedsOverflowEncoding)
                }
            },
            AttributionSpace::Amplitude => {
                let norm_sqr: f64 = point.iter().map(|a| a * a).sum();
                if norm_sqr < 1e-24 {
                    return Err(AttributionError::DegeneratePathPoint);
                }
                let norm = norm_sqr.sqrt();
                let unit: Vec<f64> = point.iter().map(|a| a / norm).collect();
                let input = crate::encoding::EncodedInput {
                    raw_features: unit.clone(),
                    mode: self.model.encoding,
                    data: crate::encoding::EncodedData::Amplitudes(unit),
                };
                let g = amplitude_gradient(self.model, &input, self.method, self.shots, seed)?;
                // Bilinear gradient: ∂F/∂a_k = 2⟨b_k|Õ a⟩ = ‖a‖·∂F/∂â_k.
                g.iter().map(|v| norm * v).collect()
            }
        };
        let chain = self.model.activation.derivative(self.pre_activation(point)?);
        Ok(raw.iter().map(|g| chain * g).collect())
    }
}

fn validate_method(model: &QuantumModel, method: GradientMethod) -> Result<(), AttributionError> {
    let compatible = match model.encoding {
        EncodingMode::Angle { .. } => matches!(method, GradientMethod::ParamShift),
        _ => !matches!(method, GradientMethod::ParamShift),
    };
    if compatible {
        Ok(())
    } else {
        Err(AttributionError::MethodIncompatible {
            method,
            encoding: model.encoding,
        })
    }
}

/// Resolve the amplitude-space coordinates of a pixel vector, substituting
/// the uniform state for the degenerate all-zero baseline of the plain
/// normalized encoding.
fn amplitude_coordinates(
    model: &QuantumModel,
    pixels: &[f64],
) -> Result<Vec<f64>, AttributionError> {
    let dim = 1usize << model.n_qubits();
    if matches!(model.encoding, EncodingMode::AmplitudeNormalized { .. })
        && pixels.iter().all(|&p| p == 0.0)
    {
        return Ok(vec![1.0 / (dim as f64).sqrt(); dim]);
    }
    let encoded = encode(&model.encoding, pixels)?;
    Ok(encoded
        .amplitudes()
        .ok_or(AttributionError::AmplitudeSpaceNeedsAmplitudeEncoding)?
        .to_vec())
}

/// Integrated-gradients attribution of `raw_features` against the
/// configured baseline.
pub fn integrated_gradients(
    model: &QuantumModel,
    raw_features: &[f64],
    config: &AttributionConfig,
) -> Result<AttributionMap, AttributionError> {
    if config.baseline.len() != raw_features.len() {
        return Err(AttributionError::BaselineDimensionMismatch {
            baseline: config.baseline.len(),
            input: raw_features.len(),
        });
    }
    for (index, &value) in raw_features.iter().chain(config.baseline.iter()).enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(AttributionError::FeatureOutOfRange {
                index: index % raw_features.len(),
                value,
            });
        }
    }
    validate_method(model, config.gradient_method)?;
    let target = QuantumAttributionTarget {
        model,
        method: config.gradient_method,
        shots: config.shots,
        space: config.space,
    };
    match config.space {
        AttributionSpace::Pixel => {
            if matches!(model.encoding, EncodingMode::AmplitudeNormalized { .. }) {
                return Err(AttributionError::PixelSpaceNeedsOverflowEncoding);
            }
            let x = raw_features.to_vec();
            let baseline = config.baseline.clone();
            integrated_gradients_for(&target, raw_features, config, move |alpha| {
                x.iter()
                    .zip(&baseline)
                    .map(|(&xi, &bi)| bi + alpha * (xi - bi))
                    .collect()
            })
        }
        AttributionSpace::Amplitude => {
            let x_amp = amplitude_coordinates(model, raw_features)?;
            let b_amp = amplitude_coordinates(model, &config.baseline)?;
            let features = x_amp.clone();
            integrated_gradients_for(&target, &features, config, move |alpha| {
                x_amp
                    .iter()
                    .zip(&b_amp)
                    .map(|(&xi, &bi)| bi + alpha * (xi - bi))
                    .collect()
            })
        }
    }
}

/// Scores scaled so max |score| = 1, sign preserved. The flag is true when
/// the map was all zeros and returned unchanged.
pub fn normalize_for_render(map: &AttributionMap) -> (Vec<f64>, bool) {
    let max_abs = map.scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if max_abs == 0.0 {
        return (map.scores.clone(), true);
    }
    (map.scores.iter().map(|s| s / max_abs).collect(), false)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub cosine: f64,
    pub rank_overlap_topk: f64,
}

/// Top-k index set by absolute score; k = 10% of the features, at least 4.
fn top_k_indices(scores: &[f64]) -> Vec<usize> {
    let k = top_k_count(scores.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .abs()
            .partial_cmp(&scores[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order
}

pub fn top_k_count(dim: usize) -> usize {
    ((dim as f64 * 0.1).ceil() as usize).max(4).min(dim)
}

/// Cosine similarity and shared top-k fraction of two attribution maps.
pub fn attribution_similarity(a: &[f64], b: &[f64]) -> Result<Similarity, AttributionError> {
    if a.len() != b.len() {
        return Err(AttributionError::SimilarityDimensionMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(AttributionError::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let top_a = top_k_indices(a);
    let top_b = top_k_indices(b);
    let shared = top_a.iter().filter(|i| top_b.contains(i)).count();
    Ok(Similarity {
        cosine: dot / (norm_a * norm_b),
        rank_overlap_topk: shared as f64 / top_a.len() as f64,
    })
}

/// Fraction of total |score| mass carried by the top 10% (min 4) features;
/// the concentration statistic for trained-vs-null comparisons.
pub fn top_fraction_mass(scores: &[f64]) -> f64 {
    let total: f64 = scores.iter().map(|s| s.abs()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let top: f64 = top_k_indices(scores)
        .iter()
        .map(|&i| scores[i].abs())
        .sum();
    top / total
}

/// Fraction of |score| mass landing on a given feature subset (e.g. the
/// task's most class-discriminative pixels).
pub fn mass_on_features(scores: &[f64], features: &[usize]) -> f64 {
    let total: f64 = scores.iter().map(|s| s.abs()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let hit: f64 = features
        .iter()
        .filter_map(|&i| scores.get(i))
        .map(|s| s.abs())
        .sum();
    hit / total
}
