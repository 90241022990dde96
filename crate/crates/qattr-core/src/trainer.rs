//! Binary-classifier training: MSE loss on the activated output, a
//! derivative-free SPSA optimizer and a parameter-shift gradient-descent
//! alternative, plus the null-model parameter generators.

use rand::Rng;
use rand_distr::{Distribution, Normal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{LabeledSample, Task};
use crate::encoding::EncodingError;
use crate::gradient::{parameter_shift_gradient, GradientError};
use crate::model::{evaluate, ModelError, QuantumModel};
use crate::rng::{derive_seed, seeded_rng};
use crate::statevector::StateVector;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("batch is empty")]
    EmptyBatch,
    #[error("loss became non-finite at iteration {iter}")]
    Diverged { iter: usize },
    #[error("bad training configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Gradient(#[from] GradientError),
}

/// The parameter distributions used for untrained null models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullDistribution {
    /// Uniform on [0, π).
    #[serde(rename = "uniform_0_pi")]
    Uniform0Pi,
    /// Normal with mean 0 and standard deviation π/2.
    #[serde(rename = "gaussian_0_halfpi")]
    Gaussian0Halfpi,
    /// Student's t with ν = 2 (heavy tails).
    #[serde(rename = "student_t_nu2")]
    StudentTNu2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    /// Simultaneous-perturbation stochastic approximation with gain
    /// schedules a_k = a/(k+A)^0.602 and c_k = c/k^0.101.
    Spsa {
        #[serde(default = "default_spsa_a")]
        a: f64,
        #[serde(default = "default_spsa_c")]
        c: f64,
        #[serde(default = "default_spsa_stability")]
        stability: f64,
    },
    /// Full-batch gradient descent with parameter-shift gradients.
    GdParamShift { learning_rate: f64 },
}

fn default_spsa_a() -> f64 {
    0.2
}
fn default_spsa_c() -> f64 {
    0.1
}
fn default_spsa_stability() -> f64 {
    50.0
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec::Spsa {
            a: default_spsa_a(),
            c: default_spsa_c(),
            stability: default_spsa_stability(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    /// Draw θ from a null distribution (the default is uniform on [0, π)).
    Null { distribution: NullDistribution },
    /// Keep the θ already carried by the model.
    Resume,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Null {
            distribution: NullDistribution::Uniform0Pi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerSpec,
    pub max_iters: usize,
    #[serde(default)]
    pub init: InitSpec,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: QuantumModel,
    pub history: Vec<IterationRecord>,
    pub best_loss: f64,
}

/// Mean squared error of the activated output against ±1 targets.
pub fn loss(model: &QuantumModel, batch: &[LabeledSample]) -> Result<f64, TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let terms = batch
        .par_iter()
        .map(|sample| {
            let input = model.encode(&sample.pixels)?;
            let eval = evaluate(model, &input)?;
            Ok((eval.output - sample.label as f64).powi(2))
        })
        .collect::<Result<Vec<f64>, TrainError>>()?;
    Ok(terms.iter().sum::<f64>() / terms.len() as f64)
}

/// Fraction of sign-correct classifications.
pub fn evaluate_accuracy(
    model: &QuantumModel,
    samples: &[LabeledSample],
) -> Result<f64, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let correct = samples
        .par_iter()
        .map(|sample| {
            let c = crate::model::classify(model, &sample.pixels)?;
            Ok(usize::from(c.label as i64 == sample.label as i64))
        })
        .collect::<Result<Vec<usize>, TrainError>>()?;
    Ok(correct.iter().sum::<usize>() as f64 / samples.len() as f64)
}

/// Draw a fresh θ for the template's ansatz; the model is otherwise
/// identical to the trained configuration.
pub fn sample_null_model(
    template: &QuantumModel,
    distribution: NullDistribution,
    seed: u64,
) -> QuantumModel {
    let count = template.ansatz.parameter_count();
    let mut rng = seeded_rng(seed);
    let theta = sample_theta(count, distribution, &mut rng);
    QuantumModel {
        theta,
        ..template.clone()
    }
}

fn sample_theta(count: usize, distribution: NullDistribution, rng: &mut impl Rng) -> Vec<f64> {
    match distribution {
        NullDistribution::Uniform0Pi => (0..count)
            .map(|_| rng.random::<f64>() * std::f64::consts::PI)
            .collect(),
        NullDistribution::Gaussian0Halfpi => {
            let normal = Normal::new(0.0, std::f64::consts::FRAC_PI_2).expect("valid sigma");
            (0..count).map(|_| normal.sample(rng)).collect()
        }
        NullDistribution::StudentTNu2 => {
            let t = StudentT::new(2.0).expect("valid nu");
            (0..count).map(|_| t.sample(rng)).collect()
        }
    }
}

/// One SPSA update on θ (iteration index `k` is 1-based). Two objective
/// evaluations; the Rademacher perturbation comes from `rng`.
pub fn spsa_step<F>(
    theta: &mut [f64],
    k: usize,
    a: f64,
    c: f64,
    stability: f64,
    rng: &mut impl Rng,
    mut objective: F,
) -> Result<(), TrainError>
where
    F: FnMut(&[f64]) -> Result<f64, TrainError>,
{
    let c_k = c / (k as f64).powf(0.101);
    let a_k = a / (k as f64 + stability).powf(0.602);
    let delta: Vec<f64> = (0..theta.len())
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + c_k * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - c_k * d).collect();
    let l_plus = objective(&plus)?;
    let l_minus = objective(&minus)?;
    let scale = (l_plus - l_minus) / (2.0 * c_k);
    for (t, d) in theta.iter_mut().zip(&delta) {
        // δ_i ∈ {−1, +1}, so 1/δ_i = δ_i.
        *t -= a_k * scale * d;
    }
    Ok(())
}

struct PreparedBatch {
    states: Vec<StateVector>,
    inputs: Vec<crate::encoding::EncodedInput>,
    targets: Vec<f64>,
}

fn prepare_batch(model: &QuantumModel, samples: &[LabeledSample]) -> Result<PreparedBatch, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let inputs: Vec<crate::encoding::EncodedInput> = samples
        .iter()
        .map(|s| model.encode(&s.pixels))
        .collect::<Result<_, _>>()?;
    let states: Vec<StateVector> = inputs
        .iter()
        .map(|i| i.state_vector())
        .collect::<Result<_, _>>()?;
    Ok(PreparedBatch {
        states,
        inputs,
        targets: samples.iter().map(|s| s.label as f64).collect(),
    })
}

/// Loss and accuracy in one pass over prepared input states.
fn batch_metrics(
    model: &QuantumModel,
    theta: &[f64],
    batch: &PreparedBatch,
) -> Result<(f64, f64), TrainError> {
    let candidate = QuantumModel {
        theta: theta.to_vec(),
        ..model.clone()
    };
    let outputs = batch
        .states
        .par_iter()
        .map(|state| {
            let f = candidate.expectation_of_state(state)?;
            Ok(candidate.activation.apply(f))
        })
        .collect::<Result<Vec<f64>, TrainError>>()?;
    let mut loss_acc = 0.0;
    let mut correct = 0usize;
    for (out, y) in outputs.iter().zip(&batch.targets) {
        loss_acc += (out - y).powi(2);
        let label = if *out < 0.0 { -1.0 } else { 1.0 };
        if label == *y {
            correct += 1;
        }
    }
    Ok((
        loss_acc / batch.targets.len() as f64,
        correct as f64 / batch.targets.len() as f64,
    ))
}

/// Train on the task's training split. Returns the best-loss θ encountered,
/// with a per-iteration loss/accuracy history. Deterministic for a fixed
/// (config, seed, data).
pub fn train(
    model: &QuantumModel,
    task: &Task,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    validate_config(config)?;
    let batch = prepare_batch(model, &task.train)?;
    let mut theta = match config.init {
        InitSpec::Resume => model.theta.clone(),
        InitSpec::Null { distribution } => {
            let mut rng = seeded_rng(derive_seed(config.seed, &[0]));
            sample_theta(model.ansatz.parameter_count(), distribution, &mut rng)
        }
    };
    let mut best_theta = theta.clone();
    let (mut best_loss, _) = batch_metrics(model, &theta, &batch)?;
    let mut history = Vec::with_capacity(config.max_iters);
    let mut rng = seeded_rng(derive_seed(config.seed, &[1]));

    for k in 1..=config.max_iters {
        match config.optimizer {
            OptimizerSpec::Spsa { a, c, stability } => {
                spsa_step(&mut theta, k, a, c, stability, &mut rng, |t| {
                    Ok(batch_metrics(model, t, &batch)?.0)
                })?;
            }
            OptimizerSpec::GdParamShift { learning_rate } => {
                let grad = loss_gradient_param_shift(model, &theta, &batch)?;
                for (t, g) in theta.iter_mut().zip(&grad) {
                    *t -= learning_rate * g;
                }
            }
        }
        let (loss_now, accuracy) = batch_metrics(model, &theta, &batch)?;
        if !loss_now.is_finite() {
            return Err(TrainError::Diverged { iter: k });
        }
        if loss_now < best_loss {
            best_loss = loss_now;
            best_theta.copy_from_slice(&theta);
        }
        history.push(IterationRecord {
            iter: k,
            loss: loss_now,
            accuracy,
        });
    }

    Ok(TrainOutcome {
        model: QuantumModel {
            theta: best_theta,
            ..model.clone()
        },
        history,
        best_loss,
    })
}

/// ∇L over θ via the parameter-shift rule and the activation/loss chain
/// rule: dL/dθ = mean 2·(out − y)·act'(F)·dF/dθ.
fn loss_gradient_param_shift(
    model: &QuantumModel,
    theta: &[f64],
    batch: &PreparedBatch,
) -> Result<Vec<f64>, TrainError> {
    let candidate = QuantumModel {
        theta: theta.to_vec(),
        ..model.clone()
    };
    let which: Vec<usize> = (0..theta.len()).collect();
    let n = batch.targets.len() as f64;
    let mut grad = vec![0.0; theta.len()];
    for (input, (state, y)) in batch
        .inputs
        .iter()
        .zip(batch.states.iter().zip(&batch.targets))
    {
        let f = candidate.expectation_of_state(state)?;
        let out = candidate.activation.apply(f);
        let chain = 2.0 * (out - y) * candidate.activation.derivative(f) / n;
        let df = parameter_shift_gradient(&candidate, input, &which)?;
        for (g, d) in grad.iter_mut().zip(&df.values) {
            *g += chain * d;
        }
    }
    Ok(grad)
}

fn validate_config(config: &TrainConfig) -> Result<(), TrainError> {
    match config.optimizer {
        OptimizerSpec::Spsa { a, c, stability } => {
            if a <= 0.0 || c <= 0.0 || stability < 0.0 {
                return Err(TrainError::BadConfig(format!(
                    "SPSA gains must be positive (a={a}, c={c}, A={stability})"
                )));
            }
        }
        OptimizerSpec::GdParamShift { learning_rate } => {
            if learning_rate <= 0.0 {
                return Err(TrainError::BadConfig(format!(
                    "learning rate must be positive, got {learning_rate}"
                )));
            }
        }
    }
    Ok(())
}
