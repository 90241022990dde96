pub mod attribute;
pub mod evaluate;
pub mod fetch;
pub mod generate_data;
pub mod gradcheck;
pub mod null_model;
pub mod train;

use std::path::Path;

use qattr_core::datasets::{LabeledSample, Task};
use qattr_core::encoding::EncodingMode;
use qattr_core::model::{ModelFile, QuantumModel};

use crate::config::{
    AttributionSection, BaselineConfig, EncodingConfig, ModelConfig, SampleSelector, SplitChoice,
};
use crate::error::CliError;
use qattr_core::attribution::AttributionConfig;

pub fn load_model(path: &Path) -> Result<QuantumModel, CliError> {
    let file = ModelFile::load(path)?;
    file.to_model().map_err(CliError::from)
}

pub fn build_model(config: &ModelConfig) -> Result<QuantumModel, CliError> {
    let encoding = match &config.encoding {
        EncodingConfig::AmplitudeOverflow { fit_policy } => EncodingMode::AmplitudeOverflow {
            n_qubits: config.n_qubits,
            fit_policy: *fit_policy,
        },
        EncodingConfig::AmplitudeNormalized => EncodingMode::AmplitudeNormalized {
            n_qubits: config.n_qubits,
        },
        EncodingConfig::Angle => EncodingMode::Angle {
            n_qubits: config.n_qubits,
        },
    };
    let observable = config
        .observable
        .parse()
        .map_err(|e: qattr_core::model::ModelError| CliError::config(e.to_string()))?;
    let ansatz = qattr_core::model::AnsatzSpec::new(config.n_qubits, config.n_layers);
    QuantumModel::new(
        ansatz,
        vec![0.0; ansatz.parameter_count()],
        observable,
        config.activation,
        encoding,
    )
    .map_err(|e| CliError::config(e.to_string()))
}

pub fn select_sample<'t>(
    task: &'t Task,
    selector: &SampleSelector,
) -> Result<&'t LabeledSample, CliError> {
    let pool = match selector.split {
        SplitChoice::Train => &task.train,
        SplitChoice::Test => &task.test,
    };
    pool.get(selector.index).ok_or_else(|| {
        CliError::config(format!(
            "sample index {} out of range for the {} split ({} samples)",
            selector.index,
            match selector.split {
                SplitChoice::Train => "train",
                SplitChoice::Test => "test",
            },
            pool.len()
        ))
    })
}

pub fn resolve_baseline(
    baseline: &BaselineConfig,
    dim: usize,
) -> Result<Vec<f64>, CliError> {
    match baseline {
        BaselineConfig::Named(name) if name == "blank" => Ok(vec![0.0; dim]),
        BaselineConfig::Named(other) => Err(CliError::config(format!(
            "unknown baseline {other:?} (expected \"blank\" or an explicit vector)"
        ))),
        BaselineConfig::Vector(v) => {
            if v.len() != dim {
                return Err(CliError::config(format!(
                    "baseline has {} entries, samples have {dim} features",
                    v.len()
                )));
            }
            Ok(v.clone())
        }
    }
}

pub fn attribution_config(
    section: &AttributionSection,
    dim: usize,
) -> Result<AttributionConfig, CliError> {
    Ok(AttributionConfig {
        baseline: resolve_baseline(&section.baseline, dim)?,
        path_steps: section.path_steps,
        gradient_method: section.method,
        shots: section.shots,
        seed: section.seed,
        space: section.space,
    })
}
