//! Run configuration schemas. Configs are JSON documents validated before
//! execution (unknown fields are rejected by name); command-line flags
//! override individual keys and every run writes back the fully resolved
//! config in its manifest.

use serde::{Deserialize, Serialize};

use qattr_core::attribution::AttributionSpace;
use qattr_core::datasets::DatasetName;
use qattr_core::encoding::FitPolicy;
use qattr_core::gradient::{GradientMethod, Shots};
use qattr_core::model::Activation;
use qattr_core::trainer::{InitSpec, NullDistribution, OptimizerSpec};

/// Where a dataset's raw samples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    /// The exhaustive deduplicated bars-and-stripes pattern list.
    GeneratePatterns { side: usize },
    /// I.i.d. draws (with repetition) from the bars-and-stripes patterns.
    SamplePatterns { side: usize, count: usize, seed: u64 },
    /// A previously written internal-format samples file.
    SamplesFile { path: String },
    /// An IDX image/label pair (MNIST layout).
    Idx { images: String, labels: String },
    /// The deterministic built-in stand-in corpus (IDX-equivalent content).
    Synthetic { per_class: usize, seed: u64 },
}

fn default_train_fraction() -> f64 {
    0.75
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMap {
    /// Use the (possibly downscaled) pixels directly.
    #[default]
    RawPixels,
    /// Row means then column means (for angle-encoded square images).
    RowColMeans,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub name: DatasetName,
    pub source: SourceConfig,
    #[serde(default)]
    pub class_pair: Option<(String, String)>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default)]
    pub subsample_per_class: Option<usize>,
    #[serde(default)]
    pub feature_map: FeatureMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncodingConfig {
    AmplitudeOverflow {
        #[serde(default = "default_fit_policy")]
        fit_policy: FitPolicy,
    },
    AmplitudeNormalized,
    Angle,
}

fn default_fit_policy() -> FitPolicy {
    FitPolicy::TruncateLast
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    #[serde(default = "default_observable")]
    pub observable: String,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    pub encoding: EncodingConfig,
}

fn default_observable() -> String {
    "Z0".into()
}

fn default_activation() -> Activation {
    Activation::Tanh
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub optimizer: OptimizerSpec,
    pub max_iters: usize,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub dataset: DataConfig,
    pub model: ModelConfig,
    pub train: TrainSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateDataConfig {
    pub dataset: DataConfig,
    #[serde(default = "default_samples_name")]
    pub output: String,
}

fn default_samples_name() -> String {
    "samples.json".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitChoice {
    Train,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSelector {
    pub split: SplitChoice,
    pub index: usize,
}

/// Baseline choice: the blank image or an explicit vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaselineConfig {
    Named(String),
    Vector(Vec<f64>),
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig::Named("blank".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributionSection {
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default = "default_path_steps")]
    pub path_steps: usize,
    #[serde(default = "default_method")]
    pub method: GradientMethod,
    #[serde(default = "default_shots")]
    pub shots: Shots,
    #[serde(default = "default_space")]
    pub space: AttributionSpace,
    #[serde(default)]
    pub seed: u64,
}

impl Default for AttributionSection {
    fn default() -> Self {
        AttributionSection {
            baseline: BaselineConfig::default(),
            path_steps: default_path_steps(),
            method: default_method(),
            shots: default_shots(),
            space: default_space(),
            seed: 0,
        }
    }
}

fn default_path_steps() -> usize {
    64
}

fn default_method() -> GradientMethod {
    GradientMethod::Exact
}

fn default_shots() -> Shots {
    Shots::Exact
}

fn default_space() -> AttributionSpace {
    AttributionSpace::Pixel
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeRunConfig {
    pub dataset: DataConfig,
    pub sample: SampleSelector,
    #[serde(default)]
    pub attribution: AttributionSection,
}

fn default_shots_list() -> Vec<u64> {
    vec![10, 100, 500]
}

fn default_ancillas_list() -> Vec<usize> {
    vec![1, 2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckRunConfig {
    pub dataset: DataConfig,
    pub sample: SampleSelector,
    #[serde(default = "default_shots_list")]
    pub shots_list: Vec<u64>,
    #[serde(default = "default_ancillas_list")]
    pub ancillas_list: Vec<usize>,
    #[serde(default = "default_path_steps")]
    pub path_steps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_distributions() -> Vec<NullDistribution> {
    vec![
        NullDistribution::Uniform0Pi,
        NullDistribution::Gaussian0Halfpi,
        NullDistribution::StudentTNu2,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullModelRunConfig {
    pub dataset: DataConfig,
    /// Path to the trained model the nulls are compared against.
    pub model: String,
    pub samples: Vec<SampleSelector>,
    #[serde(default = "default_distributions")]
    pub distributions: Vec<NullDistribution>,
    #[serde(default)]
    pub attribution: AttributionSection,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRunConfig {
    pub dataset: DataConfig,
}
