//! Dataset resolution: raw source → preprocessing (downscale, feature map)
//! → deterministic task split.

use std::path::Path;

use qattr_core::datasets::synth::{synthetic_images, SynthKind};
use qattr_core::datasets::{
    downscale_to_8x8, generate_bars_and_stripes, load_idx_images, make_task,
    row_col_mean_features, sample_bars_and_stripes, DatasetName, DatasetSpec, LabeledSample,
    SamplesFile, SplitSpec, Task,
};

use crate::config::{DataConfig, FeatureMap, SourceConfig};
use crate::error::CliError;

fn synth_kind(name: DatasetName) -> SynthKind {
    match name {
        DatasetName::FashionMnist => SynthKind::Fashion,
        _ => SynthKind::Digits,
    }
}

/// Load the raw samples for a source, before class filtering.
pub fn load_samples(config: &DataConfig) -> Result<Vec<LabeledSample>, CliError> {
    let samples = match &config.source {
        SourceConfig::GeneratePatterns { side } => generate_bars_and_stripes(*side)?,
        SourceConfig::SamplePatterns { side, count, seed } => {
            sample_bars_and_stripes(*side, *count, *seed)?
        }
        SourceConfig::SamplesFile { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read {path}: {e}")))?;
            let file: SamplesFile = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("bad samples file {path}: {e}")))?;
            file.samples
        }
        SourceConfig::Idx { images, labels } => {
            load_idx_images(Path::new(images), Path::new(labels))?
        }
        SourceConfig::Synthetic { per_class, seed } => {
            synthetic_images(synth_kind(config.name), *per_class, *seed)
                .into_iter()
                .enumerate()
                .map(|(id, (bytes, class))| LabeledSample {
                    id: id as u64,
                    pixels: bytes.iter().map(|&b| b as f64 / 255.0).collect(),
                    label: 0,
                    source_class: class.to_string(),
                })
                .collect()
        }
    };
    preprocess(config, samples)
}

fn preprocess(
    config: &DataConfig,
    samples: Vec<LabeledSample>,
) -> Result<Vec<LabeledSample>, CliError> {
    let mut samples = samples;
    if config.name == DatasetName::Nist8x8 && needs_downscale(&config.source) {
        for sample in &mut samples {
            sample.pixels = downscale_to_8x8(&sample.pixels)?;
        }
    }
    if config.feature_map == FeatureMap::RowColMeans {
        for sample in &mut samples {
            let side = (sample.pixels.len() as f64).sqrt() as usize;
            sample.pixels = row_col_mean_features(&sample.pixels, side)?;
        }
    }
    Ok(samples)
}

fn needs_downscale(source: &SourceConfig) -> bool {
    // Samples files are stored post-preprocessing; every other source for
    // the 8×8 dataset carries 28×28 images.
    !matches!(source, SourceConfig::SamplesFile { .. })
}

/// The side of the (post-preprocessing) images in this configuration.
pub fn image_side(config: &DataConfig, samples: &[LabeledSample]) -> usize {
    match config.name {
        DatasetName::Nist8x8 => 8,
        DatasetName::Mnist | DatasetName::FashionMnist => 28,
        DatasetName::BarsAndStripes => samples
            .first()
            .map(|s| (s.pixels.len() as f64).sqrt() as usize)
            .unwrap_or(0),
    }
}

/// Resolve the full task: load, preprocess, filter to the class pair and
/// split deterministically.
pub fn load_task(config: &DataConfig) -> Result<Task, CliError> {
    let samples = load_samples(config)?;
    let class_pair = config
        .class_pair
        .clone()
        .ok_or_else(|| CliError::config("dataset.class_pair is required for this command"))?;
    let spec = DatasetSpec {
        name: config.name,
        class_pair,
        image_side: image_side(config, &samples),
        split: SplitSpec {
            train_fraction: config.train_fraction,
            seed: config.split_seed,
        },
        subsample_per_class: config.subsample_per_class,
    };
    Ok(make_task(&spec, &samples)?)
}
