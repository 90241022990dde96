use std::path::Path;

use qattr_core::attribution::{integrated_gradients, normalize_for_render, AttributionMap};
use qattr_core::datasets::LabeledSample;

use crate::config::AttributeRunConfig;
use crate::data::load_task;
use crate::error::CliError;
use crate::output::{read_config, RunDir};
use crate::render::render_sample_with_heatmap;

pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub method: Option<qattr_core::gradient::GradientMethod>,
    pub shots: Option<qattr_core::gradient::Shots>,
    pub index: Option<usize>,
    pub split: Option<crate::config::SplitChoice>,
}

#[derive(serde::Serialize)]
struct SampleInfo<'a> {
    id: u64,
    label: i8,
    source_class: &'a str,
}

#[derive(serde::Serialize)]
struct AttributionDocument<'a> {
    sample: SampleInfo<'a>,
    attribution: &'a AttributionMap,
    normalized_scores: &'a [f64],
    all_zero: bool,
}

pub fn run(
    config_path: &Path,
    model_path: &Path,
    out: &Path,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let mut config: AttributeRunConfig = read_config(config_path)?;
    apply_overrides(&mut config, overrides);

    let model = super::load_model(model_path)?;
    let mut run = RunDir::create(out)?;
    let task = load_task(&config.dataset)?;
    let sample = super::select_sample(&task, &config.sample)?;

    let map = attribute_sample(&model, sample, &config)?;
    let (normalized, all_zero) = normalize_for_render(&map);
    run.write_json(
        "attribution.json",
        &AttributionDocument {
            sample: SampleInfo {
                id: sample.id,
                label: sample.label,
                source_class: &sample.source_class,
            },
            attribution: &map,
            normalized_scores: &normalized,
            all_zero,
        },
    )?;
    render_sample_with_heatmap(&run.file("heatmap.ppm"), &sample.pixels, &normalized)?;
    run.record_output("heatmap.ppm");
    println!(
        "attributed sample {} ({}): residual {:.3e}, output {:.4}",
        sample.id, sample.source_class, map.completeness_residual, map.model_output_at_x
    );
    run.finish("attribute", &config)
}

pub fn attribute_sample(
    model: &qattr_core::model::QuantumModel,
    sample: &LabeledSample,
    config: &AttributeRunConfig,
) -> Result<AttributionMap, CliError> {
    let attribution = super::attribution_config(&config.attribution, sample.pixels.len())?;
    integrated_gradients(model, &sample.pixels, &attribution).map_err(CliError::from)
}

fn apply_overrides(config: &mut AttributeRunConfig, overrides: &Overrides) {
    if let Some(seed) = overrides.seed {
        config.attribution.seed = seed;
    }
    if let Some(steps) = overrides.steps {
        config.attribution.path_steps = steps;
    }
    if let Some(method) = overrides.method {
        config.attribution.method = method;
    }
    if let Some(shots) = overrides.shots {
        config.attribution.shots = shots;
    }
    if let Some(index) = overrides.index {
        config.sample.index = index;
    }
    if let Some(split) = overrides.split {
        config.sample.split = split;
    }
}
