use std::path::Path;

use qattr_core::attribution::{mass_on_features, normalize_for_render, top_fraction_mass};
use qattr_core::datasets::class_contrast_ranking;
use qattr_core::rng::derive_seed;
use qattr_core::trainer::{sample_null_model, NullDistribution};

use crate::config::{AttributeRunConfig, NullModelRunConfig};
use crate::data::load_task;
use crate::error::CliError;
use crate::output::{read_config, RunDir};
use crate::render::render_sample_with_heatmap;

fn distribution_tag(d: NullDistribution) -> &'static str {
    match d {
        NullDistribution::Uniform0Pi => "uniform_0_pi",
        NullDistribution::Gaussian0Halfpi => "gaussian_0_halfpi",
        NullDistribution::StudentTNu2 => "student_t_nu2",
    }
}

/// Per-sample concentration of one model's attributions: mass on its own
/// top-k features and mass on the task's discriminative ("key") pixels.
#[derive(Clone, Copy, serde::Serialize)]
struct MassPair {
    own_top_mass: f64,
    key_pixel_mass: f64,
}

#[derive(serde::Serialize)]
struct SampleComparison {
    sample_id: u64,
    trained: MassPair,
    null: MassPair,
}

#[derive(serde::Serialize)]
struct DistributionReport {
    distribution: NullDistribution,
    samples: Vec<SampleComparison>,
    mean_trained_key_mass: f64,
    mean_null_key_mass: f64,
    /// Trained attributions put more mass on the task's key pixels.
    trained_identifies_key_features: bool,
}

#[derive(serde::Serialize)]
struct ConcentrationReport {
    trained_model: String,
    key_pixels: Vec<usize>,
    distributions: Vec<DistributionReport>,
}

pub fn run(config_path: &Path, out: &Path, seed_override: Option<u64>) -> Result<(), CliError> {
    let mut config: NullModelRunConfig = read_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let trained = super::load_model(Path::new(&config.model))?;
    let mut run = RunDir::create(out)?;
    let task = load_task(&config.dataset)?;

    let ranking = class_contrast_ranking(&task.train)?;
    let k = qattr_core::attribution::top_k_count(ranking.len());
    let key_pixels: Vec<usize> = ranking[..k].to_vec();

    let attribute_with = |model: &qattr_core::model::QuantumModel,
                          selector: &crate::config::SampleSelector,
                          run: &mut RunDir,
                          tag: &str|
     -> Result<(u64, MassPair), CliError> {
        let sample = super::select_sample(&task, selector)?;
        let shim = AttributeRunConfig {
            dataset: config.dataset.clone(),
            sample: *selector,
            attribution: config.attribution.clone(),
        };
        let map = super::attribute::attribute_sample(model, sample, &shim)?;
        let (normalized, _) = normalize_for_render(&map);
        let image = format!("{tag}_sample{}.ppm", selector.index);
        render_sample_with_heatmap(&run.file(&image), &sample.pixels, &normalized)?;
        run.record_output(&image);
        Ok((
            sample.id,
            MassPair {
                own_top_mass: top_fraction_mass(&map.scores),
                key_pixel_mass: mass_on_features(&map.scores, &key_pixels),
            },
        ))
    };

    let mut trained_masses = Vec::new();
    for selector in &config.samples {
        trained_masses.push(attribute_with(&trained, selector, &mut run, "trained")?);
    }

    let mut distributions = Vec::new();
    for (d_index, &distribution) in config.distributions.iter().enumerate() {
        let null = sample_null_model(
            &trained,
            distribution,
            derive_seed(config.seed, &[d_index as u64]),
        );
        let mut samples = Vec::new();
        for (selector, (id, trained_pair)) in config.samples.iter().zip(&trained_masses) {
            let (_, null_pair) =
                attribute_with(&null, selector, &mut run, distribution_tag(distribution))?;
            samples.push(SampleComparison {
                sample_id: *id,
                trained: *trained_pair,
                null: null_pair,
            });
        }
        let mean = |f: fn(&SampleComparison) -> f64| {
            samples.iter().map(f).sum::<f64>() / samples.len().max(1) as f64
        };
        let mean_trained_key_mass = mean(|s| s.trained.key_pixel_mass);
        let mean_null_key_mass = mean(|s| s.null.key_pixel_mass);
        let identifies = mean_trained_key_mass > mean_null_key_mass;
        println!(
            "[{}] {}: key-pixel attribution mass {:.4} (trained) vs {:.4} (null)",
            if identifies { "PASS" } else { "FAIL" },
            distribution_tag(distribution),
            mean_trained_key_mass,
            mean_null_key_mass
        );
        distributions.push(DistributionReport {
            distribution,
            samples,
            mean_trained_key_mass,
            mean_null_key_mass,
            trained_identifies_key_features: identifies,
        });
    }

    run.write_json(
        "concentration.json",
        &ConcentrationReport {
            trained_model: config.model.clone(),
            key_pixels,
            distributions,
        },
    )?;
    run.finish("null-model", &config)
}
