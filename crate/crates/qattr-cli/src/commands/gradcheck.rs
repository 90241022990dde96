use std::path::Path;

use qattr_core::attribution::{
    attribution_similarity, integrated_gradients, AttributionConfig, AttributionSpace,
};
use qattr_core::gradient::{
    amplitude_gradient, exact_input_gradient, hadamard_test_gradient_component, GradientMethod,
    Part, Shots,
};
use qattr_core::rng::derive_seed;

use crate::config::GradcheckRunConfig;
use crate::data::load_task;
use crate::error::CliError;
use crate::output::{read_config, RunDir};

#[derive(serde::Serialize)]
struct ComponentCheck {
    k: usize,
    exact: f64,
    estimated: f64,
    abs_error: f64,
    tolerance: f64,
    within: bool,
}

#[derive(serde::Serialize)]
struct ShotReport {
    shots: u64,
    fraction_within_tolerance: f64,
    ig_cosine: f64,
    pass: bool,
    components: Vec<ComponentCheck>,
}

#[derive(serde::Serialize)]
struct AncillaReport {
    ancillas: usize,
    max_abs_error_vs_single: f64,
    pass: bool,
}

#[derive(serde::Serialize)]
struct ExactBackendReport {
    max_component_error: f64,
    ig_cosine: f64,
    pass: bool,
}

#[derive(serde::Serialize)]
struct GradcheckReport {
    sample_id: u64,
    exact_backend: ExactBackendReport,
    shots: Vec<ShotReport>,
    ancillas: Vec<AncillaReport>,
}

pub fn run(
    config_path: &Path,
    model_path: &Path,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let mut config: GradcheckRunConfig = read_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let model = super::load_model(model_path)?;
    let mut run = RunDir::create(out)?;
    let task = load_task(&config.dataset)?;
    let sample = super::select_sample(&task, &config.sample)?;

    let input = model.encode(&sample.pixels)?;
    let exact = exact_input_gradient(&model, &input)?.values;
    let dim = exact.len();

    let ig_map = |method: GradientMethod, shots: Shots, seed: u64| {
        let attribution = AttributionConfig {
            baseline: vec![0.0; sample.pixels.len()],
            path_steps: config.path_steps,
            gradient_method: method,
            shots,
            seed,
            space: AttributionSpace::Pixel,
        };
        integrated_gradients(&model, &sample.pixels, &attribution)
    };
    let exact_map = ig_map(GradientMethod::Exact, Shots::Exact, 0)?;

    // Backend equivalence at exact probabilities.
    let exact_backend = {
        let mut max_err = 0.0f64;
        for (k, &e) in exact.iter().enumerate() {
            let est = hadamard_test_gradient_component(
                &model,
                &input,
                k,
                Shots::Exact,
                0,
                Part::Real,
            )?;
            max_err = max_err.max((est - e).abs());
        }
        let map = ig_map(GradientMethod::HadamardSingle, Shots::Exact, 0)?;
        let cosine = attribution_similarity(&exact_map.scores, &map.scores)?.cosine;
        ExactBackendReport {
            max_component_error: max_err,
            ig_cosine: cosine,
            pass: max_err <= 1e-8 && cosine >= 1.0 - 1e-9,
        }
    };
    println!(
        "[{}] exact-probability backend: max component error {:.3e}, cosine {:.9}",
        if exact_backend.pass { "PASS" } else { "FAIL" },
        exact_backend.max_component_error,
        exact_backend.ig_cosine
    );

    let mut shot_reports = Vec::new();
    for &shots in &config.shots_list {
        let mut components = Vec::with_capacity(dim);
        let mut within_count = 0usize;
        for (k, &e) in exact.iter().enumerate() {
            // P(A=0) determines the binomial band: comp = 4P̂ − 2, so the
            // 3σ tolerance is 12·sqrt(P(1−P)/shots).
            let p = ((e + 2.0) / 4.0).clamp(0.0, 1.0);
            let tolerance = 12.0 * (p * (1.0 - p) / shots as f64).sqrt();
            let estimated = hadamard_test_gradient_component(
                &model,
                &input,
                k,
                Shots::Finite(shots),
                derive_seed(config.seed, &[shots, k as u64]),
                Part::Real,
            )?;
            let abs_error = (estimated - e).abs();
            let within = abs_error <= tolerance + 1e-12;
            within_count += usize::from(within);
            components.push(ComponentCheck {
                k,
                exact: e,
                estimated,
                abs_error,
                tolerance,
                within,
            });
        }
        let fraction = within_count as f64 / dim as f64;
        let map = ig_map(
            GradientMethod::HadamardSingle,
            Shots::Finite(shots),
            derive_seed(config.seed, &[shots]),
        )?;
        let ig_cosine = attribution_similarity(&exact_map.scores, &map.scores)?.cosine;
        let pass = fraction >= 0.95;
        println!(
            "[{}] {shots} shots: {:.1}% of components within 3σ, IG cosine {:.4}",
            if pass { "PASS" } else { "FAIL" },
            fraction * 100.0,
            ig_cosine
        );
        shot_reports.push(ShotReport {
            shots,
            fraction_within_tolerance: fraction,
            ig_cosine,
            pass,
            components,
        });
    }

    let mut ancilla_reports = Vec::new();
    for &ancillas in &config.ancillas_list {
        let single = amplitude_gradient(
            &model,
            &input,
            GradientMethod::HadamardSingle,
            Shots::Exact,
            0,
        )?;
        let multi = amplitude_gradient(
            &model,
            &input,
            GradientMethod::HadamardMulti { ancillas },
            Shots::Exact,
            0,
        )?;
        let max_err = single
            .iter()
            .zip(&multi)
            .map(|(s, m)| (s - m).abs())
            .fold(0.0f64, f64::max);
        let pass = max_err <= 1e-9;
        println!(
            "[{}] m={ancillas} exact recovery vs single ancilla: max error {:.3e}",
            if pass { "PASS" } else { "FAIL" },
            max_err
        );
        ancilla_reports.push(AncillaReport {
            ancillas,
            max_abs_error_vs_single: max_err,
            pass,
        });
    }

    run.write_json(
        "gradcheck.json",
        &GradcheckReport {
            sample_id: sample.id,
            exact_backend,
            shots: shot_reports,
            ancillas: ancilla_reports,
        },
    )?;
    run.finish("gradcheck", &config)
}
