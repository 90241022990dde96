//! Integrated-gradients properties: the completeness axiom at high path
//! resolution, exact-probability backend equivalence, and qualitative shot
//! robustness of the attribution maps.

mod common;

use common::*;
use qattr_core::attribution::{
    attribution_similarity, integrated_gradients, AttributionConfig, AttributionSpace,
};
use qattr_core::gradient::{GradientMethod, Shots};
use qattr_core::model::{evaluate, Activation, QuantumModel};

fn activated(model: &QuantumModel) -> QuantumModel {
    QuantumModel {
        activation: Activation::Tanh,
        ..model.clone()
    }
}

#[test]
fn completeness_residual_small_and_tightening() {
    let mut rng = seeded(10);
    for pair in 0..20 {
        let n = 2 + pair % 5; // up to 6 qubits
        let model = activated(&random_model(n, 2, &mut rng));
        let pixels = random_pixels(n, &mut rng);
        let residual_at = |steps: usize| {
            let config = AttributionConfig::exact_blank_baseline(pixels.len(), steps);
            let map = integrated_gradients(&model, &pixels, &config).unwrap();
            let delta = (map.model_output_at_x - map.model_output_at_baseline).abs();
            (map.completeness_residual, delta)
        };
        let (r512, delta) = residual_at(512);
        let (r32, _) = residual_at(32);
        assert!(
            r512 <= 0.005 * delta,
            "pair {pair}: residual {r512} vs 0.5% of {delta}"
        );
        assert!(
            r512 <= r32 + 1e-12,
            "pair {pair}: residual should tighten ({r512} vs {r32})"
        );
    }
}

#[test]
fn hadamard_exact_backend_reproduces_exact_scores() {
    let mut rng = seeded(20);
    for trial in 0..4 {
        let n = 2 + trial % 2;
        let model = activated(&random_model(n, 2, &mut rng));
        let pixels = random_pixels(n, &mut rng);
        let exact_cfg = AttributionConfig::exact_blank_baseline(pixels.len(), 24);
        let hadamard_cfg = AttributionConfig {
            gradient_method: GradientMethod::HadamardSingle,
            ..exact_cfg.clone()
        };
        let a = integrated_gradients(&model, &pixels, &exact_cfg).unwrap();
        let b = integrated_gradients(&model, &pixels, &hadamard_cfg).unwrap();
        for (x, y) in a.scores.iter().zip(&b.scores) {
            assert!((x - y).abs() <= 1e-8, "trial {trial}: {x} vs {y}");
        }
    }
}

#[test]
fn amplitude_space_completeness_holds_for_bilinear_outputs() {
    let mut rng = seeded(30);
    let model = activated(&random_model(3, 2, &mut rng));
    let pixels = random_pixels(3, &mut rng);
    let config = AttributionConfig {
        space: AttributionSpace::Amplitude,
        ..AttributionConfig::exact_blank_baseline(pixels.len(), 256)
    };
    let map = integrated_gradients(&model, &pixels, &config).unwrap();
    assert_eq!(map.scores.len(), 8);
    let delta = (map.model_output_at_x - map.model_output_at_baseline).abs();
    assert!(
        map.completeness_residual <= 0.01 * delta.max(1e-6),
        "residual {} vs delta {delta}",
        map.completeness_residual
    );
}

#[test]
fn shot_budget_orders_cosine_similarity_in_expectation() {
    let mut rng = seeded(40);
    let model = activated(&random_model(3, 2, &mut rng));
    let pixels = random_pixels(3, &mut rng);
    let exact_map = integrated_gradients(
        &model,
        &pixels,
        &AttributionConfig::exact_blank_baseline(pixels.len(), 16),
    )
    .unwrap();
    let mean_cosine = |shots: u64| -> f64 {
        let mut total = 0.0;
        for seed in 0..20u64 {
            let config = AttributionConfig {
                gradient_method: GradientMethod::HadamardSingle,
                shots: Shots::Finite(shots),
                seed: 1000 + seed,
                ..AttributionConfig::exact_blank_baseline(pixels.len(), 16)
            };
            let map = integrated_gradients(&model, &pixels, &config).unwrap();
            total += attribution_similarity(&exact_map.scores, &map.scores)
                .unwrap()
                .cosine;
        }
        total / 20.0
    };
    let c10 = mean_cosine(10);
    let c500 = mean_cosine(500);
    assert!(
        c500 >= c10,
        "expected cosine to improve with shots: 10→{c10}, 500→{c500}"
    );
    assert!(c500 > 0.9, "500-shot maps should be close to exact: {c500}");
}

#[test]
fn attribution_is_deterministic_under_fixed_seed() {
    let mut rng = seeded(50);
    let model = activated(&random_model(3, 1, &mut rng));
    let pixels = random_pixels(3, &mut rng);
    let config = AttributionConfig {
        gradient_method: GradientMethod::HadamardSingle,
        shots: Shots::Finite(64),
        seed: 7,
        ..AttributionConfig::exact_blank_baseline(pixels.len(), 8)
    };
    let a = integrated_gradients(&model, &pixels, &config).unwrap();
    let b = integrated_gradients(&model, &pixels, &config).unwrap();
    assert_eq!(a, b);
    // Forward output bookkeeping matches a direct evaluation.
    let direct = evaluate(&model, &model.encode(&pixels).unwrap()).unwrap();
    assert!((a.model_output_at_x - direct.output).abs() <= 1e-12);
}
