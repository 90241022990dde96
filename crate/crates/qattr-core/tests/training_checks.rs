//! End-to-end training targets for the two bars-and-stripes model
//! configurations: SPSA on the amplitude model and parameter-shift gradient
//! descent on the angle model.

use qattr_core::datasets::{
    generate_bars_and_stripes, row_col_mean_features, DatasetName, DatasetSpec, LabeledSample,
    SplitSpec, Task,
};
use qattr_core::encoding::{EncodingMode, FitPolicy};
use qattr_core::model::{Activation, AnsatzSpec, ObservableSpec, QuantumModel};
use qattr_core::trainer::{
    evaluate_accuracy, train, InitSpec, NullDistribution, OptimizerSpec, TrainConfig,
};

fn full_pattern_task(samples: Vec<LabeledSample>, side: usize) -> Task {
    Task {
        spec: DatasetSpec {
            name: DatasetName::BarsAndStripes,
            class_pair: ("stripes".into(), "bars".into()),
            image_side: side,
            split: SplitSpec {
                train_fraction: 0.5,
                seed: 0,
            },
            subsample_per_class: None,
        },
        train: samples.clone(),
        test: samples,
    }
}

#[test]
fn spsa_fits_bars_and_stripes_amplitude_model() {
    // 4-qubit, 8-layer amplitude model, SPSA capped at 3000 iterations,
    // trained on the full pattern set: train accuracy must clear 0.90.
    let task = full_pattern_task(generate_bars_and_stripes(4).unwrap(), 4);
    let model = QuantumModel::new(
        AnsatzSpec::new(4, 8),
        vec![0.0; 64],
        ObservableSpec::z(0),
        Activation::Tanh,
        EncodingMode::AmplitudeOverflow {
            n_qubits: 4,
            fit_policy: FitPolicy::TruncateLast,
        },
    )
    .unwrap();
    let config = TrainConfig {
        optimizer: OptimizerSpec::Spsa {
            a: 0.6,
            c: 0.2,
            stability: 50.0,
        },
        max_iters: 3000,
        init: InitSpec::Null {
            distribution: NullDistribution::Uniform0Pi,
        },
        seed: 1,
    };
    let outcome = train(&model, &task, &config).unwrap();
    let accuracy = evaluate_accuracy(&outcome.model, &task.train).unwrap();
    assert!(accuracy >= 0.90, "train accuracy {accuracy}");
}

#[test]
fn gradient_descent_fits_angle_encoded_model() {
    // 8-qubit, 8-layer angle model over row/column-mean features, trained
    // with parameter-shift gradient descent: accuracy must clear 0.90.
    let featured: Vec<LabeledSample> = generate_bars_and_stripes(4)
        .unwrap()
        .into_iter()
        .map(|s| LabeledSample {
            pixels: row_col_mean_features(&s.pixels, 4).unwrap(),
            ..s
        })
        .collect();
    let task = full_pattern_task(featured, 4);
    let model = QuantumModel::new(
        AnsatzSpec::new(8, 8),
        vec![0.0; 128],
        ObservableSpec::z(0),
        Activation::Tanh,
        EncodingMode::Angle { n_qubits: 8 },
    )
    .unwrap();
    let config = TrainConfig {
        optimizer: OptimizerSpec::GdParamShift { learning_rate: 2.0 },
        max_iters: 150,
        init: InitSpec::Null {
            distribution: NullDistribution::Gaussian0Halfpi,
        },
        seed: 2,
    };
    let outcome = train(&model, &task, &config).unwrap();
    let accuracy = evaluate_accuracy(&outcome.model, &task.train).unwrap();
    assert!(accuracy >= 0.90, "accuracy {accuracy}");
}
