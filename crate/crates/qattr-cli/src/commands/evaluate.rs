use std::path::Path;

use qattr_core::trainer::evaluate_accuracy;

use crate::config::EvaluateRunConfig;
use crate::data::load_task;
use crate::error::CliError;
use crate::output::{read_config, RunDir};

pub fn run(config_path: &Path, model_path: &Path, out: &Path) -> Result<(), CliError> {
    let config: EvaluateRunConfig = read_config(config_path)?;
    let model = super::load_model(model_path)?;
    let mut run = RunDir::create(out)?;
    let task = load_task(&config.dataset)?;
    let train_accuracy = evaluate_accuracy(&model, &task.train)?;
    let test_accuracy = evaluate_accuracy(&model, &task.test)?;

    #[derive(serde::Serialize)]
    struct Evaluation {
        train_accuracy: f64,
        test_accuracy: f64,
        n_train: usize,
        n_test: usize,
    }
    run.write_json(
        "evaluation.json",
        &Evaluation {
            train_accuracy,
            test_accuracy,
            n_train: task.train.len(),
            n_test: task.test.len(),
        },
    )?;
    println!("train accuracy {train_accuracy:.3}, test accuracy {test_accuracy:.3}");
    run.finish("evaluate", &config)
}
