use std::path::Path;

use qattr_core::model::{ModelFile, ModelMetadata};
use qattr_core::trainer::{evaluate_accuracy, train, TrainConfig};

use crate::config::TrainRunConfig;
use crate::data::load_task;
use crate::error::CliError;
use crate::output::{read_config, RunDir};

pub struct Overrides {
    pub seed: Option<u64>,
    pub iters: Option<usize>,
}

pub fn run(config_path: &Path, out: &Path, overrides: &Overrides) -> Result<(), CliError> {
    let mut config: TrainRunConfig = read_config(config_path)?;
    if let Some(seed) = overrides.seed {
        config.train.seed = seed;
    }
    if let Some(iters) = overrides.iters {
        config.train.max_iters = iters;
    }

    if matches!(config.train.init, qattr_core::trainer::InitSpec::Resume) {
        return Err(CliError::config(
            "train.init \"resume\" is a library-level option; CLI runs start from a drawn θ",
        ));
    }

    let mut run = RunDir::create(out)?;
    let task = load_task(&config.dataset)?;
    let model = super::build_model(&config.model)?;
    let train_config = TrainConfig {
        optimizer: config.train.optimizer,
        max_iters: config.train.max_iters,
        init: config.train.init,
        seed: config.train.seed,
    };
    let outcome = train(&model, &task, &train_config)?;
    let train_accuracy = evaluate_accuracy(&outcome.model, &task.train)?;
    let test_accuracy = evaluate_accuracy(&outcome.model, &task.test)?;

    let file = ModelFile::from_model(
        &outcome.model,
        ModelMetadata {
            seed: config.train.seed,
            dataset: format!(
                "{}:{}-vs-{}",
                serde_json::to_value(config.dataset.name)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                task.spec.class_pair.0,
                task.spec.class_pair.1
            ),
            accuracy: Some(test_accuracy),
        },
    );
    run.write_json("model.json", &file)?;
    run.write_json("history.json", &outcome.history)?;

    #[derive(serde::Serialize)]
    struct Summary {
        best_loss: f64,
        train_accuracy: f64,
        test_accuracy: f64,
        n_train: usize,
        n_test: usize,
        iterations: usize,
    }
    run.write_json(
        "summary.json",
        &Summary {
            best_loss: outcome.best_loss,
            train_accuracy,
            test_accuracy,
            n_train: task.train.len(),
            n_test: task.test.len(),
            iterations: config.train.max_iters,
        },
    )?;
    println!(
        "trained: loss {:.4}, train accuracy {:.3}, test accuracy {:.3}",
        outcome.best_loss, train_accuracy, test_accuracy
    );
    run.finish("train", &config)
}
