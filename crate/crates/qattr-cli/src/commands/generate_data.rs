use std::path::Path;

use qattr_core::datasets::SamplesFile;

use crate::config::GenerateDataConfig;
use crate::data::{image_side, load_samples};
use crate::error::CliError;
use crate::output::{read_config, RunDir};

pub fn run(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let config: GenerateDataConfig = read_config(config_path)?;
    let mut run = RunDir::create(out)?;
    let samples = load_samples(&config.dataset)?;
    let file = SamplesFile {
        name: serde_json::to_value(config.dataset.name)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        image_side: image_side(&config.dataset, &samples),
        samples,
    };
    run.write_json(&config.output, &file)?;
    println!(
        "wrote {} samples to {}",
        file.samples.len(),
        run.file(&config.output).display()
    );
    run.finish("generate-data", &config)
}
