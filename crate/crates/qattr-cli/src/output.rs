//! Run-directory bookkeeping: deterministic JSON outputs, the manifest that
//! makes a run replayable, and the wall-time sidecar.
//!
//! Wall time is deliberately kept out of every JSON document so reruns with
//! the same config and seed are byte-identical; it lands in `timing.txt`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;

pub struct RunDir {
    root: PathBuf,
    started: Instant,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(path: &Path) -> Result<RunDir, CliError> {
        std::fs::create_dir_all(path)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))?;
        Ok(RunDir {
            root: path.to_path_buf(),
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Write a JSON document (pretty, trailing newline) and record it as an
    /// output of this run.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::numerical(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        let path = self.file(name);
        std::fs::write(&path, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn record_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Write the manifest (echoing the fully resolved config) and the
    /// timing sidecar. Call last.
    pub fn finish<C: Serialize>(mut self, command: &str, config: &C) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Manifest<'a, C> {
            command: &'a str,
            config: &'a C,
            outputs: &'a [String],
        }
        let outputs = std::mem::take(&mut self.outputs);
        let manifest = Manifest {
            command,
            config,
            outputs: &outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::numerical(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        std::fs::write(self.file("manifest.json"), text)
            .map_err(|e| CliError::io(format!("cannot write manifest: {e}")))?;
        let elapsed = self.started.elapsed().as_secs_f64();
        std::fs::write(
            self.file("timing.txt"),
            format!("wall_time_seconds: {elapsed:.3}\n"),
        )
        .map_err(|e| CliError::io(format!("cannot write timing: {e}")))?;
        Ok(())
    }
}

pub fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
}
