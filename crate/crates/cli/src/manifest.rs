use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{io_failure, Failure};

/// Everything needed to reproduce a run. Written next to each output file.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub command: &'a str,
    pub parameters: &'a P,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: &'static str,
    pub outputs: Vec<String>,
}

impl<'a, P: Serialize> RunManifest<'a, P> {
    pub fn new(command: &'a str, parameters: &'a P, seed: Option<u64>) -> Self {
        RunManifest {
            command,
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: Vec::new(),
        }
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(io_failure)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `out.csv` -> `out.csv.manifest.json`; prefixes get the suffix appended.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
