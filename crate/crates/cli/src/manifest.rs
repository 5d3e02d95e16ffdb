use std::fs;
use std::path::{Path, PathBuf};

use giftplace::gift::PhaseTiming;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::jobs::{Job, Outcome};

pub const TOOL: &str = "giftplace";

/// Record of one run: the resolved job plus what it read and wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub job: Job,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub timings: Vec<PhaseTiming>,
}

impl RunManifest {
    pub fn new(job: Job, outcome: Outcome) -> Self {
        RunManifest {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: job.seed(),
            job,
            inputs: outcome.inputs,
            outputs: outcome.outputs,
            timings: outcome.timings,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_json(&text).map_err(|source| CliError::Manifest {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json()).map_err(CliError::io(path))
    }
}
