//! `manifest.json`: the full configuration of a run, enough to repeat it.
//! No timestamps or paths, so repeated runs write identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli::Command;
use crate::error::{AppError, AppResult};
use crate::io::write_text;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub versions: BTreeMap<String, String>,
    /// Seed after applying the `GP_SEED` override.
    pub seed: u64,
    pub command: Command,
}

impl Manifest {
    pub fn new(command: Command, seed: u64) -> Self {
        let versions = BTreeMap::from([
            ("robreg".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("robreg-core".to_string(), robreg_core::VERSION.to_string()),
        ]);
        Manifest { tool: "robreg".into(), versions, seed, command }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> AppResult<()> {
        write_text(&dir.join(FILE_NAME), &self.to_json())
    }

    pub fn read(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
    }
}
