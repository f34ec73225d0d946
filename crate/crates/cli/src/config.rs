//! Flat key-value config file. Keys mirror the long flag names with dashes
//! replaced by underscores; a flag given on the command line wins.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub structure: Option<String>,
    pub ties: Option<String>,
    pub n: Option<usize>,
    pub x: Option<usize>,
    pub delta: Option<String>,
    pub pmf: Option<Vec<String>>,
    pub spec: Option<PathBuf>,
    pub scope: Option<String>,
    pub budget: Option<u64>,
    pub exact_budget: Option<u64>,
    pub cap: Option<usize>,
    pub collapse: Option<bool>,
    pub profile: Option<String>,
    pub which: Option<String>,
    pub untested: Option<bool>,
    pub upper: Option<String>,
    pub grid_count: Option<usize>,
    pub steps: Option<usize>,
    pub deltas: Option<Vec<String>>,
    pub p: Option<String>,
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text).map_err(|message| CliError::Config {
            path: path.display().to_string(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())
    }
}
