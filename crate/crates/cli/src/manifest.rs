//! Run manifests written next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cyclab::grid::GridSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the command name, without the output path, so that a
    /// rerun only needs a fresh `--out`.
    pub argv: Vec<String>,
    pub weight: Option<String>,
    pub atoms: Option<String>,
    pub lambda: Option<String>,
    pub params: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub grid: Option<GridSpec>,
    pub outputs: Vec<String>,
    pub threads: usize,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>) -> Self {
        Self {
            tool: "cyclab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv,
            weight: None,
            atoms: None,
            lambda: None,
            params: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            grid: None,
            outputs: Vec::new(),
            threads: rayon::current_num_threads(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.into(), value);
        self
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    #[cfg(test)]
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `out/scan.csv` → `out/scan.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// `out/scan.csv` → `out/scan.<suffix>`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut m = RunManifest::new("scan", vec!["--degrees".into(), "1,2".into()]);
        m.weight = Some("family=flat".into());
        m.param("M", 4096).tolerance("ridge", 1e-14).tolerance("odd", 0.1 + 0.2);
        m.grid = Some(GridSpec::standard());
        let s = m.to_json().unwrap();
        let back = RunManifest::from_json(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json().unwrap(), s);
    }

    #[test]
    fn paths() {
        assert_eq!(manifest_path(Path::new("a/scan.csv")), PathBuf::from("a/scan.manifest.json"));
        assert_eq!(sibling(Path::new("w.csv"), "ladder.csv"), PathBuf::from("w.ladder.csv"));
    }
}
