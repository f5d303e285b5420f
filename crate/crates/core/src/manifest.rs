//! Run records written next to every CLI output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{CctReport, ScenarioConfig, StabilityVerdict, StageTimings};
use crate::Result;

pub const MANIFEST_SCHEMA: &str = "polewarp.manifest/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// What a run did, how long each stage took and which files it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub digits: u32,
    pub config: ScenarioConfig,
    pub stages: Vec<StageTime>,
    /// Wall clock across all stages.
    pub total_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ScenarioConfig) -> Self {
        RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            digits: config.precision().decimal_digits(),
            config: config.clone(),
            stages: Vec::new(),
            total_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, stage: &str, seconds: f64) {
        self.stages.push(StageTime {
            stage: stage.into(),
            seconds,
        });
    }

    pub fn record_pipeline(&mut self, t: &StageTimings) {
        self.record("prepare", t.prepare);
        self.record("sep_solve", t.sep_solve);
        self.record("propagation", t.propagation);
        self.record("pade", t.pade);
        self.record("roots", t.roots);
    }

    pub fn stage_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.seconds).sum()
    }

    /// Referenced outputs that are not on disk.
    pub fn missing_outputs(&self) -> Vec<&Path> {
        self.outputs.iter().map(PathBuf::as_path).filter(|p| !p.exists()).collect()
    }
}

/// A verdict together with the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub config: ScenarioConfig,
    pub verdict: StabilityVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CctRecord {
    pub config: ScenarioConfig,
    pub report: CctReport,
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let file = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{file}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}
