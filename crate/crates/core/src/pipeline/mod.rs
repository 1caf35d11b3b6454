//! End-to-end orchestration: ingest, features, embed, train, evaluate,
//! report and predict.
//!
//! Each stage reads the artifacts of the previous ones from the output
//! directory and writes its own, so stages can be rerun individually.
//! Every artifact is a pure function of the corpus and the config.

mod config;
mod ingest;
mod predict;
mod stages;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{CorpusPaths, RunConfig, SplitConfig, StubConfig};
pub use ingest::{ingest, IngestFailure, IngestOptions, IngestReport, ARTICLES_DIR, INGEST_REPORT};
pub use predict::{predict, MetricPrediction, Prediction};
pub use stages::{
    embed, evaluate, export_requests, extract, load_checkpoints, render_report, run_pipeline, train, ExportRequest,
    FeatureSummary, MetricFeatureStats, Stage,
};
pub(crate) use stages::pool_bundles;

/// Runs one stage outside [`run_pipeline`], recording it in the manifest.
pub fn run_single<T>(cfg: &RunConfig, stage: Stage, f: impl FnOnce(&RunConfig) -> Result<T>) -> Result<T, StageError> {
    stages::run_stage(cfg, stage, || f(cfg))
}

/// Artifact locations under the output directory.
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
    pub fn features_dir(&self) -> PathBuf {
        self.root.join("features")
    }
    pub fn feature_summary(&self) -> PathBuf {
        self.root.join("features").join("summary.json")
    }
    pub fn embeddings_dir(&self) -> PathBuf {
        self.root.join("embeddings")
    }
    pub fn checkpoints_dir(&self) -> PathBuf {
        self.root.join("checkpoints")
    }
    pub fn split(&self) -> PathBuf {
        self.root.join("split.json")
    }
    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }
    pub fn report_txt(&self) -> PathBuf {
        self.root.join("report.txt")
    }
    pub fn manifest(&self) -> PathBuf {
        self.root.join("MANIFEST.json")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Progress log of the stages run in an output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: Vec<StageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
}

impl Manifest {
    pub fn load_or_default(ws: &Workspace) -> Self {
        std::fs::read_to_string(ws.manifest())
            .ok()
            .and_then(|s| serde_json::from_str(&s).ok())
            .unwrap_or_default()
    }

    /// Records the outcome of `stage`, replacing an earlier entry.
    pub fn record(&mut self, stage: Stage, outcome: std::result::Result<(), &Error>) {
        self.stages.retain(|s| s.stage != stage.as_str());
        let (status, error) = match outcome {
            Ok(()) => ("ok", None),
            Err(e) => ("failed", Some(e.to_string())),
        };
        self.stages.push(StageRecord { stage: stage.as_str().into(), status: status.into(), error });
        self.failed_stage = outcome.is_err().then(|| stage.as_str().to_string());
    }

    pub fn save(&self, ws: &Workspace) -> Result<()> {
        write_json(&ws.manifest(), self)
    }
}

/// A stage error together with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let json = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    match std::fs::read_to_string(path) {
        Ok(s) => Ok(serde_json::from_str(&s)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(Error::NotFound(format!("{what} ({}); run the earlier stages first", path.display())))
        }
        Err(e) => Err(Error::io(path, e)),
    }
}
