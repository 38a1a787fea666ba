use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{MethodKind, RunConfig};
use crate::error::{FeslError, Result};
use crate::types::Task;

/// One new-only round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub label: f64,
    /// Old model on recovered features.
    pub f1: Option<f64>,
    /// New-space model.
    pub f2: Option<f64>,
    pub prediction: f64,
    pub loss_raw: f64,
    /// `min(loss_raw, 1)`.
    pub loss_clipped: f64,
    /// Clipped loss of `f1`.
    pub loss1: Option<f64>,
    /// Clipped loss of `f2`.
    pub loss2: Option<f64>,
    /// Ensemble weights used for this round's prediction.
    pub alpha: Option<[f64; 2]>,
    /// Expert drawn by FESL-s (1 or 2).
    pub choice: Option<u8>,
}

/// Cumulative clipped losses over the new-only rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub l_s1: Option<f64>,
    pub l_s2: Option<f64>,
    pub l_s12: f64,
    /// Cumulative unclipped loss of the method's predictions.
    pub l_raw: f64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: MethodKind,
    pub dataset: String,
    pub task: Task,
    pub seed: u64,
    pub t2: usize,
    pub config: RunConfig,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub summary: Summary,
    /// Running mean of the raw losses.
    pub avg_cum_loss: Vec<f64>,
    /// Running mean of the clipped losses.
    pub avg_cum_loss_clipped: Vec<f64>,
    pub rounds: Vec<RoundRecord>,
}

impl RunRecord {
    pub fn file_name(&self) -> String {
        format!("{}__{}__seed{}.json", self.dataset, self.method.as_str(), self.seed)
    }

    pub fn final_avg_loss(&self) -> f64 {
        *self.avg_cum_loss.last().unwrap_or(&0.0)
    }

    pub fn final_avg_loss_clipped(&self) -> f64 {
        *self.avg_cum_loss_clipped.last().unwrap_or(&0.0)
    }
}

pub fn write_record(dir: &Path, record: &RunRecord) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| FeslError::io(dir, e))?;
    let path = dir.join(record.file_name());
    let mut text = serde_json::to_string_pretty(record)
        .map_err(|e| FeslError::invalid(format!("cannot serialize record: {e}")))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| FeslError::io(&path, e))?;
    Ok(path)
}

/// Reads every `*.json` record in `dir`, sorted by file name.
pub fn read_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| FeslError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| FeslError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| FeslError::Format {
                line: e.line(),
                msg: format!("{}: {e}", p.display()),
            })
        })
        .collect()
}
