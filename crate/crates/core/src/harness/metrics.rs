//! Evaluation metrics and the regret-bound checks for both ensembles.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{MethodKind, RunRecord};
use crate::ensemble::{binary_entropy, delta_select};
use crate::error::{FeslError, Result};
use crate::streams::CycleStream;
use crate::types::{Phase, Task};

/// Running mean `(1/t) sum_{s<=t} l_s`.
pub fn avg_cumulative_series(losses: &[f64]) -> Vec<f64> {
    let mut total = 0.0;
    losses
        .iter()
        .enumerate()
        .map(|(i, l)| {
            total += l;
            total / (i + 1) as f64
        })
        .collect()
}

/// Share of new-only rounds whose prediction has the label's sign
/// (a zero prediction counts as positive).
pub fn accuracy_of(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if predictions.len() != labels.len() || predictions.is_empty() {
        return Err(FeslError::invalid(format!(
            "need equally long, nonempty predictions and labels ({} vs {})",
            predictions.len(),
            labels.len()
        )));
    }
    let correct = predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| (if **p >= 0.0 { 1.0 } else { -1.0 }) == **y)
        .count();
    Ok(correct as f64 / predictions.len() as f64)
}

pub fn accuracy(record: &RunRecord, stream: &CycleStream) -> Result<f64> {
    if stream.task != Task::Classification || record.task != Task::Classification {
        return Err(FeslError::invalid("accuracy needs a classification task"));
    }
    let labels: Vec<f64> = stream.phase(Phase::NewOnly).map(|i| i.label().value()).collect();
    let predictions: Vec<f64> = record.rounds.iter().map(|r| r.prediction).collect();
    accuracy_of(&predictions, &labels)
}

/// Regret allowance of the combination ensemble: `sqrt(t2 / 2 * ln 2)`.
pub fn theorem1_bound(t2: usize) -> f64 {
    (t2 as f64 / 2.0 * LN_2).sqrt()
}

/// Regret allowance of the selection ensemble against the best single-switch
/// sequence: `sqrt(t2 / 2 * (2 ln 2 + H(delta) / delta))`, `delta = 1/(t2-1)`.
pub fn theorem2_bound(t2: usize) -> Result<f64> {
    let delta = delta_select(t2)?;
    Ok((t2 as f64 / 2.0 * (2.0 * LN_2 + binary_entropy(delta) / delta)).sqrt())
}

/// Best loss of a sequence that follows expert 1 for the first `s` rounds and
/// expert 2 afterwards, `s` in `0..=len`. `s = 0` is expert 2 throughout and
/// `s = len` expert 1 throughout; ties go to the smallest `s`.
pub fn best_switch_loss(loss1: &[f64], loss2: &[f64]) -> Result<(usize, f64)> {
    if loss1.is_empty() || loss1.len() != loss2.len() {
        return Err(FeslError::invalid(
            "switch loss needs two nonempty sequences of equal length",
        ));
    }
    let mut prefix = 0.0;
    let mut suffix: f64 = loss2.iter().sum();
    let mut best = (0, prefix + suffix);
    for s in 1..=loss1.len() {
        prefix += loss1[s - 1];
        suffix -= loss2[s - 1];
        let total = prefix + suffix;
        if total < best.1 {
            best = (s, total);
        }
    }
    // recompute the winner exactly; the running suffix accumulates rounding
    let (s, _) = best;
    let exact = loss1[..s].iter().sum::<f64>() + loss2[s..].iter().sum::<f64>();
    Ok((s, exact))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub method: MethodKind,
    pub dataset: String,
    pub seed: u64,
    pub t2: usize,
    /// Cumulative clipped loss of the ensemble.
    pub ensemble_loss: f64,
    /// `min(L1, L2)` for combination, `min_s L^s` for selection.
    pub comparator: f64,
    pub bound: f64,
    /// `ensemble_loss - (comparator + bound)`; nonpositive when the bound holds.
    pub excess: f64,
    /// Deterministic verdict; `None` for selection, whose bound holds in expectation.
    pub pass: Option<bool>,
}

fn base_losses(record: &RunRecord) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut l1 = Vec::with_capacity(record.rounds.len());
    let mut l2 = Vec::with_capacity(record.rounds.len());
    for r in &record.rounds {
        match (r.loss1, r.loss2) {
            (Some(a), Some(b)) => {
                l1.push(a);
                l2.push(b);
            }
            _ => return Err(FeslError::invalid("record lacks base-model losses")),
        }
    }
    Ok((l1, l2))
}

/// Checks a FESL-c record against its deterministic bound, or reports the
/// excess of a FESL-s record over its expected-loss bound.
pub fn check_bounds(record: &RunRecord) -> Result<BoundReport> {
    if !record.config.clip_losses {
        return Err(FeslError::invalid(
            "bound checks need a run whose ensemble weights saw clipped losses",
        ));
    }
    let (l1, l2) = base_losses(record)?;
    let t2 = record.rounds.len();
    let ensemble_loss = record.summary.l_s12;
    let (comparator, bound) = match record.method {
        MethodKind::FeslC => {
            let s1: f64 = l1.iter().sum();
            let s2: f64 = l2.iter().sum();
            (s1.min(s2), theorem1_bound(t2))
        }
        MethodKind::FeslS => (best_switch_loss(&l1, &l2)?.1, theorem2_bound(t2)?),
        other => {
            return Err(FeslError::invalid(format!(
                "{} is not an ensemble method",
                other.as_str()
            )))
        }
    };
    let excess = ensemble_loss - (comparator + bound);
    let pass = (record.method == MethodKind::FeslC).then_some(excess <= 1e-9);
    Ok(BoundReport {
        method: record.method,
        dataset: record.dataset.clone(),
        seed: record.seed,
        t2,
        ensemble_loss,
        comparator,
        bound,
        excess,
        pass,
    })
}

/// Slack per round granted to the seed-averaged selection check.
pub const SELECTION_SLACK_PER_ROUND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub dataset: String,
    pub runs: usize,
    pub t2: usize,
    /// Mean over runs of `L12 - (min_s L^s + bound)`.
    pub mean_excess: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Averages FESL-s bound excesses over runs of one stream.
pub fn check_selection_expectation(reports: &[BoundReport]) -> Result<ExpectationReport> {
    let first = reports
        .first()
        .ok_or_else(|| FeslError::invalid("no selection runs to average"))?;
    if reports
        .iter()
        .any(|r| r.method != MethodKind::FeslS || r.t2 != first.t2 || r.dataset != first.dataset)
    {
        return Err(FeslError::invalid(
            "expectation check needs FESL-s runs of a single stream",
        ));
    }
    let mean_excess = reports.iter().map(|r| r.excess).sum::<f64>() / reports.len() as f64;
    let slack = SELECTION_SLACK_PER_ROUND * first.t2 as f64;
    Ok(ExpectationReport {
        dataset: first.dataset.clone(),
        runs: reports.len(),
        t2: first.t2,
        mean_excess,
        slack,
        pass: mean_excess <= slack,
    })
}
