//! Runs the five methods over a cycle and records per-round results.
//!
//! All methods share the first stage: OGD on the old space for rounds
//! `1..=t1`, accumulating the overlap pairs and solving the map at `t1`. They
//! differ only on the new-only rounds:
//!
//! | method | prediction                          | updates        |
//! |--------|-------------------------------------|----------------|
//! | NOGD   | fresh model on new features         | new model      |
//! | ROGD-u | old model on recovered features     | old model      |
//! | ROGD-f | old model on recovered features     | none           |
//! | FESL-c | weighted average of both            | both + weights |
//! | FESL-s | one of both, drawn from the weights | both + weights |

mod experiment;
pub mod metrics;
pub mod presets;
mod record;
mod report;

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{eta_select, EnsembleState, Expert, Mode};
use crate::error::{FeslError, Result};
use crate::losses::{loss, LossKind};
use crate::ogd::{random_model, OgdState};
use crate::recovery::{MapEstimator, DEFAULT_RIDGE};
use crate::streams::CycleStream;
use crate::types::{Phase, Task, DEFAULT_RADIUS};

pub use experiment::{derive_seed, run_grid, synthetic_stream};
pub use record::{read_records, write_record, RoundRecord, RunRecord, Summary};
pub use report::{aggregate, format_table, trend_csv, AggregateRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Nogd,
    RogdU,
    RogdF,
    FeslC,
    FeslS,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Nogd,
        MethodKind::RogdU,
        MethodKind::RogdF,
        MethodKind::FeslC,
        MethodKind::FeslS,
    ];

    pub const BASELINES: [MethodKind; 3] = [MethodKind::Nogd, MethodKind::RogdU, MethodKind::RogdF];

    /// Command-line spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Nogd => "nogd",
            MethodKind::RogdU => "rogdu",
            MethodKind::RogdF => "rogdf",
            MethodKind::FeslC => "feslc",
            MethodKind::FeslS => "fesls",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            MethodKind::Nogd => "NOGD",
            MethodKind::RogdU => "ROGD-u",
            MethodKind::RogdF => "ROGD-f",
            MethodKind::FeslC => "FESL-c",
            MethodKind::FeslS => "FESL-s",
        }
    }

    fn uses_recovered(self) -> bool {
        self != MethodKind::Nogd
    }

    fn uses_new(self) -> bool {
        matches!(self, MethodKind::Nogd | MethodKind::FeslC | MethodKind::FeslS)
    }

    fn updates_recovered(self) -> bool {
        matches!(self, MethodKind::RogdU | MethodKind::FeslC | MethodKind::FeslS)
    }
}

impl FromStr for MethodKind {
    type Err = FeslError;

    fn from_str(s: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| FeslError::invalid(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// `c` in the step size `1 / (c sqrt(t))`.
    pub step_scale: f64,
    pub radius: f64,
    pub ridge: f64,
    /// Drives both random initializations and the selection draws.
    pub seed: u64,
    /// Feed losses clipped to [0, 1] to the ensemble weights.
    pub clip_losses: bool,
    /// Overrides the fixed-share rate of FESL-s.
    pub delta: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            step_scale: presets::DEFAULT_STEP_SCALE,
            radius: DEFAULT_RADIUS,
            ridge: DEFAULT_RIDGE,
            seed: 0,
            clip_losses: true,
            delta: None,
        }
    }
}

impl RunConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        RunConfig { seed, ..self }
    }
}

const OLD_INIT_STREAM: u64 = 0;
const NEW_INIT_STREAM: u64 = 1;
const SELECT_STREAM: u64 = 2;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Result of the shared first stage.
#[derive(Debug, Clone)]
pub struct OldSpaceStage {
    pub learner: OgdState,
    pub map: MapEstimator,
}

/// Trains the old-space model over rounds `1..=t1` and learns the map from
/// the overlap rounds.
pub fn train_old_space(stream: &CycleStream, config: &RunConfig) -> Result<OldSpaceStage> {
    let s = stream.schedule;
    let kind = LossKind::for_task(stream.task);
    let init = random_model(s.d1, config.radius, &mut rng_for(config.seed, OLD_INIT_STREAM))?;
    let mut learner = OgdState::new(init, config.step_scale)?;
    let mut map = MapEstimator::new(s.d1, s.d2, config.ridge)?;
    for inst in stream.instances().iter().take(s.t1) {
        let round = inst.round();
        let x_old = inst
            .x_old()
            .ok_or_else(|| FeslError::state("old features missing").at_round(round))?;
        learner = learner
            .step(x_old, inst.label(), kind)
            .map_err(|e| e.at_round(round))?;
        if inst.phase() == Phase::Overlap {
            let x_new = inst.x_new().expect("overlap instances carry both views");
            map.accumulate(x_new, x_old).map_err(|e| e.at_round(round))?;
        }
    }
    map.solve().map_err(|e| e.at_round(s.t1))?;
    Ok(OldSpaceStage { learner, map })
}

/// Runs one method over the whole cycle.
pub fn run_method(stream: &CycleStream, method: MethodKind, config: &RunConfig) -> Result<RunRecord> {
    let stage = train_old_space(stream, config)?;
    run_new_space(stream, &stage, method, config)
}

/// Runs several methods, sharing the first stage.
pub fn run_methods(
    stream: &CycleStream,
    methods: &[MethodKind],
    config: &RunConfig,
) -> Result<Vec<RunRecord>> {
    let stage = train_old_space(stream, config)?;
    methods
        .iter()
        .map(|m| run_new_space(stream, &stage, *m, config))
        .collect()
}

fn build_ensemble(method: MethodKind, t2: usize, config: &RunConfig) -> Result<Option<EnsembleState>> {
    let rng = rng_for(config.seed, SELECT_STREAM);
    Ok(match method {
        MethodKind::FeslC => Some(EnsembleState::combine(t2, config.clip_losses)?),
        MethodKind::FeslS => {
            let state = match config.delta {
                Some(delta) => {
                    EnsembleState::new(Mode::Select, eta_select(t2)?, delta, 0, config.clip_losses)?
                }
                None => EnsembleState::select(t2, 0, config.clip_losses)?,
            };
            Some(state.with_rng(rng))
        }
        _ => None,
    })
}

/// Second stage: rounds `t1+1..=t1+t2` for one method.
pub fn run_new_space(
    stream: &CycleStream,
    stage: &OldSpaceStage,
    method: MethodKind,
    config: &RunConfig,
) -> Result<RunRecord> {
    let s = stream.schedule;
    let kind = LossKind::for_task(stream.task);
    let mut old = stage.learner.restarted();
    let new_init = random_model(s.d2, config.radius, &mut rng_for(config.seed, NEW_INIT_STREAM))?;
    let mut new = OgdState::new(new_init, config.step_scale)?;
    let mut ensemble = build_ensemble(method, s.t2, config)?;

    let mut rounds = Vec::with_capacity(s.t2);
    for inst in stream.phase(Phase::NewOnly) {
        let round = inst.round();
        let at = |e: FeslError| e.at_round(round);
        let x = inst
            .x_new()
            .ok_or_else(|| at(FeslError::state("new features missing")))?;
        let y = inst.label();

        let recovered = if method.uses_recovered() {
            Some(stage.map.recover(x).map_err(at)?)
        } else {
            None
        };
        let f1 = match &recovered {
            Some(r) => Some(old.model().predict(r).map_err(at)?),
            None => None,
        };
        let f2 = if method.uses_new() {
            Some(new.model().predict(x).map_err(at)?)
        } else {
            None
        };
        let alpha = ensemble.as_ref().map(|e| e.alpha());

        let (prediction, choice) = match (method, &mut ensemble) {
            (MethodKind::Nogd, _) => (f2.unwrap(), None),
            (MethodKind::RogdU | MethodKind::RogdF, _) => (f1.unwrap(), None),
            (MethodKind::FeslC, Some(e)) => (e.combine_predict(f1.unwrap(), f2.unwrap()).map_err(at)?, None),
            (MethodKind::FeslS, Some(e)) => {
                let (which, p) = e.select_predict(f1.unwrap(), f2.unwrap()).map_err(at)?;
                (p, Some(which))
            }
            _ => unreachable!("ensemble methods always carry a state"),
        };

        let loss_raw = loss(kind, prediction, y).map_err(at)?;
        let raw1 = f1.map(|f| loss(kind, f, y)).transpose().map_err(at)?;
        let raw2 = f2.map(|f| loss(kind, f, y)).transpose().map_err(at)?;
        if let Some(e) = ensemble.as_mut() {
            e.update(raw1.unwrap(), raw2.unwrap()).map_err(at)?;
        }
        if method.updates_recovered() {
            old = old.step(recovered.as_ref().unwrap(), y, kind).map_err(at)?;
        }
        if method.uses_new() {
            new = new.step(x, y, kind).map_err(at)?;
        }

        rounds.push(RoundRecord {
            round,
            label: y.value(),
            f1,
            f2,
            prediction,
            loss_raw,
            loss_clipped: loss_raw.min(1.0),
            loss1: raw1.map(|l| l.min(1.0)),
            loss2: raw2.map(|l| l.min(1.0)),
            alpha,
            choice: choice.map(Expert::index),
        });
    }

    let (eta, delta) = match &ensemble {
        Some(e) => (Some(e.eta()), Some(e.delta())),
        None => (None, None),
    };
    RunRecord::assemble(stream, method, *config, eta, delta, rounds)
}

impl RunRecord {
    fn assemble(
        stream: &CycleStream,
        method: MethodKind,
        config: RunConfig,
        eta: Option<f64>,
        delta: Option<f64>,
        rounds: Vec<RoundRecord>,
    ) -> Result<RunRecord> {
        let sum_opt = |f: fn(&RoundRecord) -> Option<f64>| -> Option<f64> {
            rounds.iter().map(f).sum::<Option<f64>>()
        };
        let raw: Vec<f64> = rounds.iter().map(|r| r.loss_raw).collect();
        let clipped: Vec<f64> = rounds.iter().map(|r| r.loss_clipped).collect();
        let accuracy = match stream.task {
            Task::Classification => {
                let preds: Vec<f64> = rounds.iter().map(|r| r.prediction).collect();
                let labels: Vec<f64> = rounds.iter().map(|r| r.label).collect();
                Some(metrics::accuracy_of(&preds, &labels)?)
            }
            Task::Regression => None,
        };
        let summary = Summary {
            l_s1: sum_opt(|r| r.loss1),
            l_s2: sum_opt(|r| r.loss2),
            l_s12: clipped.iter().sum(),
            l_raw: raw.iter().sum(),
            accuracy,
        };
        Ok(RunRecord {
            method,
            dataset: stream.name.clone(),
            task: stream.task,
            seed: config.seed,
            t2: stream.schedule.t2,
            config,
            eta,
            delta,
            avg_cum_loss: metrics::avg_cumulative_series(&raw),
            avg_cum_loss_clipped: metrics::avg_cumulative_series(&clipped),
            summary,
            rounds,
        })
    }
}
