use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SourceKind;
use crate::error::{FeslError, Result};
use crate::types::{FeatureVector, Instance, Label, Phase, StreamSchedule, Task};

const STREAM_MAGIC: &str = "fesl-stream 1";

/// One complete cycle: old-only rounds, the overlap, then new-only rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStream {
    pub name: String,
    pub task: Task,
    pub schedule: StreamSchedule,
    pub seed: u64,
    instances: Vec<Instance>,
}

/// The usual split: `t1 = n / 2`, `t2 = n - t1`, with an overlap of 5 rounds
/// for small synthetic sets, 10 for larger ones and 50 for two-view data.
pub fn default_schedule(n: usize, d1: usize, d2: usize, source: SourceKind) -> Result<StreamSchedule> {
    let b = match source {
        SourceKind::TwoView => 50,
        SourceKind::SyntheticGaussian | SourceKind::Generated if n <= 1000 => 5,
        SourceKind::SyntheticGaussian | SourceKind::Generated => 10,
    };
    let t1 = n / 2;
    StreamSchedule::new(t1, n - t1, b, d1, d2)
}

/// Shuffles the batch with `seed` and lays the first `t1 + t2` rows out as a cycle.
///
/// Row `i` of `features_old` and `features_new` must describe the same sample.
pub fn build_cycle(
    features_old: &DMatrix<f64>,
    features_new: &DMatrix<f64>,
    labels: &[f64],
    task: Task,
    schedule: StreamSchedule,
    seed: u64,
) -> Result<CycleStream> {
    let n = features_old.nrows();
    if features_new.nrows() != n || labels.len() != n {
        return Err(FeslError::invalid(format!(
            "row counts differ: old {n}, new {}, labels {}",
            features_new.nrows(),
            labels.len()
        )));
    }
    if features_old.ncols() != schedule.d1 || features_new.ncols() != schedule.d2 {
        return Err(FeslError::invalid(format!(
            "feature widths ({}, {}) do not match schedule (d1={}, d2={})",
            features_old.ncols(),
            features_new.ncols(),
            schedule.d1,
            schedule.d2
        )));
    }
    if n < schedule.total_rounds() {
        return Err(FeslError::invalid(format!(
            "{n} rows cannot fill {} rounds",
            schedule.total_rounds()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let row = |m: &DMatrix<f64>, i: usize| FeatureVector::new(m.row(i).iter().copied().collect());
    let instances = order
        .iter()
        .take(schedule.total_rounds())
        .enumerate()
        .map(|(k, &i)| {
            let round = k + 1;
            let phase = schedule.phase_of(round)?;
            let x_old = match phase {
                Phase::NewOnly => None,
                _ => Some(row(features_old, i)?),
            };
            let x_new = match phase {
                Phase::OldOnly => None,
                _ => Some(row(features_new, i)?),
            };
            Instance::new(round, phase, x_old, x_new, Label::new(labels[i], task)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CycleStream {
        name: "unnamed".into(),
        task,
        schedule,
        seed,
        instances,
    })
}

fn join(v: &FeatureVector) -> String {
    let cells: Vec<String> = v.as_slice().iter().map(|x| x.to_string()).collect();
    cells.join(",")
}

impl CycleStream {
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    /// Instances of one phase, in round order.
    pub fn phase(&self, phase: Phase) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(move |i| i.phase() == phase)
    }

    /// Serializes to the line-oriented stream format.
    ///
    /// ```text
    /// fesl-stream 1
    /// name <name>
    /// task classification|regression
    /// schedule t1=<> t2=<> b=<> d1=<> d2=<>
    /// seed <seed>
    /// <round> <O|V|N> <label> <old values or -> <new values or ->
    /// ```
    pub fn to_text(&self) -> String {
        let s = &self.schedule;
        let mut out = String::new();
        writeln!(out, "{STREAM_MAGIC}").unwrap();
        writeln!(out, "name {}", self.name).unwrap();
        writeln!(out, "task {}", self.task.as_str()).unwrap();
        writeln!(out, "schedule t1={} t2={} b={} d1={} d2={}", s.t1, s.t2, s.b, s.d1, s.d2).unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        for inst in &self.instances {
            writeln!(
                out,
                "{} {} {} {} {}",
                inst.round(),
                inst.phase().code(),
                inst.label().value(),
                inst.x_old().map_or_else(|| "-".to_string(), join),
                inst.x_new().map_or_else(|| "-".to_string(), join),
            )
            .unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| FeslError::format(0, format!("missing '{key}' header")))?;
            if key == STREAM_MAGIC {
                return if line == STREAM_MAGIC {
                    Ok((no, String::new()))
                } else {
                    Err(FeslError::format(no, format!("expected '{STREAM_MAGIC}'")))
                };
            }
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(|r| (no, r.to_string()))
                .ok_or_else(|| FeslError::format(no, format!("expected '{key} ...'")))
        };
        header(STREAM_MAGIC)?;
        let (_, name) = header("name")?;
        let (no, task) = header("task")?;
        let task: Task = task.parse().map_err(|_| FeslError::format(no, "bad task"))?;
        let (no, sched) = header("schedule")?;
        let schedule = parse_schedule(&sched).map_err(|m| FeslError::format(no, m))?;
        let (no, seed) = header("seed")?;
        let seed = seed
            .parse()
            .map_err(|_| FeslError::format(no, "bad seed"))?;

        let mut instances = Vec::with_capacity(schedule.total_rounds());
        for (no, line) in lines.filter(|(_, l)| !l.is_empty()) {
            let inst = parse_instance(line, task, &schedule)
                .map_err(|e| FeslError::format(no, e.to_string()))?;
            if inst.round() != instances.len() + 1 {
                return Err(FeslError::format(no, "rounds must be consecutive from 1"));
            }
            instances.push(inst);
        }
        if instances.len() != schedule.total_rounds() {
            return Err(FeslError::format(
                0,
                format!(
                    "expected {} rounds, found {}",
                    schedule.total_rounds(),
                    instances.len()
                ),
            ));
        }
        Ok(CycleStream {
            name,
            task,
            schedule,
            seed,
            instances,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| FeslError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| FeslError::io(path, e))?;
        Self::from_text(&text)
    }
}

fn parse_schedule(s: &str) -> std::result::Result<StreamSchedule, String> {
    let mut vals = [None; 5];
    for part in s.split_whitespace() {
        let (k, v) = part.split_once('=').ok_or(format!("bad schedule field '{part}'"))?;
        let slot = ["t1", "t2", "b", "d1", "d2"]
            .iter()
            .position(|n| *n == k)
            .ok_or(format!("unknown schedule field '{k}'"))?;
        vals[slot] = Some(v.parse::<usize>().map_err(|_| format!("bad value '{v}'"))?);
    }
    let [Some(t1), Some(t2), Some(b), Some(d1), Some(d2)] = vals else {
        return Err("schedule needs t1, t2, b, d1 and d2".into());
    };
    StreamSchedule::new(t1, t2, b, d1, d2).map_err(|e| e.to_string())
}

fn parse_instance(line: &str, task: Task, schedule: &StreamSchedule) -> Result<Instance> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let [round, phase, label, old, new] = fields.as_slice() else {
        return Err(FeslError::invalid("expected 5 fields"));
    };
    let round: usize = round
        .parse()
        .map_err(|_| FeslError::invalid("bad round"))?;
    let phase = Phase::from_code(phase).ok_or_else(|| FeslError::invalid("bad phase code"))?;
    if schedule.phase_of(round)? != phase {
        return Err(FeslError::invalid(format!(
            "round {round} should be in phase {:?}",
            schedule.phase_of(round)?
        )));
    }
    let label: f64 = label
        .parse()
        .map_err(|_| FeslError::invalid("bad label"))?;
    let vector = |s: &str, dim: usize| -> Result<Option<FeatureVector>> {
        if s == "-" {
            return Ok(None);
        }
        let v = s
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|_| FeslError::invalid(format!("bad value '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != dim {
            return Err(FeslError::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        FeatureVector::new(v).map(Some)
    };
    Instance::new(
        round,
        phase,
        vector(old, schedule.d1)?,
        vector(new, schedule.d2)?,
        Label::new(label, task)?,
    )
}
