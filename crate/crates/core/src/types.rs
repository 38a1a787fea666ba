//! Domain types shared by every stage of a feature-evolvable stream:
//! feature vectors, labels, the three-phase schedule and the linear model.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{FeslError, Result};

/// Default radius of the L2 ball that confines every linear model.
pub const DEFAULT_RADIUS: f64 = 100.0;

/// A dense, finite, non-empty feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(DVector<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(values))
    }

    pub fn from_dvector(values: DVector<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(FeslError::invalid("feature vector must have dim >= 1"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeslError::invalid(format!(
                "feature {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(FeatureVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "feature vector must have dim >= 1");
        FeatureVector(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = FeslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(Task::Classification),
            "regression" => Ok(Task::Regression),
            other => Err(FeslError::invalid(format!("unknown task '{other}'"))),
        }
    }
}

/// A revealed target. Classification labels are exactly -1 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Label {
    value: f64,
    task: Task,
}

impl Label {
    pub fn new(value: f64, task: Task) -> Result<Self> {
        if !value.is_finite() {
            return Err(FeslError::invalid(format!("label {value} is not finite")));
        }
        if task == Task::Classification && value != 1.0 && value != -1.0 {
            return Err(FeslError::invalid(format!(
                "classification label must be -1 or +1, got {value}"
            )));
        }
        Ok(Label { value, task })
    }

    pub fn classification(positive: bool) -> Self {
        Label {
            value: if positive { 1.0 } else { -1.0 },
            task: Task::Classification,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn task(&self) -> Task {
        self.task
    }
}

/// Which feature spaces are observable in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Only the old space S1 is observed.
    OldOnly,
    /// Both spaces are observed; the map from new to old is learned here.
    Overlap,
    /// The old space has vanished.
    NewOnly,
}

impl Phase {
    pub fn code(self) -> char {
        match self {
            Phase::OldOnly => 'O',
            Phase::Overlap => 'V',
            Phase::NewOnly => 'N',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "O" => Some(Phase::OldOnly),
            "V" => Some(Phase::Overlap),
            "N" => Some(Phase::NewOnly),
            _ => None,
        }
    }
}

/// Lengths of one feature-evolution cycle.
///
/// Rounds are 1-based: `1..=t1-b` are old-only, `t1-b+1..=t1` overlap and
/// `t1+1..=t1+t2` new-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSchedule {
    pub t1: usize,
    pub t2: usize,
    pub b: usize,
    pub d1: usize,
    pub d2: usize,
}

impl StreamSchedule {
    pub fn new(t1: usize, t2: usize, b: usize, d1: usize, d2: usize) -> Result<Self> {
        if b < 1 || b >= t1 {
            return Err(FeslError::invalid(format!(
                "overlap length must satisfy 1 <= b < t1 (b={b}, t1={t1})"
            )));
        }
        if t2 < 3 {
            return Err(FeslError::invalid(format!("t2 must be >= 3, got {t2}")));
        }
        if d1 == 0 || d2 == 0 {
            return Err(FeslError::invalid("feature dimensions must be positive"));
        }
        Ok(StreamSchedule { t1, t2, b, d1, d2 })
    }

    pub fn total_rounds(&self) -> usize {
        self.t1 + self.t2
    }

    pub fn phase_of(&self, round: usize) -> Result<Phase> {
        match round {
            0 => Err(FeslError::invalid("rounds are 1-based")),
            r if r <= self.t1 - self.b => Ok(Phase::OldOnly),
            r if r <= self.t1 => Ok(Phase::Overlap),
            r if r <= self.t1 + self.t2 => Ok(Phase::NewOnly),
            r => Err(FeslError::invalid(format!(
                "round {r} is past the end of the cycle ({} rounds)",
                self.total_rounds()
            ))),
        }
    }
}

/// One round's observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    round: usize,
    phase: Phase,
    x_old: Option<FeatureVector>,
    x_new: Option<FeatureVector>,
    label: Label,
}

impl Instance {
    pub fn new(
        round: usize,
        phase: Phase,
        x_old: Option<FeatureVector>,
        x_new: Option<FeatureVector>,
        label: Label,
    ) -> Result<Self> {
        let ok = match phase {
            Phase::OldOnly => x_old.is_some() && x_new.is_none(),
            Phase::Overlap => x_old.is_some() && x_new.is_some(),
            Phase::NewOnly => x_old.is_none() && x_new.is_some(),
        };
        if !ok {
            return Err(FeslError::invalid(format!(
                "round {round}: feature vectors do not match phase {phase:?}"
            )));
        }
        Ok(Instance {
            round,
            phase,
            x_old,
            x_new,
            label,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn x_old(&self) -> Option<&FeatureVector> {
        self.x_old.as_ref()
    }

    pub fn x_new(&self) -> Option<&FeatureVector> {
        self.x_new.as_ref()
    }

    pub fn label(&self) -> Label {
        self.label
    }
}

/// A linear predictor whose weights stay inside an L2 ball.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: DVector<f64>,
    radius: f64,
}

impl LinearModel {
    /// Builds a model, projecting `weights` into the ball.
    pub fn new(weights: DVector<f64>, radius: f64) -> Result<Self> {
        let weights = project_ball(&weights, radius)?;
        Ok(LinearModel { weights, radius })
    }

    pub fn zeros(dim: usize, radius: f64) -> Result<Self> {
        Self::new(DVector::zeros(dim), radius)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        predict(self, x)
    }
}

/// Inner product of the model weights with `x`.
pub fn predict(model: &LinearModel, x: &FeatureVector) -> Result<f64> {
    check_dim(model.dim(), x.dim())?;
    Ok(model.weights.dot(x.values()))
}

/// Euclidean projection onto the ball of the given radius (radial scaling).
pub fn project_ball(v: &DVector<f64>, radius: f64) -> Result<DVector<f64>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(FeslError::invalid(format!(
            "ball radius must be positive and finite, got {radius}"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(FeslError::invalid("cannot project a non-finite vector"));
    }
    let norm = v.norm();
    if norm <= radius {
        Ok(v.clone())
    } else {
        let mut out = v * (radius / norm);
        // rounding can leave the scaled norm a hair above the radius
        let n = out.norm();
        if n > radius {
            out *= radius / n;
        }
        Ok(out)
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(FeslError::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}
