//! Logistic loss (classification, in bits) and square loss (regression).

use std::f64::consts::LN_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{FeslError, Result};
use crate::types::{FeatureVector, Label, LinearModel, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `log2(1 + exp(-y f))`
    Logistic,
    /// `(y - f)^2`
    Square,
}

impl LossKind {
    /// The loss used for a task.
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Classification => LossKind::Logistic,
            Task::Regression => LossKind::Square,
        }
    }

    pub fn task(self) -> Task {
        match self {
            LossKind::Logistic => Task::Classification,
            LossKind::Square => Task::Regression,
        }
    }

    fn check_label(self, label: Label) -> Result<()> {
        if label.task() != self.task() {
            return Err(FeslError::invalid(format!(
                "{self:?} loss needs a {} label",
                self.task().as_str()
            )));
        }
        Ok(())
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn loss(kind: LossKind, prediction: f64, label: Label) -> Result<f64> {
    kind.check_label(label)?;
    if !prediction.is_finite() {
        return Err(FeslError::invalid(format!(
            "prediction {prediction} is not finite"
        )));
    }
    let y = label.value();
    Ok(match kind {
        LossKind::Logistic => softplus(-y * prediction) / LN_2,
        LossKind::Square => (y - prediction).powi(2),
    })
}

/// Derivative of the loss with respect to the prediction.
pub fn loss_derivative(kind: LossKind, prediction: f64, label: Label) -> Result<f64> {
    kind.check_label(label)?;
    let y = label.value();
    Ok(match kind {
        LossKind::Logistic => -y * sigmoid(-y * prediction) / LN_2,
        LossKind::Square => 2.0 * (prediction - y),
    })
}

/// Gradient of `loss(<w, x>, y)` with respect to the weights `w`.
pub fn loss_gradient_wrt_model(
    kind: LossKind,
    model: &LinearModel,
    x: &FeatureVector,
    label: Label,
) -> Result<DVector<f64>> {
    let f = model.predict(x)?;
    let d = loss_derivative(kind, f, label)?;
    Ok(x.values() * d)
}
