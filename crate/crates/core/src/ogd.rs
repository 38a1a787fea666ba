//! Projected online gradient descent with step size `1 / (c * sqrt(t))`.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{FeslError, Result};
use crate::losses::{loss_gradient_wrt_model, LossKind};
use crate::recovery::MapEstimator;
use crate::types::{project_ball, FeatureVector, Label, LinearModel};

/// Standard deviation of the Gaussian used for random initial weights.
pub const INIT_STDEV: f64 = 0.01;

/// Draws a small random model inside the ball.
pub fn random_model<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Result<LinearModel> {
    let normal = Normal::new(0.0, INIT_STDEV).expect("valid normal");
    let w = DVector::from_fn(dim, |_, _| normal.sample(rng));
    LinearModel::new(w, radius)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OgdState {
    model: LinearModel,
    step_scale: f64,
    local_round: usize,
}

impl OgdState {
    pub fn new(model: LinearModel, step_scale: f64) -> Result<Self> {
        if !(step_scale > 0.0 && step_scale.is_finite()) {
            return Err(FeslError::invalid(format!(
                "step scale c must be positive, got {step_scale}"
            )));
        }
        Ok(OgdState {
            model,
            step_scale,
            local_round: 1,
        })
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn step_scale(&self) -> f64 {
        self.step_scale
    }

    pub fn local_round(&self) -> usize {
        self.local_round
    }

    /// Step size for the current local round.
    pub fn step_size(&self) -> f64 {
        1.0 / (self.step_scale * (self.local_round as f64).sqrt())
    }

    /// Same model, local round counter reset to 1.
    pub fn restarted(&self) -> Self {
        OgdState {
            local_round: 1,
            ..self.clone()
        }
    }

    /// `w <- project(w - tau * grad)`; the receiver is left untouched.
    pub fn step(&self, x: &FeatureVector, label: Label, kind: LossKind) -> Result<Self> {
        let grad = loss_gradient_wrt_model(kind, &self.model, x, label)?;
        let moved = self.model.weights() - grad * self.step_size();
        let weights = project_ball(&moved, self.model.radius())?;
        Ok(OgdState {
            model: LinearModel::new(weights, self.model.radius())?,
            step_scale: self.step_scale,
            local_round: self.local_round + 1,
        })
    }

    /// Gradient step on the old-space instance recovered from `x_new`.
    pub fn step_recovered(
        &self,
        map: &MapEstimator,
        x_new: &FeatureVector,
        label: Label,
        kind: LossKind,
    ) -> Result<Self> {
        let recovered = map.recover(x_new)?;
        self.step(&recovered, label, kind)
    }
}
