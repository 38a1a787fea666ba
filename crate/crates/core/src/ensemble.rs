//! Two-expert ensembles over the recovered-space model (expert 1) and the
//! new-space model (expert 2).
//!
//! * [`Mode::Combine`]: exponentially weighted average of both predictions.
//! * [`Mode::Select`]: draw one expert per round from fixed-share weights,
//!   which tracks a comparator that switches experts once.
//!
//! Weights are kept as normalized log-weights so that thousands of rounds of
//! multiplicative decay never underflow; every exposed weight pair sums to 1.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FeslError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Combine,
    Select,
}

/// One of the two base learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expert {
    /// The old model applied to recovered features.
    Recovered,
    /// The model trained on the new feature space.
    Current,
}

impl Expert {
    /// 1-based index used in reports.
    pub fn index(self) -> u8 {
        match self {
            Expert::Recovered => 1,
            Expert::Current => 2,
        }
    }
}

/// Binary entropy in nats, defined on the open interval (0, 1).
pub fn binary_entropy(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x < 1.0);
    -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
}

/// Learning rate of the combination ensemble: `sqrt(8 ln 2 / t2)`.
pub fn eta_combine(t2: usize) -> Result<f64> {
    if t2 < 2 {
        return Err(FeslError::invalid(format!("eta_combine needs t2 >= 2, got {t2}")));
    }
    Ok((8.0 * LN_2 / t2 as f64).sqrt())
}

/// Fixed-share mixing rate `1 / (t2 - 1)`.
pub fn delta_select(t2: usize) -> Result<f64> {
    if t2 < 3 {
        return Err(FeslError::invalid(format!("delta_select needs t2 >= 3, got {t2}")));
    }
    Ok(1.0 / (t2 - 1) as f64)
}

/// Learning rate of the selection ensemble:
/// `sqrt(8 / t2 * (2 ln 2 + (t2 - 1) H(1 / (t2 - 1))))`.
pub fn eta_select(t2: usize) -> Result<f64> {
    let delta = delta_select(t2)?;
    let t2f = t2 as f64;
    let inner = 2.0 * LN_2 + (t2f - 1.0) * binary_entropy(delta);
    Ok((8.0 / t2f * inner).sqrt())
}

/// Selection probabilities from (possibly unnormalized) nonnegative weights.
pub fn selection_distribution(weights: [f64; 2]) -> Result<[f64; 2]> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(FeslError::invalid("weights must be finite and nonnegative"));
    }
    let total = weights[0] + weights[1];
    if total <= 0.0 {
        return Err(FeslError::invalid("weights must not all be zero"));
    }
    Ok([weights[0] / total, weights[1] / total])
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone)]
pub struct EnsembleState {
    log_alpha: [f64; 2],
    eta: f64,
    delta: f64,
    mode: Mode,
    rng: ChaCha8Rng,
    clip_losses: bool,
}

impl EnsembleState {
    /// Uniform weights with explicit parameters.
    pub fn new(mode: Mode, eta: f64, delta: f64, seed: u64, clip_losses: bool) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(FeslError::invalid(format!("eta must be positive, got {eta}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(FeslError::invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        if mode == Mode::Combine && delta != 0.0 {
            return Err(FeslError::invalid("the combination ensemble has no mixing rate"));
        }
        Ok(EnsembleState {
            log_alpha: [-LN_2, -LN_2],
            eta,
            delta,
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            clip_losses,
        })
    }

    /// Combination ensemble tuned for a horizon of `t2` rounds.
    pub fn combine(t2: usize, clip_losses: bool) -> Result<Self> {
        Self::new(Mode::Combine, eta_combine(t2)?, 0.0, 0, clip_losses)
    }

    /// Selection ensemble tuned for a horizon of `t2` rounds.
    pub fn select(t2: usize, seed: u64, clip_losses: bool) -> Result<Self> {
        Self::new(Mode::Select, eta_select(t2)?, delta_select(t2)?, seed, clip_losses)
    }

    /// Replaces the random stream used by the selection draws.
    pub fn with_rng(mut self, rng: ChaCha8Rng) -> Self {
        self.rng = rng;
        self
    }

    /// Replaces the weights by the normalization of `weights`.
    pub fn with_weights(mut self, weights: [f64; 2]) -> Result<Self> {
        let p = selection_distribution(weights)?;
        self.log_alpha = [p[0].ln(), p[1].ln()];
        Ok(self)
    }

    pub fn alpha(&self) -> [f64; 2] {
        [self.log_alpha[0].exp(), self.log_alpha[1].exp()]
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn clip_losses(&self) -> bool {
        self.clip_losses
    }

    fn require(&self, mode: Mode) -> Result<()> {
        if self.mode != mode {
            return Err(FeslError::state(format!(
                "operation needs a {mode:?} ensemble, this one is {:?}",
                self.mode
            )));
        }
        Ok(())
    }

    fn prepare_loss(&self, loss: f64) -> Result<f64> {
        if !(loss.is_finite() && loss >= 0.0) {
            return Err(FeslError::invalid(format!(
                "loss must be finite and nonnegative, got {loss}"
            )));
        }
        Ok(if self.clip_losses { loss.min(1.0) } else { loss })
    }

    /// Weighted average `alpha_1 f1 + alpha_2 f2`.
    pub fn combine_predict(&self, f1: f64, f2: f64) -> Result<f64> {
        self.require(Mode::Combine)?;
        let [a1, a2] = self.alpha();
        let p = a1 * f1 + a2 * f2;
        // keep the convex combination inside [min, max] despite rounding
        Ok(p.clamp(f1.min(f2), f1.max(f2)))
    }

    /// Draws an expert with probability proportional to its weight.
    pub fn select_predict(&mut self, f1: f64, f2: f64) -> Result<(Expert, f64)> {
        self.require(Mode::Select)?;
        let p1 = self.alpha()[0];
        let u: f64 = self.rng.random();
        Ok(if u < p1 {
            (Expert::Recovered, f1)
        } else {
            (Expert::Current, f2)
        })
    }

    fn exponential_step(&self, loss1: f64, loss2: f64) -> Result<[f64; 2]> {
        let l1 = self.prepare_loss(loss1)?;
        let l2 = self.prepare_loss(loss2)?;
        Ok([
            self.log_alpha[0] - self.eta * l1,
            self.log_alpha[1] - self.eta * l2,
        ])
    }

    fn set_normalized(&mut self, log_w: [f64; 2]) {
        let z = log_sum_exp(log_w[0], log_w[1]);
        self.log_alpha = [log_w[0] - z, log_w[1] - z];
    }

    /// Exponential-weights update `alpha_i <- alpha_i exp(-eta l_i)`, renormalized.
    pub fn update_combine(&mut self, loss1: f64, loss2: f64) -> Result<()> {
        self.require(Mode::Combine)?;
        let v = self.exponential_step(loss1, loss2)?;
        self.set_normalized(v);
        Ok(())
    }

    /// Fixed-share update: `v_i = alpha_i exp(-eta l_i)`, `W = v_1 + v_2`,
    /// `alpha_i = delta W / 2 + (1 - delta) v_i`, then renormalized.
    pub fn update_select(&mut self, loss1: f64, loss2: f64) -> Result<()> {
        self.require(Mode::Select)?;
        let v = self.exponential_step(loss1, loss2)?;
        if self.delta == 0.0 {
            self.set_normalized(v);
            return Ok(());
        }
        let log_w = log_sum_exp(v[0], v[1]);
        let share = self.delta / 2.0;
        let mix = |vi: f64| log_w + (share + (1.0 - self.delta) * (vi - log_w).exp()).ln();
        self.set_normalized([mix(v[0]), mix(v[1])]);
        Ok(())
    }

    /// Dispatches to the update of this ensemble's mode.
    pub fn update(&mut self, loss1: f64, loss2: f64) -> Result<()> {
        match self.mode {
            Mode::Combine => self.update_combine(loss1, loss2),
            Mode::Select => self.update_select(loss1, loss2),
        }
    }
}
