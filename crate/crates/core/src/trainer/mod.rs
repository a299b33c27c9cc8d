//! End-to-end training: class weighting, mini-batch RMSprop with global-norm
//! clipping, per-epoch loss curves and early stopping on validation loss.

mod rmsprop;
mod train;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use rmsprop::{rmsprop_step, OptimizerState};
pub use train::{evaluate_loss, train, write_loss_curve, EpochRecord, TrainOutcome};
pub use weights::{compute_class_weights, inverse_frequency, Objective};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_eps: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Non-improving epochs tolerated before stopping.
    pub patience: usize,
    pub rng_seed: u64,
    pub grad_clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            rms_decay: 0.9,
            rms_eps: 1e-8,
            batch_size: 32,
            max_epochs: 30,
            patience: 5,
            rng_seed: 0,
            grad_clip_norm: 5.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rms_decay > 0.0 && self.rms_decay < 1.0) {
            return Err(invalid(format!(
                "rms_decay must lie in (0, 1), got {}",
                self.rms_decay
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.rms_eps > 0.0) || !(self.grad_clip_norm > 0.0) {
            return Err(invalid("rms_eps and grad_clip_norm must be positive"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be positive"));
        }
        Ok(())
    }
}
