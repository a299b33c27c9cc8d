use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Per-class loss weights for the two classification terms. A disabled term
/// carries all-zero weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub main: Vec<f64>,
    pub sub: Vec<f64>,
}

impl ClassWeights {
    pub fn uniform(k_main: usize, k_sub: usize) -> Self {
        Self {
            main: vec![1.0; k_main],
            sub: vec![1.0; k_sub],
        }
    }

    pub(crate) fn check(&self, k_main: usize, k_sub: usize) -> Result<()> {
        if self.main.len() != k_main || self.sub.len() != k_sub {
            return Err(invalid(format!(
                "class weight lengths ({}, {}) do not match vocabularies ({k_main}, {k_sub})",
                self.main.len(),
                self.sub.len()
            )));
        }
        if self
            .main
            .iter()
            .chain(&self.sub)
            .any(|w| !(w.is_finite() && *w >= 0.0))
        {
            return Err(invalid("class weights must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Negative log of the Gaussian density `N(s_true; s_hat, sigma2)`.
pub fn time_penalty(s_true: f64, s_hat: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    let d = s_true - s_hat;
    Ok(0.5 * (2.0 * std::f64::consts::PI * sigma2).ln() + d * d / (2.0 * sigma2))
}

/// The three additive pieces of the per-sample objective.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTerms {
    pub main: f64,
    pub sub: f64,
    pub time: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.main + self.sub + self.time
    }
}
