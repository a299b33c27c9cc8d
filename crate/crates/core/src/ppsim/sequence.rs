use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Timestamps in days with one mark (dimension id) per event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    pub times: Vec<f64>,
    pub marks: Vec<usize>,
    pub horizon: f64,
}

impl EventSequence {
    pub fn empty(horizon: f64) -> Self {
        Self {
            times: Vec::new(),
            marks: Vec::new(),
            horizon,
        }
    }

    /// Unmarked sequence; every event gets mark 0.
    pub fn univariate(times: Vec<f64>, horizon: f64) -> Result<Self> {
        let marks = vec![0; times.len()];
        Self::new(times, marks, horizon)
    }

    pub fn new(times: Vec<f64>, marks: Vec<usize>, horizon: f64) -> Result<Self> {
        if times.len() != marks.len() {
            return Err(invalid("times and marks differ in length"));
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(invalid("horizon must be finite and non-negative"));
        }
        check_sorted(&times)?;
        if let Some(&first) = times.first() {
            if first < 0.0 || *times.last().unwrap() > horizon {
                return Err(invalid("event times must lie in [0, horizon]"));
            }
        }
        Ok(Self {
            times,
            marks,
            horizon,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Errors with the first index whose time does not exceed its predecessor.
pub fn check_sorted(times: &[f64]) -> Result<()> {
    for (k, w) in times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::UnsortedHistory(k + 1));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("event history"));
    }
    Ok(())
}
