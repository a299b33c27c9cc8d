use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HeadMode {
    /// Subtype head reads only the fused embedding.
    Flat,
    /// Subtype head reads the embedding and the main-type distribution.
    #[default]
    Hierarchical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Peephole {
    /// One weight per cell unit.
    #[default]
    Diagonal,
    /// Full `hidden × hidden` matrices.
    Dense,
}

/// Which recurrent streams feed the fusion layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Streams {
    /// Time-series stream only.
    TimeSeries,
    /// Event stream only.
    Event,
    /// Both streams fused.
    #[default]
    Both,
}

impl Streams {
    pub fn uses_time_series(self) -> bool {
        matches!(self, Streams::TimeSeries | Streams::Both)
    }

    pub fn uses_events(self) -> bool {
        matches!(self, Streams::Event | Streams::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub head_mode: HeadMode,
    pub streams: Streams,
    pub peephole: Peephole,
    pub k_main: usize,
    pub k_sub: usize,
    pub ts_feature_dim: usize,
    /// Width of the event-stream input. `None` feeds the raw encoding
    /// (one-hot subtype with a null slot, plus the gap); a smaller value adds
    /// a learned linear projection.
    pub event_feature_dim: Option<usize>,
    /// Variance of the Gaussian time penalty, in days².
    pub sigma2: f64,
}

impl ModelConfig {
    pub fn new(k_main: usize, k_sub: usize, ts_feature_dim: usize) -> Self {
        Self {
            hidden_dim: 32,
            embed_dim: 16,
            head_mode: HeadMode::Hierarchical,
            streams: Streams::Both,
            peephole: Peephole::Diagonal,
            k_main,
            k_sub,
            ts_feature_dim,
            event_feature_dim: None,
            sigma2: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        if self.k_main < 2 {
            return Err(invalid(format!(
                "need at least 2 main types, got {}",
                self.k_main
            )));
        }
        if self.k_sub < self.k_main {
            return Err(invalid(format!(
                "k_sub ({}) must be at least k_main ({})",
                self.k_sub, self.k_main
            )));
        }
        if self.hidden_dim == 0 || self.embed_dim == 0 {
            return Err(invalid("hidden_dim and embed_dim must be positive"));
        }
        if self.streams.uses_time_series() && self.ts_feature_dim == 0 {
            return Err(invalid("ts_feature_dim must be positive"));
        }
        if let Some(d) = self.event_feature_dim {
            if d == 0 || d > self.raw_event_dim() {
                return Err(invalid(format!(
                    "event_feature_dim must be in 1..={}, got {d}",
                    self.raw_event_dim()
                )));
            }
        }
        Ok(())
    }

    /// One-hot over subtypes plus the null slot, plus the gap scalar.
    pub fn raw_event_dim(&self) -> usize {
        self.k_sub + 2
    }

    pub fn event_input_dim(&self) -> usize {
        self.event_feature_dim
            .unwrap_or_else(|| self.raw_event_dim())
    }

    pub(crate) fn uses_projection(&self) -> bool {
        matches!(self.event_feature_dim, Some(d) if d != self.raw_event_dim())
    }

    pub(crate) fn fused_dim(&self) -> usize {
        let n =
            usize::from(self.streams.uses_time_series()) + usize::from(self.streams.uses_events());
        n * self.hidden_dim
    }

    pub(crate) fn sub_head_input_dim(&self) -> usize {
        match self.head_mode {
            HeadMode::Flat => self.embed_dim,
            HeadMode::Hierarchical => self.embed_dim + self.k_main,
        }
    }
}

/// One step of the event window. `sub_type == None` marks padding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventStep {
    pub sub_type: Option<usize>,
    /// Days since the previous event (0 for padding).
    pub dt: f64,
}

impl EventStep {
    pub const PAD: EventStep = EventStep {
        sub_type: None,
        dt: 0.0,
    };
}

/// One supervised instance for the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Per sub-window feature vectors, oldest first.
    pub ts_window: Vec<Vec<f64>>,
    /// Most recent events, oldest first.
    pub event_window: Vec<EventStep>,
    pub target_main: usize,
    pub target_sub: usize,
    /// Days until the next event.
    pub target_gap: f64,
}
