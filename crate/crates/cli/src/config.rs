use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use twinpp::data::WindowConfig;
use twinpp::model::{HeadMode, ModelConfig, Peephole, Streams};
use twinpp::trainer::{Objective, TrainConfig};

/// Which input streams a network variant keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    TimeSeriesRnn,
    EventRnn,
    IntensityRnn,
}

impl Variant {
    pub fn streams(self) -> Streams {
        match self {
            Variant::TimeSeriesRnn => Streams::TimeSeries,
            Variant::EventRnn => Streams::Event,
            Variant::IntensityRnn => Streams::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    #[default]
    None,
    Hawkes,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Share of entities held out for testing.
    pub test_fraction: f64,
    /// Share of the remaining entities used for validation.
    pub val_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.3,
            val_fraction: 0.2,
        }
    }
}

/// Network sizes; class counts and input widths come from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub peephole: Peephole,
    pub event_feature_dim: Option<usize>,
    pub sigma2: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let m = ModelConfig::new(2, 2, 1);
        Self {
            hidden_dim: m.hidden_dim,
            embed_dim: m.embed_dim,
            peephole: m.peephole,
            event_feature_dim: m.event_feature_dim,
            sigma2: m.sigma2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HawkesConfig {
    pub l1_weight: f64,
    pub max_iters: usize,
    /// Fixed kernel decay; `None` picks one from the grid on validation data.
    pub beta: Option<f64>,
    pub rollouts: usize,
    pub max_gap_days: f64,
}

impl Default for HawkesConfig {
    fn default() -> Self {
        Self {
            l1_weight: 0.01,
            max_iters: 1000,
            beta: None,
            rollouts: 100,
            max_gap_days: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub l2_weight: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { l2_weight: 1e-3 }
    }
}

/// One document describing a run. Command-line flags override its fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub window: WindowConfig,
    pub split: SplitConfig,
    pub network: NetworkConfig,
    pub train: TrainConfig,
    /// Network variant; mutually exclusive with a baseline.
    pub variant: Option<Variant>,
    pub head_mode: HeadMode,
    pub objective: Objective,
    pub baseline: Baseline,
    pub hawkes: HawkesConfig,
    pub logistic: LogisticConfig,
    pub f1_plus_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            window: WindowConfig::default(),
            split: SplitConfig::default(),
            network: NetworkConfig::default(),
            train: TrainConfig::default(),
            variant: None,
            head_mode: HeadMode::Hierarchical,
            objective: Objective::Joint,
            baseline: Baseline::None,
            hawkes: HawkesConfig::default(),
            logistic: LogisticConfig::default(),
            f1_plus_threshold: twinpp::metrics::F1_PLUS_THRESHOLD,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Loads `path` if given, else the defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// The network variant this run trains, if any.
    pub fn effective_variant(&self) -> Option<Variant> {
        match self.baseline {
            Baseline::None => Some(self.variant.unwrap_or(Variant::IntensityRnn)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant.is_some() && self.baseline != Baseline::None {
            bail!("a run trains either a network variant or a baseline, not both");
        }
        self.window.validate()?;
        self.train.validate()?;
        let s = &self.split;
        for (name, f) in [
            ("test_fraction", s.test_fraction),
            ("val_fraction", s.val_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                bail!("split.{name} must lie in (0, 1), got {f}");
            }
        }
        if !(self.f1_plus_threshold > 0.0) {
            bail!("f1_plus_threshold must be positive");
        }
        let h = &self.hawkes;
        if h.rollouts == 0 || !(h.max_gap_days > 0.0) || !(h.l1_weight >= 0.0) {
            bail!("hawkes: rollouts and max_gap_days must be positive, l1_weight >= 0");
        }
        if matches!(h.beta, Some(b) if !(b > 0.0 && b.is_finite())) {
            bail!("hawkes.beta must be positive");
        }
        if !(self.logistic.l2_weight >= 0.0) {
            bail!("logistic.l2_weight must be >= 0");
        }
        Ok(())
    }

    /// Full network configuration for data with the given shape.
    pub fn model_config(
        &self,
        k_main: usize,
        k_sub: usize,
        ts_feature_dim: usize,
    ) -> Result<ModelConfig> {
        let variant = self
            .effective_variant()
            .context("baseline runs have no network configuration")?;
        let n = &self.network;
        let cfg = ModelConfig {
            hidden_dim: n.hidden_dim,
            embed_dim: n.embed_dim,
            head_mode: self.head_mode,
            streams: variant.streams(),
            peephole: n.peephole,
            k_main,
            k_sub,
            ts_feature_dim,
            event_feature_dim: n.event_feature_dim,
            sigma2: n.sigma2,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_documents_fill_in_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"seed": 4, "train": {"max_epochs": 3}}"#).unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.train.max_epochs, 3);
        assert_eq!(c.train.batch_size, TrainConfig::default().batch_size);
        assert_eq!(c.effective_variant(), Some(Variant::IntensityRnn));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 4}"#).is_err());
    }

    #[test]
    fn variant_and_baseline_conflict() {
        let c = RunConfig {
            variant: Some(Variant::EventRnn),
            baseline: Baseline::Logistic,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            baseline: Baseline::Logistic,
            ..RunConfig::default()
        };
        c.validate().unwrap();
        assert_eq!(c.effective_variant(), None);
    }

    #[test]
    fn round_trip() {
        let c = RunConfig {
            variant: Some(Variant::TimeSeriesRnn),
            head_mode: HeadMode::Flat,
            objective: Objective::SubOnly,
            ..RunConfig::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let m = back.model_config(2, 7, 10).unwrap();
        assert_eq!(m.streams, Streams::TimeSeries);
        assert_eq!(m.head_mode, HeadMode::Flat);
    }
}
