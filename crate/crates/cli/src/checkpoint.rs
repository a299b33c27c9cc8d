use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use twinpp::baselines::LogisticModels;
use twinpp::data::{Normalization, SampleFileHeader, Taxonomy, WindowConfig};
use twinpp::model::{ModelConfig, TwinRnn};
use twinpp::numcore::{ParamDocument, ParamStore};
use twinpp::ppsim::MultiHawkes;
use twinpp::trainer::{EpochRecord, Objective};

use crate::config::RunConfig;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Predictor {
    Rnn {
        model: ModelConfig,
        objective: Objective,
        best_epoch: usize,
        curve: Vec<EpochRecord>,
        params: ParamDocument,
    },
    Logistic {
        models: LogisticModels,
    },
    Hawkes {
        params: MultiHawkes,
        /// Observation window end used for fitting.
        horizon: f64,
    },
}

/// Everything needed to turn raw logs into predictions again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub window: WindowConfig,
    pub taxonomy: Taxonomy,
    pub normalization: Normalization,
    pub config: RunConfig,
    #[serde(flatten)]
    pub predictor: Predictor,
}

impl Checkpoint {
    pub fn new(header: &SampleFileHeader, config: RunConfig, predictor: Predictor) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            window: header.window,
            taxonomy: header.taxonomy.clone(),
            normalization: header.normalization.clone(),
            config,
            predictor,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let probe: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let version = probe.get("format_version").and_then(|v| v.as_u64());
        if version != Some(u64::from(CHECKPOINT_FORMAT_VERSION)) {
            bail!(
                "{}: unsupported checkpoint format {:?} (this build reads {CHECKPOINT_FORMAT_VERSION})",
                path.display(),
                version
            );
        }
        serde_json::from_value(probe).with_context(|| format!("decoding {}", path.display()))
    }

    pub fn kind(&self) -> &'static str {
        match self.predictor {
            Predictor::Rnn { .. } => "rnn",
            Predictor::Logistic { .. } => "logistic",
            Predictor::Hawkes { .. } => "hawkes",
        }
    }

    /// Fails unless a sample file was prepared with the same windows,
    /// taxonomy and normalization.
    pub fn check_compatible(&self, header: &SampleFileHeader) -> Result<()> {
        if header.window != self.window
            || header.taxonomy != self.taxonomy
            || header.normalization != self.normalization
        {
            bail!("sample file was prepared with different windows, taxonomy or normalization than the checkpoint");
        }
        Ok(())
    }

    pub fn network(&self) -> Result<Option<TwinRnn>> {
        match &self.predictor {
            Predictor::Rnn { model, params, .. } => {
                let store = ParamStore::from_document(params)?;
                Ok(Some(TwinRnn::from_params(model.clone(), store)?))
            }
            _ => Ok(None),
        }
    }
}
