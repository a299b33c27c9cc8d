use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassWeights, Sample};

/// Which classification terms of the objective are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    Joint,
    /// Subtype weights are zeroed.
    MainOnly,
    /// Main-type weights are zeroed.
    SubOnly,
}

/// Inverse-frequency weights `N / n_k`, rescaled to mean 1.
pub fn inverse_frequency(counts: &[usize], names: &[String]) -> Result<Vec<f64>> {
    if let Some(k) = counts.iter().position(|&n| n == 0) {
        let name = names.get(k).cloned().unwrap_or_else(|| format!("#{k}"));
        return Err(Error::MissingClass(name));
    }
    let total: usize = counts.iter().sum();
    let raw: Vec<f64> = counts.iter().map(|&n| total as f64 / n as f64).collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    Ok(raw.into_iter().map(|w| w / mean).collect())
}

/// Class weights from the label frequencies of a training set.
pub fn compute_class_weights(
    samples: &[Sample],
    main_names: &[String],
    sub_names: &[String],
    objective: Objective,
) -> Result<ClassWeights> {
    let mut main_counts = vec![0usize; main_names.len()];
    let mut sub_counts = vec![0usize; sub_names.len()];
    for s in samples {
        main_counts[s.target_main] += 1;
        sub_counts[s.target_sub] += 1;
    }
    let main = match objective {
        Objective::SubOnly => vec![0.0; main_names.len()],
        _ => inverse_frequency(&main_counts, main_names)?,
    };
    let sub = match objective {
        Objective::MainOnly => vec![0.0; sub_names.len()],
        _ => inverse_frequency(&sub_counts, sub_names)?,
    };
    Ok(ClassWeights { main, sub })
}
