//! Classification and timing metrics, including the time-filtered F1+ and
//! type-filtered MAE+.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default F1+ cut-off in days.
pub const F1_PLUS_THRESHOLD: f64 = 3.0;

/// Row = truth, column = prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["truth\\pred".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.names.iter().zip(&self.counts) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_len(a: usize, b: usize, op: &'static str) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Shape {
            op,
            expected: a.to_string(),
            got: b.to_string(),
        })
    }
}

/// Counts `(truth, pred)` pairs. `names` may be empty, in which case classes
/// are named by id.
pub fn confusion(
    preds: &[usize],
    truth: &[usize],
    k: usize,
    names: &[String],
) -> Result<ConfusionMatrix> {
    check_len(truth.len(), preds.len(), "confusion")?;
    if !names.is_empty() && names.len() != k {
        return Err(invalid(format!(
            "{} class names for {k} classes",
            names.len()
        )));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&p, &t) in preds.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(invalid(format!(
                "class id out of range: truth {t}, pred {p}, K = {k}"
            )));
        }
        counts[t][p] += 1;
    }
    let names = if names.is_empty() {
        (0..k).map(|i| i.to_string()).collect()
    } else {
        names.to_vec()
    };
    Ok(ConfusionMatrix { names, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub per_class: Vec<ClassScores>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class and macro precision/recall/F1; 0/0 counts as 0.
pub fn macro_prf(m: &ConfusionMatrix) -> Prf {
    let k = m.k();
    let per_class: Vec<ClassScores> = (0..k)
        .map(|c| {
            let tp = m.counts[c][c];
            let row: u64 = m.counts[c].iter().sum();
            let col: u64 = m.counts.iter().map(|r| r[c]).sum();
            let precision = ratio(tp, col);
            let recall = ratio(tp, row);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassScores {
                name: m.names[c].clone(),
                precision,
                recall,
                f1,
                support: row,
            }
        })
        .collect();
    let mean = |f: fn(&ClassScores) -> f64| {
        if k == 0 {
            0.0
        } else {
            per_class.iter().map(f).sum::<f64>() / k as f64
        }
    };
    Prf {
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        per_class,
    }
}

/// Mean absolute error in days.
pub fn mae(pred_gaps: &[f64], true_gaps: &[f64]) -> Result<f64> {
    check_len(true_gaps.len(), pred_gaps.len(), "mae")?;
    if pred_gaps.is_empty() {
        return Err(Error::Empty("mae"));
    }
    Ok(pred_gaps
        .iter()
        .zip(true_gaps)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred_gaps.len() as f64)
}

/// A metric computed on a filtered subset; `value` is `None` when the subset
/// is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetMetric {
    pub value: Option<f64>,
    pub count: usize,
}

/// Macro F1 over samples whose gap error is strictly below `threshold`.
pub fn f1_plus(
    preds: &[usize],
    truth: &[usize],
    pred_gaps: &[f64],
    true_gaps: &[f64],
    k: usize,
    threshold: f64,
) -> Result<SubsetMetric> {
    check_len(truth.len(), preds.len(), "f1_plus")?;
    check_len(truth.len(), pred_gaps.len(), "f1_plus")?;
    check_len(truth.len(), true_gaps.len(), "f1_plus")?;
    let keep: Vec<usize> = (0..truth.len())
        .filter(|&i| (pred_gaps[i] - true_gaps[i]).abs() < threshold)
        .collect();
    if keep.is_empty() {
        return Ok(SubsetMetric {
            value: None,
            count: 0,
        });
    }
    let p: Vec<usize> = keep.iter().map(|&i| preds[i]).collect();
    let t: Vec<usize> = keep.iter().map(|&i| truth[i]).collect();
    Ok(SubsetMetric {
        value: Some(macro_prf(&confusion(&p, &t, k, &[])?).macro_f1),
        count: keep.len(),
    })
}

/// MAE over samples whose type was predicted correctly.
pub fn mae_plus(
    preds: &[usize],
    truth: &[usize],
    pred_gaps: &[f64],
    true_gaps: &[f64],
) -> Result<SubsetMetric> {
    check_len(truth.len(), preds.len(), "mae_plus")?;
    check_len(truth.len(), pred_gaps.len(), "mae_plus")?;
    check_len(truth.len(), true_gaps.len(), "mae_plus")?;
    let (p, t): (Vec<f64>, Vec<f64>) = (0..truth.len())
        .filter(|&i| preds[i] == truth[i])
        .map(|i| (pred_gaps[i], true_gaps[i]))
        .unzip();
    if p.is_empty() {
        return Ok(SubsetMetric {
            value: None,
            count: 0,
        });
    }
    Ok(SubsetMetric {
        value: Some(mae(&p, &t)?),
        count: p.len(),
    })
}

/// Everything reported for one taxonomy level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub level: String,
    pub n_samples: usize,
    pub prf: Prf,
    pub mae_days: Option<f64>,
    pub f1_plus: SubsetMetric,
    pub mae_plus: SubsetMetric,
    pub confusion: ConfusionMatrix,
}

/// Predictions and targets for one level, aligned by sample.
pub struct Scored<'a> {
    pub preds: &'a [usize],
    pub truth: &'a [usize],
    pub pred_gaps: &'a [f64],
    pub true_gaps: &'a [f64],
}

pub fn report(
    level: &str,
    names: &[String],
    s: &Scored<'_>,
    threshold: f64,
) -> Result<MetricsReport> {
    let k = names.len();
    let cm = confusion(s.preds, s.truth, k, names)?;
    Ok(MetricsReport {
        level: level.to_string(),
        n_samples: s.truth.len(),
        prf: macro_prf(&cm),
        mae_days: if s.truth.is_empty() {
            None
        } else {
            Some(mae(s.pred_gaps, s.true_gaps)?)
        },
        f1_plus: f1_plus(s.preds, s.truth, s.pred_gaps, s.true_gaps, k, threshold)?,
        mae_plus: mae_plus(s.preds, s.truth, s.pred_gaps, s.true_gaps)?,
        confusion: cm,
    })
}

impl MetricsReport {
    /// One row per class plus a `macro` row.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["level", "class", "precision", "recall", "f1", "support"])?;
        for c in &self.prf.per_class {
            w.write_record([
                self.level.clone(),
                c.name.clone(),
                c.precision.to_string(),
                c.recall.to_string(),
                c.f1.to_string(),
                c.support.to_string(),
            ])?;
        }
        w.write_record([
            self.level.clone(),
            "macro".into(),
            self.prf.macro_precision.to_string(),
            self.prf.macro_recall.to_string(),
            self.prf.macro_f1.to_string(),
            self.n_samples.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}
