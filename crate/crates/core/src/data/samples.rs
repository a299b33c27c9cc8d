use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Event, EventLog, ProfileTable, Taxonomy};
use crate::error::{invalid, Error, Result};
use crate::model::{EventStep, Sample};

pub const SAMPLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub sub_window_days: f64,
    pub n_sub_windows: usize,
    pub event_window_len: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            sub_window_days: 7.0,
            n_sub_windows: 5,
            event_window_len: 7,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sub_window_days.is_finite() && self.sub_window_days > 0.0) {
            return Err(invalid("sub_window_days must be positive"));
        }
        if self.n_sub_windows == 0 || self.event_window_len == 0 {
            return Err(invalid("window lengths must be at least 1"));
        }
        Ok(())
    }
}

/// Z-score statistics for the static profile columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn identity(names: Vec<String>) -> Self {
        let n = names.len();
        Self {
            names,
            mean: vec![0.0; n],
            std: vec![1.0; n],
        }
    }

    /// Population statistics over `entities`. Constant columns get std 1.
    pub fn fit(profiles: &ProfileTable, entities: &[String]) -> Result<Self> {
        let d = profiles.names.len();
        let rows = entities
            .iter()
            .map(|e| profiles.get(e))
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Ok(Self::identity(profiles.names.clone()));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in &rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x / n;
            }
        }
        let mut std = vec![0.0; d];
        for r in &rows {
            for ((s, x), m) in std.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (x - m).powi(2) / n;
            }
        }
        let std = std
            .into_iter()
            .map(|v| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 })
            .collect();
        Ok(Self {
            names: profiles.names.clone(),
            mean,
            std,
        })
    }

    pub fn apply(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.mean.len() {
            return Err(Error::Shape {
                op: "Normalization::apply",
                expected: self.mean.len().to_string(),
                got: raw.len().to_string(),
            });
        }
        Ok(raw
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }
}

/// A sample plus where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub entity_id: String,
    /// Time of the last observed event; features see nothing after it.
    pub anchor_time: f64,
    #[serde(flatten)]
    pub sample: Sample,
}

/// Features visible at `anchor` given an entity's sorted `history`.
///
/// Only events with `time <= anchor` are read. Sub-window `j` (oldest first)
/// covers `(anchor - (n-j)·w, anchor - (n-1-j)·w]`.
pub fn window_features(
    history: &[Event],
    anchor: f64,
    static_z: &[f64],
    wc: &WindowConfig,
    k_sub: usize,
) -> (Vec<Vec<f64>>, Vec<EventStep>) {
    let visible = history.partition_point(|e| e.time <= anchor);
    let hist = &history[..visible];
    let n = wc.n_sub_windows;
    let w = wc.sub_window_days;
    let mut ts = Vec::with_capacity(n);
    for j in 0..n {
        let lo = anchor - (n - j) as f64 * w;
        let hi = anchor - (n - 1 - j) as f64 * w;
        let start = hist.partition_point(|e| e.time <= lo);
        let end = hist.partition_point(|e| e.time <= hi);
        let mut v = static_z.to_vec();
        let base = v.len();
        v.resize(base + k_sub, 0.0);
        for e in &hist[start..end] {
            v[base + e.sub] += 1.0;
        }
        ts.push(v);
    }
    let l = wc.event_window_len;
    let first = visible.saturating_sub(l);
    let mut ev = vec![EventStep::PAD; l - (visible - first)];
    for i in first..visible {
        let dt = if i == 0 {
            0.0
        } else {
            hist[i].time - hist[i - 1].time
        };
        ev.push(EventStep {
            sub_type: Some(hist[i].sub),
            dt,
        });
    }
    (ts, ev)
}

/// One sample per event that has at least one event strictly before it.
/// The anchor is that last strictly-earlier event, so gaps are positive and
/// same-timestamp siblings of the target are never visible.
pub fn build_samples(
    log: &EventLog,
    profiles: &ProfileTable,
    wc: &WindowConfig,
    taxonomy: &Taxonomy,
    norm: &Normalization,
) -> Result<Vec<LabeledSample>> {
    wc.validate()?;
    let k_sub = taxonomy.k_sub();
    let per_entity: Vec<Result<Vec<LabeledSample>>> = log
        .entities
        .par_iter()
        .map(|(id, events)| {
            let z = norm.apply(profiles.get(id)?)?;
            let mut out = Vec::new();
            for (k, target) in events.iter().enumerate() {
                let visible = events[..k].partition_point(|e| e.time < target.time);
                if visible == 0 {
                    continue;
                }
                let anchor = events[visible - 1].time;
                let (ts_window, event_window) =
                    window_features(&events[..visible], anchor, &z, wc, k_sub);
                out.push(LabeledSample {
                    entity_id: id.clone(),
                    anchor_time: anchor,
                    sample: Sample {
                        ts_window,
                        event_window,
                        target_main: target.main,
                        target_sub: target.sub,
                        target_gap: target.time - anchor,
                    },
                });
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_entity {
        all.extend(r?);
    }
    Ok(all)
}

/// Header line of a sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFileHeader {
    pub format_version: u32,
    pub window: WindowConfig,
    pub taxonomy: Taxonomy,
    pub normalization: Normalization,
    pub num_samples: usize,
}

pub fn write_sample_file(
    mut out: impl Write,
    header: &SampleFileHeader,
    samples: &[LabeledSample],
) -> Result<()> {
    serde_json::to_writer(&mut out, header)?;
    out.write_all(b"\n")?;
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sample_file(reader: impl BufRead) -> Result<(SampleFileHeader, Vec<LabeledSample>)> {
    let mut lines = reader.lines();
    let first = lines.next().ok_or(Error::Empty("sample file"))??;
    let header: SampleFileHeader = serde_json::from_str(&first).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.format_version != SAMPLE_FORMAT_VERSION {
        return Err(Error::FormatVersion(header.format_version));
    }
    let mut samples = Vec::with_capacity(header.num_samples);
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        samples.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 2,
            msg: e.to_string(),
        })?);
    }
    if samples.len() != header.num_samples {
        return Err(invalid(format!(
            "header promises {} samples, file has {}",
            header.num_samples,
            samples.len()
        )));
    }
    Ok((header, samples))
}
