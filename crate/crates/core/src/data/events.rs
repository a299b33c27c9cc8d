use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::Taxonomy;
use crate::error::{Error, Result};

/// One line of the JSONL event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLogRecord {
    pub entity_id: String,
    /// Days since the epoch.
    pub timestamp: f64,
    pub main_type: String,
    pub sub_type: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub main: usize,
    pub sub: usize,
}

/// Parsed log: per-entity events sorted by time, entities in id order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub entities: BTreeMap<String, Vec<Event>>,
    pub duplicates_dropped: usize,
}

impl EventLog {
    pub fn num_events(&self) -> usize {
        self.entities.values().map(Vec::len).sum()
    }

    pub fn entity_ids(&self) -> Vec<String> {
        self.entities.keys().cloned().collect()
    }

    /// Keeps only the listed entities.
    pub fn restrict(&self, ids: &[String]) -> EventLog {
        let keep: HashSet<&String> = ids.iter().collect();
        EventLog {
            entities: self
                .entities
                .iter()
                .filter(|(k, _)| keep.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            duplicates_dropped: 0,
        }
    }

    pub fn to_records(&self, taxonomy: &Taxonomy) -> Vec<EventLogRecord> {
        let mains = taxonomy.main_names();
        let subs = taxonomy.sub_names();
        self.entities
            .iter()
            .flat_map(|(id, evs)| {
                evs.iter().map(|e| EventLogRecord {
                    entity_id: id.clone(),
                    timestamp: e.time,
                    main_type: mains[e.main].clone(),
                    sub_type: subs[e.sub].clone(),
                })
            })
            .collect()
    }

    pub fn max_time(&self) -> f64 {
        self.entities
            .values()
            .flat_map(|v| v.iter().map(|e| e.time))
            .fold(0.0, f64::max)
    }
}

/// Reads a JSONL event log. Events are sorted per entity (stable for equal
/// timestamps) and exact `(entity, timestamp, sub_type)` repeats are dropped
/// and counted.
pub fn parse_event_log(reader: impl BufRead, taxonomy: &Taxonomy) -> Result<EventLog> {
    let sub_ids: HashMap<String, usize> = taxonomy
        .sub_names()
        .into_iter()
        .enumerate()
        .map(|(k, s)| (s, k))
        .collect();
    let parents = taxonomy.parents();
    let main_names = taxonomy.main_names();
    let mut entities: BTreeMap<String, Vec<Event>> = BTreeMap::new();
    let mut seen: HashSet<(String, u64, usize)> = HashSet::new();
    let mut duplicates = 0;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EventLogRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        if !rec.timestamp.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("non-finite timestamp {}", rec.timestamp),
            });
        }
        let sub = *sub_ids
            .get(&rec.sub_type)
            .ok_or_else(|| Error::UnknownType(rec.sub_type.clone()))?;
        let main = parents[sub];
        if main_names[main] != rec.main_type {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "subtype `{}` belongs to `{}`, not `{}`",
                    rec.sub_type, main_names[main], rec.main_type
                ),
            });
        }
        // -0.0 and 0.0 are the same instant
        let key = (rec.entity_id.clone(), (rec.timestamp + 0.0).to_bits(), sub);
        if !seen.insert(key) {
            duplicates += 1;
            continue;
        }
        entities.entry(rec.entity_id).or_default().push(Event {
            time: rec.timestamp,
            main,
            sub,
        });
    }
    for evs in entities.values_mut() {
        evs.sort_by(|a, b| a.time.total_cmp(&b.time));
    }
    if duplicates > 0 {
        log::warn!("dropped {duplicates} duplicate event lines");
    }
    Ok(EventLog {
        entities,
        duplicates_dropped: duplicates,
    })
}

pub fn write_event_log(mut out: impl Write, records: &[EventLogRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
