use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Static per-entity numeric features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub entity_id: String,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileTable {
    pub names: Vec<String>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

impl ProfileTable {
    pub fn get(&self, entity: &str) -> Result<&[f64]> {
        self.rows
            .get(entity)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingProfile(entity.to_string()))
    }

    pub fn records(&self) -> Vec<ProfileRecord> {
        self.rows
            .iter()
            .map(|(k, v)| ProfileRecord {
                entity_id: k.clone(),
                features: v.clone(),
            })
            .collect()
    }
}

/// CSV with a header row; `entity_id` is the first column, the rest numeric.
pub fn parse_profiles(reader: impl Read) -> Result<ProfileTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("entity_id") {
        return Err(invalid("profile CSV must start with an `entity_id` column"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut rows = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec?;
        let id = rec.get(0).unwrap_or_default().to_string();
        let values = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("not a finite number: `{v}`"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != names.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} features, got {}", names.len(), values.len()),
            });
        }
        if rows.insert(id.clone(), values).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("second profile for entity `{id}`"),
            });
        }
    }
    Ok(ProfileTable { names, rows })
}

pub fn write_profiles(out: impl Write, names: &[String], records: &[ProfileRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["entity_id".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.entity_id.clone()];
        row.extend(r.features.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
