use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate_from, EventSequence, MultiHawkes};
use crate::data::{EventLogRecord, ProfileRecord, Taxonomy};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// One dimension per subtype, in taxonomy order.
    MultiHawkes(MultiHawkes),
    /// Homogeneous Poisson with `rate` events/day in total and uniform marks.
    Poisson { rate: f64 },
}

impl Generator {
    fn as_hawkes(&self, dims: usize) -> Result<MultiHawkes> {
        match self {
            Generator::MultiHawkes(m) => Ok(m.clone()),
            Generator::Poisson { rate } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return Err(invalid("Poisson rate must be finite and >= 0"));
                }
                Ok(MultiHawkes {
                    mu: vec![rate / dims as f64; dims],
                    a: vec![vec![0.0; dims]; dims],
                    beta: 1.0,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub taxonomy: Taxonomy,
    pub generator: Generator,
    pub entities: usize,
    pub horizon: f64,
    /// Scale each entity's base rates by `0.5 + 0.1·age`.
    #[serde(default)]
    pub age_scaled_rates: bool,
    #[serde(default = "yes")]
    pub hierarchical: bool,
    /// Moves this share of each entity's total base rate onto a "home"
    /// subtype, `(5·model + location) mod D`, read off its profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home_share: Option<f64>,
}

fn yes() -> bool {
    true
}

impl SyntheticSpec {
    /// Ticket/error taxonomy driven by a 7-dimensional Hawkes process. Each
    /// entity's background events all carry its home subtype; the first two
    /// error kinds each raise 1.5 tickets on average within about an hour.
    pub fn ticket_error_hawkes(entities: usize, horizon: f64) -> Self {
        let d = 7;
        let beta = 20.0;
        let mut a = vec![vec![0.0; d]; d];
        a[0][1] = 1.5 * beta;
        a[0][2] = 1.5 * beta;
        Self {
            taxonomy: Taxonomy::ticket_error(),
            generator: Generator::MultiHawkes(MultiHawkes {
                mu: vec![0.1; d],
                a,
                beta,
            }),
            entities,
            horizon,
            age_scaled_rates: true,
            hierarchical: true,
            home_share: Some(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.taxonomy.validate()?;
        let d = self.taxonomy.k_sub();
        if self.hierarchical && (d < 2 || self.taxonomy.k_main() < 2) {
            return Err(invalid(
                "hierarchical evaluation needs >= 2 subtypes in >= 2 main types",
            ));
        }
        let m = self.generator.as_hawkes(d)?;
        if m.dims() != d {
            return Err(invalid(format!(
                "generator has {} dimensions, taxonomy has {d} subtypes",
                m.dims()
            )));
        }
        m.validate()?;
        m.warn_if_explosive();
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(invalid("horizon must be finite and >= 0"));
        }
        if let Some(s) = self.home_share {
            if !(0.0..=1.0).contains(&s) {
                return Err(invalid("home_share must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

pub const PROFILE_FIELDS: [&str; 3] = ["model", "age", "location"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTruth {
    pub entity_id: String,
    pub rate_multiplier: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home_mark: Option<usize>,
}

/// Ground truth written next to the generated logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub spec: SyntheticSpec,
    pub entities: Vec<EntityTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub events: Vec<EventLogRecord>,
    pub profile_names: Vec<String>,
    pub profiles: Vec<ProfileRecord>,
    pub manifest: Manifest,
}

pub fn entity_id(k: usize) -> String {
    format!("E{k:05}")
}

/// Simulates every entity on its own RNG stream (`seed`, stream = index),
/// so the output does not depend on thread count.
pub fn make_synthetic_dataset(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticDataset> {
    spec.validate()?;
    let d = spec.taxonomy.k_sub();
    let base = spec.generator.as_hawkes(d)?;
    let parents = spec.taxonomy.parents();
    let mains = spec.taxonomy.main_names();
    let subs = spec.taxonomy.sub_names();
    let per_entity: Vec<Result<(Vec<EventLogRecord>, ProfileRecord, EntityTruth)>> = (0..spec
        .entities)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let model = f64::from(rng.gen_range(0u32..4));
            let age = (rng.gen_range(0.0..10.0f64) * 10.0).round() / 10.0;
            let location = f64::from(rng.gen_range(0u32..5));
            let mult = if spec.age_scaled_rates {
                0.5 + 0.1 * age
            } else {
                1.0
            };
            let mut proc = base.clone();
            proc.mu.iter_mut().for_each(|m| *m *= mult);
            let home = spec.home_share.map(|share| {
                let h = (5 * model as usize + location as usize) % d;
                let total: f64 = proc.mu.iter().sum();
                proc.mu.iter_mut().for_each(|m| *m *= 1.0 - share);
                proc.mu[h] += share * total;
                h
            });
            let seq = simulate_from(
                &proc,
                &EventSequence::empty(0.0),
                0.0,
                spec.horizon,
                None,
                &mut rng,
            )?;
            let id = entity_id(k);
            let events = seq
                .times
                .iter()
                .zip(&seq.marks)
                .map(|(&t, &m)| EventLogRecord {
                    entity_id: id.clone(),
                    timestamp: t,
                    main_type: mains[parents[m]].clone(),
                    sub_type: subs[m].clone(),
                })
                .collect();
            Ok((
                events,
                ProfileRecord {
                    entity_id: id.clone(),
                    features: vec![model, age, location],
                },
                EntityTruth {
                    entity_id: id,
                    rate_multiplier: mult,
                    home_mark: home,
                },
            ))
        })
        .collect();
    let mut events = Vec::new();
    let mut profiles = Vec::new();
    let mut truth = Vec::new();
    for r in per_entity {
        let (e, p, t) = r?;
        events.extend(e);
        profiles.push(p);
        truth.push(t);
    }
    Ok(SyntheticDataset {
        events,
        profile_names: PROFILE_FIELDS.iter().map(|s| s.to_string()).collect(),
        profiles,
        manifest: Manifest {
            seed,
            spec: spec.clone(),
            entities: truth,
        },
    })
}
