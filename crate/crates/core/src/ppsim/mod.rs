//! Conditional-intensity families, Ogata thinning and synthetic event logs.

mod intensity;
mod multi;
mod rescale;
mod sequence;
mod synthetic;
mod thinning;

pub use intensity::{IntensityModel, PiecewiseLinear};
pub use multi::MultiHawkes;
pub use rescale::{
    ks_critical_1pct, ks_statistic_exp1, rescaled_intervals, rescaled_intervals_multi,
};
pub use sequence::{check_sorted, EventSequence};
pub use synthetic::{
    entity_id, make_synthetic_dataset, EntityTruth, Generator, Manifest, SyntheticDataset,
    SyntheticSpec, PROFILE_FIELDS,
};
pub use thinning::{sample_thinning, simulate_from, PointProcess};
