//! Event-log ingestion, causal window features and entity splits.

mod events;
mod profiles;
mod samples;
mod split;
mod taxonomy;

pub use events::{parse_event_log, write_event_log, Event, EventLog, EventLogRecord};
pub use profiles::{parse_profiles, write_profiles, ProfileRecord, ProfileTable};
pub use samples::{
    build_samples, read_sample_file, window_features, write_sample_file, LabeledSample,
    Normalization, SampleFileHeader, WindowConfig, SAMPLE_FORMAT_VERSION,
};
pub use split::split_by_entity;
pub use taxonomy::{MainType, Taxonomy};
