//! The twin-RNN conditional-intensity network and its objective.

mod config;
mod loss;
mod lstm;
mod network;

pub use config::{EventStep, HeadMode, ModelConfig, Peephole, Sample, Streams};
pub use loss::{time_penalty, ClassWeights, LossTerms};
pub use lstm::{lstm_step, LstmLayout};
pub use network::{Output, PredictedEvent, Trace, TwinRnn, INIT_SCALE};
