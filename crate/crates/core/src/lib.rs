//! Marked temporal point-process modelling with a twin-stream recurrent
//! network: one LSTM over regularly spaced time-series features, one over the
//! irregular event sequence, fused into a joint next-event type and gap
//! predictor. Also ships classical intensity simulators, a multivariate
//! Hawkes and a logistic baseline, the feature pipeline and the evaluation
//! metrics.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numcore;
pub mod ppsim;
pub mod trainer;

pub use error::{Error, Result};

pub type Vector = numcore::Vector<f64>;
pub type Matrix = numcore::Matrix<f64>;
pub type ParamStore = numcore::ParamStore<f64>;
pub type TwinRnn = model::TwinRnn<f64>;
