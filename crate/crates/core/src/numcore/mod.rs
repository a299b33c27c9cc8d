//! Minimal dense numeric layer: vectors, matrices, activations, named
//! parameters and finite-difference gradient verification.

mod activation;
mod gradcheck;
mod params;
mod scalar;
mod tensor;

pub use activation::{log_softmax, sigmoid, sigmoid_vec, softmax};
pub(crate) use activation::{log_softmax_in_place, sigmoid_raw, softmax_in_place};
pub use gradcheck::{gradient_check, MAX_EPS, MIN_EPS};
pub use params::{Grads, ParamDocument, ParamId, ParamRecord, ParamStore, PARAM_FORMAT_VERSION};
pub use scalar::Real;
pub(crate) use tensor::argmax;
pub use tensor::{Matrix, Vector};
