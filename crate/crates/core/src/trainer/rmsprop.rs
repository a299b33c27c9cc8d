use crate::error::{Error, Result};
use crate::numcore::{Matrix, ParamStore, Real};

use super::TrainConfig;

/// Running mean of squared gradients, one tensor per parameter.
#[derive(Debug, Clone)]
pub struct OptimizerState<T: Real = f64> {
    cache: Vec<Matrix<T>>,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(params: &ParamStore<T>) -> Self {
        Self {
            cache: params
                .ids()
                .map(|id| {
                    let (r, c) = params.value(id).shape();
                    Matrix::zeros(r, c)
                })
                .collect(),
        }
    }

    pub fn cache(&self) -> &[Matrix<T>] {
        &self.cache
    }
}

/// `cache ← ρ·cache + (1−ρ)·g²`, `θ ← θ − lr·g / (√cache + ε)`, then zeroes
/// the gradients.
pub fn rmsprop_step<T: Real>(
    params: &mut ParamStore<T>,
    state: &mut OptimizerState<T>,
    cfg: &TrainConfig,
) -> Result<()> {
    if !params.grads_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    if state.cache.len() != params.len() {
        return Err(Error::Shape {
            op: "rmsprop_step",
            expected: params.len().to_string(),
            got: state.cache.len().to_string(),
        });
    }
    let rho = T::of(cfg.rms_decay);
    let lr = T::of(cfg.learning_rate);
    let eps = T::of(cfg.rms_eps);
    for (k, id) in params.ids().collect::<Vec<_>>().into_iter().enumerate() {
        let grad = params.grad(id).as_slice().to_vec();
        let cache = state.cache[k].as_mut_slice();
        let value = params.value_mut(id).as_mut_slice();
        for ((v, c), &g) in value.iter_mut().zip(cache.iter_mut()).zip(&grad) {
            *c = rho * *c + (T::one() - rho) * g * g;
            *v -= lr * g / (c.sqrt() + eps);
        }
    }
    params.zero_grads();
    Ok(())
}
