//! Central finite-difference verification of analytic gradients.

use super::{ParamStore, Real};
use crate::error::{invalid, Error, Result};

pub const MIN_EPS: f64 = 1e-6;
pub const MAX_EPS: f64 = 1e-3;

/// Compares the gradients already accumulated in `params` against central
/// differences of `loss_fn`, returning the largest
/// `|analytic - numeric| / max(1, |analytic|, |numeric|)` over all coordinates.
///
/// The store's values are perturbed in place and restored bit-exactly.
pub fn gradient_check<T, F>(mut loss_fn: F, params: &mut ParamStore<T>, eps: f64) -> Result<f64>
where
    T: Real,
    F: FnMut(&ParamStore<T>) -> T,
{
    if !(MIN_EPS..=MAX_EPS).contains(&eps) {
        return Err(invalid(format!("eps {eps} outside [{MIN_EPS}, {MAX_EPS}]")));
    }
    let first = loss_fn(params).as_f64();
    let second = loss_fn(params).as_f64();
    if first.to_bits() != second.to_bits() {
        return Err(Error::NonDeterministic { first, second });
    }
    if !first.is_finite() {
        return Err(Error::NonFinite("gradient_check loss"));
    }
    let ids: Vec<_> = params.ids().collect();
    let mut worst = 0.0f64;
    for id in ids {
        for k in 0..params.value(id).len() {
            let orig = params.value(id).as_slice()[k];
            params.value_mut(id).as_mut_slice()[k] = orig + T::of(eps);
            let plus = loss_fn(params).as_f64();
            params.value_mut(id).as_mut_slice()[k] = orig - T::of(eps);
            let minus = loss_fn(params).as_f64();
            params.value_mut(id).as_mut_slice()[k] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = params.grad(id).as_slice()[k].as_f64();
            let rel = (analytic - numeric).abs() / 1f64.max(analytic.abs()).max(numeric.abs());
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
