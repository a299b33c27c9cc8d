//! Elementwise activations and the softmax family.

use super::{Real, Vector};
use crate::error::{Error, Result};

/// Logistic sigmoid of a finite scalar.
pub fn sigmoid<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::NonFinite("sigmoid"));
    }
    Ok(sigmoid_raw(x))
}

/// Elementwise sigmoid.
pub fn sigmoid_vec<T: Real>(v: &Vector<T>) -> Result<Vector<T>> {
    v.as_slice()
        .iter()
        .map(|&x| sigmoid(x))
        .collect::<Result<Vec<_>>>()
        .map(Vector::from_vec_unchecked)
}

// Branching on the sign keeps exp() from overflowing for large |x|.
#[inline]
pub(crate) fn sigmoid_raw<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax<T: Real>(v: &Vector<T>) -> Result<Vector<T>> {
    if v.is_empty() {
        return Err(Error::Empty("softmax"));
    }
    if v.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("softmax"));
    }
    let mut out = v.as_slice().to_vec();
    softmax_in_place(&mut out);
    Ok(Vector::from_vec_unchecked(out))
}

/// Log-softmax; finite for every finite input, so a log of a probability
/// never sees an exact zero.
pub fn log_softmax<T: Real>(v: &Vector<T>) -> Result<Vector<T>> {
    if v.is_empty() {
        return Err(Error::Empty("log_softmax"));
    }
    if v.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("log_softmax"));
    }
    let mut out = v.as_slice().to_vec();
    log_softmax_in_place(&mut out);
    Ok(Vector::from_vec_unchecked(out))
}

pub(crate) fn softmax_in_place<T: Real>(z: &mut [T]) {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for x in z.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in z.iter_mut() {
        *x /= sum;
    }
}

pub(crate) fn log_softmax_in_place<T: Real>(z: &mut [T]) {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = z.iter().map(|&x| (x - max).exp()).sum::<T>().ln() + max;
    for x in z.iter_mut() {
        *x -= lse;
    }
}
