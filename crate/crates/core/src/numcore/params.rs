//! Named parameter tensors with paired gradient accumulators.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Matrix, Real};
use crate::error::{Error, Result};

/// Version tag written first in every parameter document.
pub const PARAM_FORMAT_VERSION: u32 = 1;

/// Handle into a [`ParamStore`]. Only valid for the store that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone)]
struct Entry<T> {
    name: String,
    value: Matrix<T>,
    grad: Matrix<T>,
}

#[derive(Debug, Clone, Default)]
pub struct ParamStore<T = f64> {
    entries: Vec<Entry<T>>,
    index: HashMap<String, ParamId>,
}

/// Gradient buffer laid out like a store; used for per-sample accumulation
/// before the serial reduction into the store.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T = f64> {
    tensors: Vec<Matrix<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Matrix<T>) -> Result<ParamId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateParam(name));
        }
        let id = ParamId(self.entries.len());
        let grad = Matrix::zeros(value.rows(), value.cols());
        self.index.insert(name.clone(), id);
        self.entries.push(Entry { name, value, grad });
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Result<ParamId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|e| e.value.len()).sum()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    #[inline]
    pub fn value(&self, id: ParamId) -> &Matrix<T> {
        &self.entries[id.0].value
    }

    #[inline]
    pub fn value_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.entries[id.0].value
    }

    #[inline]
    pub fn grad(&self, id: ParamId) -> &Matrix<T> {
        &self.entries[id.0].grad
    }

    #[inline]
    pub fn grad_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.entries[id.0].grad
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn zero_grads(&mut self) {
        for e in &mut self.entries {
            e.grad.fill(T::zero());
        }
    }

    /// Zero-filled buffer with this store's layout.
    pub fn zeros_like(&self) -> Grads<T> {
        Grads {
            tensors: self
                .entries
                .iter()
                .map(|e| Matrix::zeros(e.value.rows(), e.value.cols()))
                .collect(),
        }
    }

    /// `grad += scale · buffer` for every tensor.
    pub fn accumulate(&mut self, grads: &Grads<T>, scale: T) -> Result<()> {
        if grads.tensors.len() != self.entries.len() {
            return Err(Error::Shape {
                op: "ParamStore::accumulate",
                expected: self.entries.len().to_string(),
                got: grads.tensors.len().to_string(),
            });
        }
        for (e, g) in self.entries.iter_mut().zip(&grads.tensors) {
            e.grad.add_scaled(g, scale)?;
        }
        Ok(())
    }

    pub fn grad_norm(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.grad.squared_norm())
            .sum::<T>()
            .sqrt()
    }

    /// Rescales gradients so their global norm is at most `max_norm`.
    /// Returns the norm before clipping.
    pub fn clip_grad_norm(&mut self, max_norm: T) -> T {
        let norm = self.grad_norm();
        if norm > max_norm && norm > T::zero() {
            let s = max_norm / norm;
            for e in &mut self.entries {
                e.grad.scale(s);
            }
        }
        norm
    }

    pub fn grads_finite(&self) -> bool {
        self.entries.iter().all(|e| e.grad.is_finite())
    }

    pub fn to_document(&self) -> ParamDocument {
        ParamDocument {
            format_version: PARAM_FORMAT_VERSION,
            params: self
                .entries
                .iter()
                .map(|e| ParamRecord {
                    name: e.name.clone(),
                    shape: [e.value.rows(), e.value.cols()],
                    values: e.value.as_slice().iter().map(|v| v.as_f64()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &ParamDocument) -> Result<Self> {
        if doc.format_version != PARAM_FORMAT_VERSION {
            return Err(Error::FormatVersion(doc.format_version));
        }
        let mut store = Self::new();
        for rec in &doc.params {
            let values = rec.values.iter().map(|&v| T::of(v)).collect();
            store.add(
                rec.name.clone(),
                Matrix::from_vec(rec.shape[0], rec.shape[1], values)?,
            )?;
        }
        Ok(store)
    }
}

impl<T: Real> Grads<T> {
    #[inline]
    pub fn get(&self, id: ParamId) -> &Matrix<T> {
        &self.tensors[id.0]
    }

    #[inline]
    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.tensors[id.0]
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.add_scaled(b, T::one())?;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: T) {
        self.tensors.iter_mut().for_each(|m| m.scale(s));
    }

    pub fn tensors(&self) -> &[Matrix<T>] {
        &self.tensors
    }
}

/// Flat serialized form: version, then name / shape / row-major values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDocument {
    pub format_version: u32,
    pub params: Vec<ParamRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub name: String,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> ParamStore<f64> {
        let mut s = ParamStore::new();
        s.add(
            "w",
            Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
        )
        .unwrap();
        s.add("b", Matrix::from_vec(2, 1, vec![0.5, -0.5]).unwrap())
            .unwrap();
        s
    }

    #[test]
    fn names_are_unique() {
        let mut s = store();
        assert!(matches!(
            s.add("w", Matrix::zeros(1, 1)),
            Err(Error::DuplicateParam(_))
        ));
        assert!(matches!(s.id("nope"), Err(Error::UnknownParam(_))));
    }

    #[test]
    fn zero_grads_resets_exactly() {
        let mut s = store();
        let mut g = s.zeros_like();
        g.get_mut(s.id("w").unwrap()).fill(3.0);
        s.accumulate(&g, 1.0).unwrap();
        s.accumulate(&g, 1.0).unwrap();
        assert_eq!(s.grad(s.id("w").unwrap()).get(1, 1), 6.0);
        s.zero_grads();
        for id in s.ids() {
            assert!(s.grad(id).as_slice().iter().all(|&x| x == 0.0));
            assert_eq!(s.grad(id).shape(), s.value(id).shape());
        }
    }

    #[test]
    fn clipping_bounds_global_norm() {
        let mut s = store();
        let mut g = s.zeros_like();
        g.get_mut(ParamId(0)).fill(10.0);
        g.get_mut(ParamId(1)).fill(-10.0);
        s.accumulate(&g, 1.0).unwrap();
        let before = s.clip_grad_norm(5.0);
        assert!((before - (600.0f64).sqrt()).abs() < 1e-12);
        assert!(s.grad_norm() <= 5.0 + 1e-12);
    }

    #[test]
    fn document_round_trip_is_exact() {
        let s = store();
        let json = serde_json::to_string(&s.to_document()).unwrap();
        assert!(json.starts_with("{\"format_version\":1"));
        let doc: ParamDocument = serde_json::from_str(&json).unwrap();
        let back = ParamStore::<f64>::from_document(&doc).unwrap();
        for id in s.ids() {
            assert_eq!(s.value(id), back.value(id));
            assert_eq!(s.name(id), back.name(id));
        }
        let mut bad = doc.clone();
        bad.format_version = 9;
        assert!(matches!(
            ParamStore::<f64>::from_document(&bad),
            Err(Error::FormatVersion(9))
        ));
    }
}
