use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::EventSequence;
use crate::error::{invalid, Result};

/// D-dimensional Hawkes process with a shared exponential decay:
/// `λ_d(t) = μ_d + Σ_{t_i<t} A[d][m_i] e^{−β(t−t_i)}`.
///
/// The branching matrix is `A / β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiHawkes {
    pub mu: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub beta: f64,
}

impl MultiHawkes {
    pub fn new(mu: Vec<f64>, a: Vec<Vec<f64>>, beta: f64) -> Result<Self> {
        let m = Self { mu, a, beta };
        m.validate()?;
        m.warn_if_explosive();
        Ok(m)
    }

    /// Logs a warning when the branching matrix has spectral radius >= 1.
    pub fn warn_if_explosive(&self) {
        let rho = self.spectral_radius();
        if rho >= 1.0 {
            log::warn!(
                "branching matrix has spectral radius {rho:.3} >= 1; the process is not stationary"
            );
        }
    }

    pub fn dims(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.mu.len();
        if d == 0 {
            return Err(invalid("MultiHawkes needs at least one dimension"));
        }
        if self.a.len() != d || self.a.iter().any(|r| r.len() != d) {
            return Err(invalid(format!("infectivity matrix must be {d}x{d}")));
        }
        let ok = |x: &f64| x.is_finite() && *x >= 0.0;
        if !self.mu.iter().all(ok) || !self.a.iter().flatten().all(ok) {
            return Err(invalid("rates and infectivities must be finite and >= 0"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(invalid("beta must be finite and > 0"));
        }
        Ok(())
    }

    /// Largest eigenvalue modulus of `A / β`, via Gelfand's formula
    /// `ρ = lim ‖Mⁿ‖^{1/n}` with `n = 2^k` by repeated squaring.
    pub fn spectral_radius(&self) -> f64 {
        let d = self.dims();
        let mut b = DMatrix::from_fn(d, d, |i, j| self.a[i][j] / self.beta);
        // Mⁿ = e^{log_scale} · b with ‖b‖ = 1
        let mut log_scale = 0.0;
        let mut n = 1.0;
        for _ in 0..60 {
            let c = b.norm();
            if c == 0.0 {
                return 0.0;
            }
            b /= c;
            log_scale += c.ln();
            b = &b * &b;
            log_scale *= 2.0;
            n *= 2.0;
        }
        let c = b.norm();
        if c == 0.0 {
            0.0
        } else {
            ((log_scale + c.ln()) / n).exp()
        }
    }

    /// Per-dimension intensities just before `t`.
    pub fn intensities_at(&self, t: f64, history: &EventSequence) -> Result<Vec<f64>> {
        super::sequence::check_sorted(&history.times)?;
        let mut out = self.mu.clone();
        for (&ti, &m) in history.times.iter().zip(&history.marks) {
            if ti >= t {
                break;
            }
            self.check_mark(m)?;
            let k = (-self.beta * (t - ti)).exp();
            for (d, o) in out.iter_mut().enumerate() {
                *o += self.a[d][m] * k;
            }
        }
        Ok(out)
    }

    /// Per-dimension compensators Λ_d(t).
    pub fn compensators(&self, t: f64, history: &EventSequence) -> Result<Vec<f64>> {
        super::sequence::check_sorted(&history.times)?;
        let mut out: Vec<f64> = self.mu.iter().map(|m| m * t).collect();
        for (&ti, &m) in history.times.iter().zip(&history.marks) {
            if ti >= t {
                break;
            }
            self.check_mark(m)?;
            let g = (1.0 - (-self.beta * (t - ti)).exp()) / self.beta;
            for (d, o) in out.iter_mut().enumerate() {
                *o += self.a[d][m] * g;
            }
        }
        Ok(out)
    }

    /// Long-run per-dimension rates `(I − A/β)⁻¹ μ`, if the process is stationary.
    pub fn stationary_rates(&self) -> Option<Vec<f64>> {
        let d = self.dims();
        let m = DMatrix::from_fn(d, d, |i, j| {
            f64::from(u8::from(i == j)) - self.a[i][j] / self.beta
        });
        let mu = nalgebra::DVector::from_column_slice(&self.mu);
        (self.spectral_radius() < 1.0)
            .then(|| m.lu().solve(&mu))
            .flatten()
            .map(|v| v.iter().copied().collect())
    }

    fn check_mark(&self, m: usize) -> Result<()> {
        if m < self.dims() {
            Ok(())
        } else {
            Err(invalid(format!(
                "mark {m} out of range for {} dimensions",
                self.dims()
            )))
        }
    }
}

/// Decayed per-source sums for the sampler.
#[derive(Debug, Clone)]
pub struct MultiState {
    last: f64,
    s: Vec<f64>,
}

impl MultiHawkes {
    pub(crate) fn init_state(&self, history: &EventSequence) -> Result<MultiState> {
        let mut st = MultiState {
            last: 0.0,
            s: vec![0.0; self.dims()],
        };
        for (&t, &m) in history.times.iter().zip(&history.marks) {
            self.check_mark(m)?;
            self.push_event(&mut st, t, m);
        }
        Ok(st)
    }

    pub(crate) fn push_event(&self, st: &mut MultiState, t: f64, mark: usize) {
        let f = (-self.beta * (t - st.last)).exp();
        st.s.iter_mut().for_each(|x| *x *= f);
        st.s[mark] += 1.0;
        st.last = t;
    }

    /// Fills `out` with per-dimension rates at `t` and returns their sum.
    pub(crate) fn rates(&self, st: &MultiState, t: f64, out: &mut Vec<f64>) -> f64 {
        let k = (-self.beta * (t - st.last)).exp();
        out.clear();
        out.extend(
            self.mu
                .iter()
                .zip(&self.a)
                .map(|(m, row)| m + k * row.iter().zip(&st.s).map(|(a, s)| a * s).sum::<f64>()),
        );
        out.iter().sum()
    }
}
