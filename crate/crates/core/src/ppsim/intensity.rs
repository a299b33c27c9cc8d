use serde::{Deserialize, Serialize};

use super::sequence::check_sorted;
use crate::error::{invalid, Result};

/// Piecewise-linear function of time, constant beyond the first and last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    /// `(t, value)` pairs with strictly increasing `t`.
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let p = Self { knots };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(v: f64) -> Self {
        Self {
            knots: vec![(0.0, v)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.is_empty() {
            return Err(invalid("piecewise-linear table needs at least one knot"));
        }
        if self
            .knots
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite() || *v < 0.0)
        {
            return Err(invalid("knots must be finite with non-negative values"));
        }
        if self.knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("knot times must be strictly increasing"));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|(tk, _)| *tk <= t);
        if i == 0 {
            return k[0].1;
        }
        if i == k.len() {
            return k[i - 1].1;
        }
        let (t0, v0) = k[i - 1];
        let (t1, v1) = k[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// First knot strictly after `t`, or infinity.
    pub fn next_knot(&self, t: f64) -> f64 {
        let i = self.knots.partition_point(|(tk, _)| *tk <= t);
        self.knots.get(i).map_or(f64::INFINITY, |k| k.0)
    }

    /// Exact integral over `[a, b]`, `a <= b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let hi = self.next_knot(lo).min(b);
            total += 0.5 * (self.value(lo) + self.value(hi)) * (hi - lo);
            lo = hi;
        }
        total
    }

    fn max_on(&self, a: f64, b: f64) -> f64 {
        self.value(a).max(self.value(b))
    }
}

/// Conditional-intensity families for an unmarked process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntensityModel {
    Poisson {
        mu0: f64,
    },
    TimeVaryingPoisson {
        mu: PiecewiseLinear,
    },
    /// `γ(t)` times the number of earlier events.
    ReinforcedPoisson {
        gamma: PiecewiseLinear,
    },
    Hawkes {
        mu: f64,
        alpha: f64,
        beta: f64,
    },
    /// Exciting minus inhibiting kernel, clamped at zero.
    Reactive {
        mu: f64,
        alpha1: f64,
        beta1: f64,
        alpha2: f64,
        beta2: f64,
    },
    /// `exp(μt − α·n(t))`.
    SelfCorrecting {
        mu: f64,
        alpha: f64,
    },
}

fn nonneg(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be finite and >= 0, got {x}")))
    }
}

fn pos(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be finite and > 0, got {x}")))
    }
}

impl IntensityModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Poisson { mu0 } => nonneg(*mu0, "mu0"),
            Self::TimeVaryingPoisson { mu } => mu.validate(),
            Self::ReinforcedPoisson { gamma } => gamma.validate(),
            Self::Hawkes { mu, alpha, beta } => {
                nonneg(*mu, "mu")?;
                nonneg(*alpha, "alpha")?;
                pos(*beta, "beta")
            }
            Self::Reactive {
                mu,
                alpha1,
                beta1,
                alpha2,
                beta2,
            } => {
                nonneg(*mu, "mu")?;
                nonneg(*alpha1, "alpha1")?;
                nonneg(*alpha2, "alpha2")?;
                pos(*beta1, "beta1")?;
                pos(*beta2, "beta2")
            }
            Self::SelfCorrecting { mu, alpha } => {
                pos(*mu, "mu")?;
                pos(*alpha, "alpha")
            }
        }
    }

    /// λ(t) given the events strictly before `t`; later entries of
    /// `history` are ignored.
    pub fn intensity_at(&self, t: f64, history: &[f64]) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(format!("t must be finite and >= 0, got {t}")));
        }
        check_sorted(history)?;
        let past = &history[..history.partition_point(|&ti| ti < t)];
        let kernel = |a: f64, b: f64| past.iter().map(|ti| a * (-b * (t - ti)).exp()).sum::<f64>();
        Ok(match self {
            Self::Poisson { mu0 } => *mu0,
            Self::TimeVaryingPoisson { mu } => mu.value(t),
            Self::ReinforcedPoisson { gamma } => gamma.value(t) * past.len() as f64,
            Self::Hawkes { mu, alpha, beta } => mu + kernel(*alpha, *beta),
            Self::Reactive {
                mu,
                alpha1,
                beta1,
                alpha2,
                beta2,
            } => (mu + kernel(*alpha1, *beta1) - kernel(*alpha2, *beta2)).max(0.0),
            Self::SelfCorrecting { mu, alpha } => (mu * t - alpha * past.len() as f64).exp(),
        })
    }

    /// Λ(t) = ∫₀ᵗ λ(s) ds. Closed form except for `Reactive`, whose clamp is
    /// handled by composite Simpson between events.
    pub fn compensator(&self, t: f64, history: &[f64]) -> Result<f64> {
        check_sorted(history)?;
        let past = &history[..history.partition_point(|&ti| ti < t)];
        let mut st = self.init_state(&[]);
        let mut total = 0.0;
        let mut a = 0.0;
        for &ti in past {
            total += self.piece_integral(&st, a, ti.max(a));
            self.push_event(&mut st, ti);
            a = ti.max(a);
        }
        Ok(total + self.piece_integral(&st, a, t.max(a)))
    }
}

/// Incremental history summary used by the thinning sampler.
#[derive(Debug, Clone)]
pub struct UniState {
    last: f64,
    s1: f64,
    s2: f64,
    n: usize,
}

impl IntensityModel {
    fn decays(&self) -> (f64, f64) {
        match self {
            Self::Hawkes { beta, .. } => (*beta, 0.0),
            Self::Reactive { beta1, beta2, .. } => (*beta1, *beta2),
            _ => (0.0, 0.0),
        }
    }

    pub(crate) fn init_state(&self, history: &[f64]) -> UniState {
        let mut st = UniState {
            last: 0.0,
            s1: 0.0,
            s2: 0.0,
            n: 0,
        };
        for &t in history {
            self.push_event(&mut st, t);
        }
        st
    }

    pub(crate) fn push_event(&self, st: &mut UniState, t: f64) {
        let (b1, b2) = self.decays();
        st.s1 = st.s1 * (-b1 * (t - st.last)).exp() + 1.0;
        st.s2 = st.s2 * (-b2 * (t - st.last)).exp() + 1.0;
        st.last = t;
        st.n += 1;
    }

    /// Intensity at `t` from the tracked state (events at or before `st.last`).
    pub(crate) fn rate(&self, st: &UniState, t: f64) -> f64 {
        let (b1, b2) = self.decays();
        let e1 = st.s1 * (-b1 * (t - st.last)).exp();
        let e2 = st.s2 * (-b2 * (t - st.last)).exp();
        match self {
            Self::Poisson { mu0 } => *mu0,
            Self::TimeVaryingPoisson { mu } => mu.value(t),
            Self::ReinforcedPoisson { gamma } => gamma.value(t) * st.n as f64,
            Self::Hawkes { mu, alpha, .. } => mu + alpha * e1,
            Self::Reactive {
                mu, alpha1, alpha2, ..
            } => (mu + alpha1 * e1 - alpha2 * e2).max(0.0),
            Self::SelfCorrecting { mu, alpha } => (mu * t - alpha * st.n as f64).exp(),
        }
    }

    /// ∫ λ over `[a, b]` when no event falls inside `(a, b)` and `st`
    /// holds every event up to `a`.
    pub(crate) fn piece_integral(&self, st: &UniState, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let n = st.n as f64;
        match self {
            Self::Poisson { mu0 } => mu0 * (b - a),
            Self::TimeVaryingPoisson { mu } => mu.integral(a, b),
            Self::ReinforcedPoisson { gamma } => n * gamma.integral(a, b),
            Self::Hawkes { mu, alpha, beta } => {
                mu * (b - a)
                    + alpha
                        * st.s1
                        * (-beta * (a - st.last)).exp()
                        * (1.0 - (-beta * (b - a)).exp())
                        / beta
            }
            Self::SelfCorrecting { mu, alpha } => {
                (mu * a - alpha * n).exp() * (mu * (b - a)).exp_m1() / mu
            }
            Self::Reactive { .. } => {
                let m = 64;
                let h = (b - a) / m as f64;
                let mut acc = 0.0;
                for j in 0..=m {
                    let w = if j == 0 || j == m {
                        1.0
                    } else if j % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += w * self.rate(st, a + j as f64 * h);
                }
                acc * h / 3.0
            }
        }
    }

    /// `(λ̄, end)`: an upper bound on λ over `[t, end)`.
    pub(crate) fn bound(&self, st: &UniState, t: f64) -> (f64, f64) {
        match self {
            Self::Poisson { mu0 } => (*mu0, f64::INFINITY),
            Self::TimeVaryingPoisson { mu } => {
                let end = mu.next_knot(t);
                (mu.max_on(t, end), end)
            }
            Self::ReinforcedPoisson { gamma } => {
                let end = gamma.next_knot(t);
                (gamma.max_on(t, end) * st.n as f64, end)
            }
            Self::Hawkes { .. } => (self.rate(st, t), f64::INFINITY),
            Self::Reactive {
                mu, alpha1, beta1, ..
            } => (
                mu + alpha1 * st.s1 * (-beta1 * (t - st.last)).exp(),
                f64::INFINITY,
            ),
            Self::SelfCorrecting { mu, alpha } => {
                let end = t + 1.0 / mu;
                ((mu * end - alpha * st.n as f64).exp(), end)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poisson_ignores_history() {
        let m = IntensityModel::Poisson { mu0: 2.0 };
        assert_eq!(m.intensity_at(5.0, &[1.0, 2.0, 4.9]).unwrap(), 2.0);
        assert_eq!(m.intensity_at(0.0, &[]).unwrap(), 2.0);
    }

    #[test]
    fn hawkes_single_event() {
        let m = IntensityModel::Hawkes {
            mu: 0.5,
            alpha: 0.8,
            beta: 1.0,
        };
        let want = 0.5 + 0.8 * (-1.0f64).exp();
        assert_relative_eq!(m.intensity_at(2.0, &[1.0]).unwrap(), want, epsilon = 1e-15);
        assert_relative_eq!(want, 0.79430, epsilon = 5e-6);
    }

    #[test]
    fn self_correcting_at_origin() {
        let m = IntensityModel::SelfCorrecting {
            mu: 1.0,
            alpha: 0.2,
        };
        assert_eq!(m.intensity_at(0.0, &[]).unwrap(), 1.0);
        assert_relative_eq!(
            m.intensity_at(2.0, &[1.0]).unwrap(),
            (2.0f64 - 0.2).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn unsorted_history_is_rejected() {
        let m = IntensityModel::Poisson { mu0: 1.0 };
        assert!(m.intensity_at(5.0, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn reactive_clamps() {
        let m = IntensityModel::Reactive {
            mu: 0.1,
            alpha1: 0.0,
            beta1: 1.0,
            alpha2: 5.0,
            beta2: 1.0,
        };
        assert_eq!(m.intensity_at(1.5, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn reinforced_grows_with_count() {
        let m = IntensityModel::ReinforcedPoisson {
            gamma: PiecewiseLinear::new(vec![(0.0, 1.0), (10.0, 0.2)]).unwrap(),
        };
        let mut prev = 0.0;
        for n in 0..6 {
            let hist: Vec<f64> = (0..n).map(|k| 0.5 + k as f64).collect();
            let v = m.intensity_at(6.0, &hist).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn piecewise_linear_integral() {
        let p = PiecewiseLinear::new(vec![(1.0, 2.0), (3.0, 0.0)]).unwrap();
        assert_eq!(p.value(0.0), 2.0);
        assert_eq!(p.value(2.0), 1.0);
        assert_eq!(p.value(9.0), 0.0);
        // 2 on [0,1], triangle of area 2 on [1,3], then 0
        assert_relative_eq!(p.integral(0.0, 5.0), 4.0, epsilon = 1e-14);
    }

    fn numeric_compensator(m: &IntensityModel, t: f64, h: &[f64]) -> f64 {
        let n = 200_000;
        let dx = t / n as f64;
        (0..n)
            .map(|k| m.intensity_at((k as f64 + 0.5) * dx, h).unwrap() * dx)
            .sum()
    }

    #[test]
    fn compensators_match_quadrature() {
        let h = [0.7, 1.9, 2.0, 4.2];
        let models = [
            IntensityModel::Poisson { mu0: 1.3 },
            IntensityModel::TimeVaryingPoisson {
                mu: PiecewiseLinear::new(vec![(1.0, 0.5), (2.5, 2.0), (4.0, 1.0)]).unwrap(),
            },
            IntensityModel::ReinforcedPoisson {
                gamma: PiecewiseLinear::new(vec![(0.0, 1.0), (5.0, 0.1)]).unwrap(),
            },
            IntensityModel::Hawkes {
                mu: 0.5,
                alpha: 0.8,
                beta: 1.3,
            },
            IntensityModel::Reactive {
                mu: 0.4,
                alpha1: 0.9,
                beta1: 2.0,
                alpha2: 0.6,
                beta2: 0.5,
            },
            IntensityModel::SelfCorrecting {
                mu: 0.8,
                alpha: 0.5,
            },
        ];
        for m in &models {
            let got = m.compensator(5.0, &h).unwrap();
            let want = numeric_compensator(m, 5.0, &h);
            assert_relative_eq!(got, want, max_relative = 1e-4);
        }
    }

    #[test]
    fn tracked_rate_matches_direct_sum() {
        let h = [0.3, 1.0, 1.1, 2.5];
        let m = IntensityModel::Reactive {
            mu: 0.4,
            alpha1: 0.9,
            beta1: 2.0,
            alpha2: 0.3,
            beta2: 0.5,
        };
        let st = m.init_state(&h);
        for t in [2.6, 3.0, 7.5] {
            assert_relative_eq!(
                m.rate(&st, t),
                m.intensity_at(t, &h).unwrap(),
                epsilon = 1e-13
            );
            let (bar, _) = m.bound(&st, t);
            assert!(m.rate(&st, t) <= bar);
        }
    }
}
