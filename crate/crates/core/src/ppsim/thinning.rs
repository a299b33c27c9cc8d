use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::intensity::UniState;
use super::multi::MultiState;
use super::{EventSequence, IntensityModel, MultiHawkes};
use crate::error::{Error, Result};

/// What the thinning sampler needs from a process.
pub trait PointProcess {
    type State;

    fn dims(&self) -> usize;
    /// State after replaying `history`.
    fn start(&self, history: &EventSequence) -> Result<Self::State>;
    /// `(λ̄, end)` with `λ(s) <= λ̄` for all `s` in `[t, end)`.
    fn bound(&self, st: &Self::State, t: f64) -> (f64, f64);
    /// Per-dimension rates at `t` into `out`; returns the total.
    fn rates(&self, st: &Self::State, t: f64, out: &mut Vec<f64>) -> f64;
    fn push(&self, st: &mut Self::State, t: f64, mark: usize);
}

impl PointProcess for IntensityModel {
    type State = UniState;

    fn dims(&self) -> usize {
        1
    }

    fn start(&self, history: &EventSequence) -> Result<UniState> {
        self.validate()?;
        Ok(self.init_state(&history.times))
    }

    fn bound(&self, st: &UniState, t: f64) -> (f64, f64) {
        IntensityModel::bound(self, st, t)
    }

    fn rates(&self, st: &UniState, t: f64, out: &mut Vec<f64>) -> f64 {
        let r = self.rate(st, t);
        out.clear();
        out.push(r);
        r
    }

    fn push(&self, st: &mut UniState, t: f64, _mark: usize) {
        self.push_event(st, t);
    }
}

impl PointProcess for MultiHawkes {
    type State = MultiState;

    fn dims(&self) -> usize {
        MultiHawkes::dims(self)
    }

    fn start(&self, history: &EventSequence) -> Result<MultiState> {
        self.validate()?;
        self.init_state(history)
    }

    fn bound(&self, st: &MultiState, t: f64) -> (f64, f64) {
        let mut buf = Vec::new();
        // every kernel decays, so the rate now bounds all later rates
        (self.rates(st, t, &mut buf), f64::INFINITY)
    }

    fn rates(&self, st: &MultiState, t: f64, out: &mut Vec<f64>) -> f64 {
        MultiHawkes::rates(self, st, t, out)
    }

    fn push(&self, st: &mut MultiState, t: f64, mark: usize) {
        self.push_event(st, t, mark);
    }
}

/// Samples a sequence on `[0, horizon]` by Ogata thinning.
pub fn sample_thinning<P: PointProcess>(p: &P, horizon: f64, seed: u64) -> Result<EventSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_from(p, &EventSequence::empty(0.0), 0.0, horizon, None, &mut rng)
}

/// Continues `history` from `start` up to `horizon`, stopping early after
/// `max_events` new events. Returns only the new events.
pub fn simulate_from<P: PointProcess, R: Rng>(
    p: &P,
    history: &EventSequence,
    start: f64,
    horizon: f64,
    max_events: Option<usize>,
    rng: &mut R,
) -> Result<EventSequence> {
    if !(start.is_finite() && horizon.is_finite() && start >= 0.0) {
        return Err(crate::error::invalid(
            "start and horizon must be finite, start >= 0",
        ));
    }
    if history.times.last().is_some_and(|&t| t > start) {
        return Err(crate::error::invalid("history extends past the start time"));
    }
    let mut st = p.start(history)?;
    let mut out = EventSequence::empty(horizon.max(start));
    let mut rates = Vec::with_capacity(p.dims());
    let mut t = start;
    let cap = max_events.unwrap_or(usize::MAX);
    while t < horizon && out.len() < cap {
        let (bar, end) = p.bound(&st, t);
        if !bar.is_finite() {
            return Err(Error::UnboundedIntensity(t));
        }
        if bar <= 0.0 {
            if end >= horizon {
                break;
            }
            t = end;
            continue;
        }
        let u: f64 = rng.gen();
        let w = -(1.0 - u).ln() / bar;
        if t + w >= end {
            t = end;
            continue;
        }
        t += w;
        if t > horizon {
            break;
        }
        let total = p.rates(&st, t, &mut rates);
        assert!(
            total <= bar * (1.0 + 1e-9) + 1e-12,
            "thinning bound violated at t = {t}: λ = {total} > λ̄ = {bar}"
        );
        let v = rng.gen::<f64>() * bar;
        if v >= total {
            continue;
        }
        // the same draw picks the mark: v is uniform on [0, total) here
        let mut acc = 0.0;
        let mut mark = rates.len() - 1;
        for (d, r) in rates.iter().enumerate() {
            acc += r;
            if v < acc {
                mark = d;
                break;
            }
        }
        if out.times.last().is_some_and(|&l| t <= l) {
            continue;
        }
        p.push(&mut st, t, mark);
        out.times.push(t);
        out.marks.push(mark);
    }
    Ok(out)
}
