use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optim::{minimize, Options};
use crate::error::{invalid, Result};
use crate::ppsim::{simulate_from, EventSequence, MultiHawkes};

/// Candidate decays tried by [`fit_hawkes_select_beta`].
pub const BETA_GRID: [f64; 6] = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HawkesFit {
    pub params: MultiHawkes,
    pub l1_weight: f64,
    /// Objective after every accepted step, starting from the initial point.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Objective terms of one sequence, accumulating the gradient if asked.
fn seq_terms(p: &MultiHawkes, seq: &EventSequence, grad: Option<(&mut [f64], &mut [f64])>) -> f64 {
    let d = p.dims();
    let beta = p.beta;
    let mut r = vec![0.0; d];
    let mut last = 0.0;
    let mut nll = 0.0;
    let mut grad = grad;
    for (&t, &m) in seq.times.iter().zip(&seq.marks) {
        let decay = (-beta * (t - last)).exp();
        r.iter_mut().for_each(|x| *x *= decay);
        last = t;
        let lam = p.mu[m] + p.a[m].iter().zip(&r).map(|(a, x)| a * x).sum::<f64>();
        if lam <= 0.0 {
            return f64::INFINITY;
        }
        nll -= lam.ln();
        if let Some((gmu, ga)) = grad.as_mut() {
            gmu[m] -= 1.0 / lam;
            for j in 0..d {
                ga[m * d + j] -= r[j] / lam;
            }
        }
        r[m] += 1.0;
    }
    let horizon = seq.horizon;
    nll += p.mu.iter().sum::<f64>() * horizon;
    // Σ_d Σ_k A[d][m_k] (1 − e^{−β(T−t_k)}) / β
    let mut tail = vec![0.0; d];
    for (&t, &m) in seq.times.iter().zip(&seq.marks) {
        tail[m] += (1.0 - (-beta * (horizon - t)).exp()) / beta;
    }
    for row in &p.a {
        nll += row.iter().zip(&tail).map(|(a, t)| a * t).sum::<f64>();
    }
    if let Some((gmu, ga)) = grad {
        gmu.iter_mut().for_each(|g| *g += horizon);
        for dd in 0..d {
            for j in 0..d {
                ga[dd * d + j] += tail[j];
            }
        }
    }
    nll
}

fn check_seqs(seqs: &[EventSequence], d: usize) -> Result<()> {
    for s in seqs {
        crate::ppsim::check_sorted(&s.times)?;
        if s.marks.iter().any(|&m| m >= d) {
            return Err(invalid(format!("mark out of range for {d} dimensions")));
        }
        if s.times.last().is_some_and(|&t| t > s.horizon) {
            return Err(invalid("event after the sequence horizon"));
        }
    }
    Ok(())
}

/// `−Σ log λ_{m_i}(t_i) + Σ_d Λ_d(T) + l1·Σ A`, summed over sequences.
/// Returns `+∞` when an observed event has zero intensity.
pub fn hawkes_neg_loglik(p: &MultiHawkes, seqs: &[EventSequence], l1_weight: f64) -> Result<f64> {
    check_seqs(seqs, p.dims())?;
    let parts: Vec<f64> = seqs.par_iter().map(|s| seq_terms(p, s, None)).collect();
    Ok(parts.iter().sum::<f64>() + l1_weight * p.a.iter().flatten().sum::<f64>())
}

/// Objective and its gradient as `(value, dμ, dA row-major)`.
pub fn hawkes_neg_loglik_grad(
    p: &MultiHawkes,
    seqs: &[EventSequence],
    l1_weight: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    check_seqs(seqs, p.dims())?;
    Ok(objective(p, seqs, l1_weight))
}

fn objective(p: &MultiHawkes, seqs: &[EventSequence], l1: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let d = p.dims();
    let parts: Vec<(f64, Vec<f64>, Vec<f64>)> = seqs
        .par_iter()
        .map(|s| {
            let mut gmu = vec![0.0; d];
            let mut ga = vec![0.0; d * d];
            let v = seq_terms(p, s, Some((&mut gmu, &mut ga)));
            (v, gmu, ga)
        })
        .collect();
    let mut f = l1 * p.a.iter().flatten().sum::<f64>();
    let mut gmu = vec![0.0; d];
    let mut ga = vec![l1; d * d];
    for (v, m, a) in parts {
        f += v;
        gmu.iter_mut().zip(&m).for_each(|(x, y)| *x += y);
        ga.iter_mut().zip(&a).for_each(|(x, y)| *x += y);
    }
    (f, gmu, ga)
}

fn cmp_seq(a: &EventSequence, b: &EventSequence) -> Ordering {
    a.horizon
        .total_cmp(&b.horizon)
        .then_with(|| a.times.len().cmp(&b.times.len()))
        .then_with(|| {
            a.times
                .iter()
                .zip(&b.times)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| a.marks.cmp(&b.marks))
}

/// Maximum-likelihood fit with fixed decay `beta` by projected gradient.
///
/// Sequences are put in a canonical order first, so the result does not
/// depend on the order they are passed in.
pub fn fit_hawkes(
    seqs: &[EventSequence],
    d: usize,
    beta: f64,
    l1_weight: f64,
    max_iters: usize,
) -> Result<HawkesFit> {
    if d == 0 || !(beta.is_finite() && beta > 0.0) || !(l1_weight.is_finite() && l1_weight >= 0.0) {
        return Err(invalid("need d >= 1, beta > 0 and l1_weight >= 0"));
    }
    check_seqs(seqs, d)?;
    let mut seqs = seqs.to_vec();
    seqs.sort_by(cmp_seq);
    let mut counts = vec![0usize; d];
    for s in &seqs {
        for &m in &s.marks {
            counts[m] += 1;
        }
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(invalid(format!("dimension {k} has no events")));
    }
    let total_time: f64 = seqs.iter().map(|s| s.horizon).sum();
    // half of each empirical rate as background, weak uniform excitation
    let mut x0: Vec<f64> = counts
        .iter()
        .map(|&c| 0.5 * c as f64 / total_time)
        .collect();
    x0.extend(std::iter::repeat_n(0.1 * beta / d as f64, d * d));
    let unpack = |x: &[f64]| MultiHawkes {
        mu: x[..d].to_vec(),
        a: x[d..].chunks(d).map(<[f64]>::to_vec).collect(),
        beta,
    };
    let min = minimize(
        |x, g| {
            let (f, gmu, ga) = objective(&unpack(x), &seqs, l1_weight);
            g[..d].copy_from_slice(&gmu);
            g[d..].copy_from_slice(&ga);
            f
        },
        x0,
        &Options {
            nonneg_from: 0,
            max_iters,
            tol: 1e-5,
        },
    );
    Ok(HawkesFit {
        params: unpack(&min.x),
        l1_weight,
        trace: min.trace,
        converged: min.converged,
    })
}

/// Fits once per decay in [`BETA_GRID`] and keeps the best validation
/// likelihood (ties go to the smaller decay).
pub fn fit_hawkes_select_beta(
    train: &[EventSequence],
    val: &[EventSequence],
    d: usize,
    l1_weight: f64,
    max_iters: usize,
) -> Result<HawkesFit> {
    let mut best: Option<(f64, HawkesFit)> = None;
    for beta in BETA_GRID {
        let fit = fit_hawkes(train, d, beta, l1_weight, max_iters)?;
        let v = hawkes_neg_loglik(&fit.params, val, 0.0)?;
        log::info!("hawkes beta = {beta}: validation nll = {v:.4}");
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, fit));
        }
    }
    Ok(best.expect("grid is non-empty").1)
}

/// Monte-Carlo next event after `now`: mean first-arrival gap and the most
/// frequent first mark (lowest id on ties). Rollouts that see no event
/// within `max_gap` count as `max_gap`.
pub fn hawkes_predict_next(
    p: &MultiHawkes,
    history: &EventSequence,
    now: f64,
    n_rollouts: usize,
    max_gap: f64,
    seed: u64,
) -> Result<(usize, f64)> {
    if n_rollouts == 0 || !(max_gap > 0.0) {
        return Err(invalid("need n_rollouts >= 1 and max_gap > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut votes = vec![0usize; p.dims()];
    let mut gap_sum = 0.0;
    for _ in 0..n_rollouts {
        let next = simulate_from(p, history, now, now + max_gap, Some(1), &mut rng)?;
        match next.times.first() {
            Some(&t) => {
                gap_sum += t - now;
                votes[next.marks[0]] += 1;
            }
            None => gap_sum += max_gap,
        }
    }
    let mark = if votes.iter().all(|&v| v == 0) {
        crate::numcore::argmax(&p.mu).unwrap_or(0)
    } else {
        crate::numcore::argmax(&votes.iter().map(|&v| v as f64).collect::<Vec<_>>()).unwrap_or(0)
    };
    Ok((mark, gap_sum / n_rollouts as f64))
}
