use super::{EventSequence, IntensityModel, MultiHawkes};
use crate::error::{Error, Result};

/// Rescaled inter-event times `Λ(t_i) − Λ(t_{i−1})`, with `Λ(t_0) = 0`.
/// Under the true model these are i.i.d. unit exponentials.
pub fn rescaled_intervals(m: &IntensityModel, seq: &EventSequence) -> Result<Vec<f64>> {
    super::check_sorted(&seq.times)?;
    let mut st = m.init_state(&[]);
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(seq.len());
    for &t in &seq.times {
        out.push(m.piece_integral(&st, prev, t));
        m.push_event(&mut st, t);
        prev = t;
    }
    Ok(out)
}

/// As [`rescaled_intervals`] for the superposed multivariate process.
pub fn rescaled_intervals_multi(m: &MultiHawkes, seq: &EventSequence) -> Result<Vec<f64>> {
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(seq.len());
    for &t in &seq.times {
        let c: f64 = m.compensators(t, seq)?.iter().sum();
        out.push(c - prev);
        prev = c;
    }
    Ok(out)
}

/// Kolmogorov–Smirnov distance between the sample and Exp(1).
pub fn ks_statistic_exp1(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("ks_statistic_exp1"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0, |d, (i, x)| {
        let f = 1.0 - (-x).exp();
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    }))
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    1.628 / (s + 0.12 + 0.11 / s)
}
