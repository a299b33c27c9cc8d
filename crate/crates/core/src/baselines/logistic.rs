use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::optim::{minimize, Options};
use crate::error::{invalid, Error, Result};
use crate::model::Sample;
use crate::numcore::{argmax, log_softmax_in_place, softmax_in_place};

/// Flattened time-series window, oldest sub-window first.
pub fn window_vector(s: &Sample) -> Vec<f64> {
    s.ts_window.iter().flatten().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    fn fit(x: &[Vec<f64>]) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        for r in x {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; d];
        for r in x {
            var.iter_mut()
                .zip(r.iter().zip(&mean))
                .for_each(|(s, (v, m))| *s += (v - m).powi(2) / n);
        }
        let std = var
            .into_iter()
            .map(|v| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 })
            .collect();
        Self { mean, std }
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Multinomial logistic regression; `w` is `k × d` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxClassifier {
    pub k: usize,
    pub d: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    /// Set when training saw a single class; that class is always returned.
    pub constant: Option<usize>,
}

impl SoftmaxClassifier {
    fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|c| {
                self.b[c]
                    + self.w[c * self.d..(c + 1) * self.d]
                        .iter()
                        .zip(x)
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        if let Some(c) = self.constant {
            let mut p = vec![0.0; self.k];
            p[c] = 1.0;
            return p;
        }
        let mut z = self.logits(x);
        softmax_in_place(&mut z);
        z
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.probs(x)).unwrap_or(0)
    }

    /// Mean cross-entropy plus `l2/2·‖W‖²` (bias unpenalized).
    fn fit(x: &[Vec<f64>], y: &[usize], k: usize, l2: f64, max_iters: usize) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let first = y[0];
        if y.iter().all(|&c| c == first) {
            log::warn!("logistic classifier saw only class {first}; it will always predict it");
            return Self {
                k,
                d,
                w: vec![0.0; k * d],
                b: vec![0.0; k],
                constant: Some(first),
            };
        }
        let nw = k * d;
        let min = minimize(
            |theta, g| {
                let (w, b) = theta.split_at(nw);
                g.iter_mut().for_each(|v| *v = 0.0);
                let mut f = 0.0;
                let mut z = vec![0.0; k];
                for (xi, &yi) in x.iter().zip(y) {
                    for c in 0..k {
                        z[c] = b[c]
                            + w[c * d..(c + 1) * d]
                                .iter()
                                .zip(xi)
                                .map(|(a, v)| a * v)
                                .sum::<f64>();
                    }
                    log_softmax_in_place(&mut z);
                    f -= z[yi] / n;
                    for c in 0..k {
                        let r = (z[c].exp() - f64::from(u8::from(c == yi))) / n;
                        g[nw + c] += r;
                        for (gj, v) in g[c * d..(c + 1) * d].iter_mut().zip(xi) {
                            *gj += r * v;
                        }
                    }
                }
                f += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
                for (gj, wj) in g[..nw].iter_mut().zip(w) {
                    *gj += l2 * wj;
                }
                f
            },
            vec![0.0; nw + k],
            &Options {
                nonneg_from: nw + k,
                max_iters,
                tol: 1e-8,
            },
        );
        log::debug!(
            "softmax fit: {} accepted steps, converged = {}",
            min.trace.len() - 1,
            min.converged
        );
        let (w, b) = min.x.split_at(nw);
        Self {
            k,
            d,
            w: w.to_vec(),
            b: b.to_vec(),
            constant: None,
        }
    }
}

/// Ridge regression of the gap on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRegressor {
    pub w: Vec<f64>,
    pub b: f64,
}

impl GapRegressor {
    /// Minimizes `1/(2n)·Σ(y − b − w·x)² + l2/2·‖w‖²` for centered `x`.
    fn fit(x: &[Vec<f64>], y: &[f64], l2: f64) -> Self {
        let n = x.len();
        let d = x[0].len();
        let ybar = y.iter().sum::<f64>() / n as f64;
        let xm = DMatrix::from_fn(n, d, |i, j| x[i][j]);
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
        let mut gram = xm.transpose() * &xm / n as f64;
        for i in 0..d {
            gram[(i, i)] += l2;
        }
        let rhs = xm.transpose() * yc / n as f64;
        let w = match gram.clone().cholesky() {
            Some(c) => c.solve(&rhs),
            None => gram
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(d)),
        };
        Self {
            w: w.iter().copied().collect(),
            b: ybar,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.b + self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Independent main-type, subtype and gap models over the flattened window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModels {
    scaler: Standardizer,
    pub main: SoftmaxClassifier,
    pub sub: SoftmaxClassifier,
    pub gap: GapRegressor,
    pub l2_weight: f64,
}

/// Iteration cap for the classifiers.
pub const LOGISTIC_MAX_ITERS: usize = 500;

pub fn fit_logistic(
    samples: &[Sample],
    k_main: usize,
    k_sub: usize,
    l2_weight: f64,
) -> Result<LogisticModels> {
    if samples.is_empty() {
        return Err(Error::Empty("fit_logistic"));
    }
    if !(l2_weight.is_finite() && l2_weight >= 0.0) {
        return Err(invalid("l2_weight must be finite and >= 0"));
    }
    let raw: Vec<Vec<f64>> = samples.iter().map(window_vector).collect();
    let d = raw[0].len();
    if d == 0 || raw.iter().any(|r| r.len() != d) {
        return Err(invalid("samples must share a non-empty window shape"));
    }
    if samples
        .iter()
        .any(|s| s.target_main >= k_main || s.target_sub >= k_sub)
    {
        return Err(invalid("target class out of range"));
    }
    let scaler = Standardizer::fit(&raw);
    let x: Vec<Vec<f64>> = raw.iter().map(|r| scaler.apply(r)).collect();
    let main_y: Vec<usize> = samples.iter().map(|s| s.target_main).collect();
    let sub_y: Vec<usize> = samples.iter().map(|s| s.target_sub).collect();
    let gaps: Vec<f64> = samples.iter().map(|s| s.target_gap).collect();
    Ok(LogisticModels {
        main: SoftmaxClassifier::fit(&x, &main_y, k_main, l2_weight, LOGISTIC_MAX_ITERS),
        sub: SoftmaxClassifier::fit(&x, &sub_y, k_sub, l2_weight, LOGISTIC_MAX_ITERS),
        gap: GapRegressor::fit(&x, &gaps, l2_weight),
        scaler,
        l2_weight,
    })
}

/// `(main, sub, gap_days)`, gap clamped at 0.
pub fn predict_logistic(m: &LogisticModels, s: &Sample) -> Result<(usize, usize, f64)> {
    let raw = window_vector(s);
    if raw.len() != m.scaler.mean.len() {
        return Err(Error::Shape {
            op: "predict_logistic",
            expected: m.scaler.mean.len().to_string(),
            got: raw.len().to_string(),
        });
    }
    let x = m.scaler.apply(&raw);
    Ok((
        m.main.predict(&x),
        m.sub.predict(&x),
        m.gap.predict(&x).max(0.0),
    ))
}
