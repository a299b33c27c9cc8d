//! Projected gradient descent with Barzilai–Borwein steps and Armijo
//! backtracking, shared by the convex baseline fits.

/// Outcome of [`minimize`].
#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<f64>,
    /// Projected-gradient norm fell below the tolerance. False both when
    /// the iteration cap was hit and when line search stalled.
    pub converged: bool,
}

pub(crate) struct Options {
    /// Entries at or above this index are clamped at 0; below are free.
    pub nonneg_from: usize,
    pub max_iters: usize,
    pub tol: f64,
}

fn project(x: &mut [f64], from: usize) {
    for v in &mut x[from..] {
        *v = v.max(0.0);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `fg` returns the objective and writes the gradient. Non-finite objective
/// values are treated as infeasible and cause backtracking.
pub(crate) fn minimize(
    mut fg: impl FnMut(&[f64], &mut [f64]) -> f64,
    x0: Vec<f64>,
    opt: &Options,
) -> Minimum {
    let n = x0.len();
    let mut x = x0;
    project(&mut x, opt.nonneg_from);
    let mut g = vec![0.0; n];
    let mut f = fg(&x, &mut g);
    let mut trace = vec![f];
    let gnorm = dot(&g, &g).sqrt();
    let mut step = if gnorm > 0.0 { 1.0 / gnorm } else { 1.0 };
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    for _ in 0..opt.max_iters {
        // projected-gradient norm as the stationarity measure
        let pg: f64 = (0..n)
            .map(|i| {
                let mut v = x[i] - g[i];
                if i >= opt.nonneg_from {
                    v = v.max(0.0);
                }
                (v - x[i]).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if pg < opt.tol {
            return Minimum {
                x,
                trace,
                converged: true,
            };
        }
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                xn[i] = x[i] - step * g[i];
            }
            project(&mut xn, opt.nonneg_from);
            let fnew = fg(&xn, &mut gn);
            let decrease: f64 = (0..n).map(|i| g[i] * (xn[i] - x[i])).sum();
            // strict decrease: a step too small to move x must not count
            if fnew.is_finite() && fnew < f && fnew <= f + 1e-4 * decrease {
                accepted = true;
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                step = if sy > 0.0 {
                    (dot(&s, &s) / sy).clamp(1e-12, 1e12)
                } else {
                    step * 2.0
                };
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                f = fnew;
                trace.push(f);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no descent left at machine precision
            return Minimum {
                x,
                trace,
                converged: false,
            };
        }
    }
    Minimum {
        x,
        trace,
        converged: false,
    }
}
