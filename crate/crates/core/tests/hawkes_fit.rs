use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twinpp::baselines::{
    fit_hawkes, hawkes_neg_loglik, hawkes_neg_loglik_grad, hawkes_predict_next,
};
use twinpp::ppsim::{sample_thinning, EventSequence, MultiHawkes};

fn truth() -> MultiHawkes {
    MultiHawkes::new(vec![0.2, 0.2], vec![vec![0.5, 0.1], vec![0.1, 0.5]], 1.0).unwrap()
}

fn corpus(n: usize, horizon: f64) -> Vec<EventSequence> {
    (0..n)
        .map(|k| sample_thinning(&truth(), horizon, 100 + k as u64).unwrap())
        .collect()
}

#[test]
fn gradient_matches_finite_differences() {
    let seqs = corpus(3, 60.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = MultiHawkes::new(
            (0..2).map(|_| rng.gen_range(0.05..0.5)).collect(),
            (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(0.0..0.8)).collect())
                .collect(),
            1.0,
        )
        .unwrap();
        let l1 = rng.gen_range(0.0..2.0);
        let (_, gmu, ga) = hawkes_neg_loglik_grad(&p, &seqs, l1).unwrap();
        let h = 1e-6;
        let f = |q: &MultiHawkes| hawkes_neg_loglik(q, &seqs, l1).unwrap();
        for d in 0..2 {
            let (mut up, mut dn) = (p.clone(), p.clone());
            up.mu[d] += h;
            dn.mu[d] -= h;
            let num = (f(&up) - f(&dn)) / (2.0 * h);
            assert!((num - gmu[d]).abs() / num.abs().max(1.0) < 1e-4);
            for j in 0..2 {
                let (mut up, mut dn) = (p.clone(), p.clone());
                up.a[d][j] += h;
                dn.a[d][j] -= h;
                let num = (f(&up) - f(&dn)) / (2.0 * h);
                assert!((num - ga[d * 2 + j]).abs() / num.abs().max(1.0) < 1e-4);
            }
        }
    }
}

#[test]
fn compensator_matches_quadrature() {
    let p = MultiHawkes::new(vec![0.3, 0.1], vec![vec![0.4, 0.3], vec![0.0, 0.6]], 1.3).unwrap();
    let s = EventSequence::new(vec![0.4, 0.9, 2.2, 2.3, 3.5], vec![0, 1, 0, 1, 1], 5.0).unwrap();
    let closed: f64 = p.compensators(5.0, &s).unwrap().iter().sum();
    // Simpson between events, where λ is smooth
    let mut edges = vec![0.0];
    edges.extend(&s.times);
    edges.push(5.0);
    let mut num = 0.0;
    for w in edges.windows(2) {
        let m = 2000;
        let h = (w[1] - w[0]) / m as f64;
        for j in 0..=m {
            let x = (w[0] + j as f64 * h).clamp(w[0] + 1e-13, w[1]);
            let c = if j == 0 || j == m {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            num += c * h / 3.0 * p.intensities_at(x, &s).unwrap().iter().sum::<f64>();
        }
    }
    assert_relative_eq!(closed, num, epsilon = 1e-6);
}

#[test]
fn fit_is_order_invariant_and_monotone() {
    let seqs = corpus(4, 150.0);
    let a = fit_hawkes(&seqs, 2, 1.0, 0.0, 150).unwrap();
    let mut rev = seqs.clone();
    rev.reverse();
    let b = fit_hawkes(&rev, 2, 1.0, 0.0, 150).unwrap();
    assert_eq!(a, b);
    assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(a
        .params
        .mu
        .iter()
        .chain(a.params.a.iter().flatten())
        .all(|v| *v >= 0.0));
}

#[test]
fn heavy_penalty_kills_excitation() {
    let seqs = corpus(2, 300.0);
    let n: usize = seqs.iter().map(EventSequence::len).sum();
    let fit = fit_hawkes(&seqs, 2, 1.0, 10.0 * n as f64, 300).unwrap();
    assert!(
        fit.params.a.iter().flatten().all(|v| *v < 1e-9),
        "{:?}",
        fit.params.a
    );
}

#[test]
fn recovers_a_two_dimensional_process() {
    let seqs = corpus(40, 1000.0);
    let n: usize = seqs.iter().map(EventSequence::len).sum();
    assert!(n >= 5000, "{n}");
    let fit = fit_hawkes(&seqs, 2, 1.0, 0.0, 2000).unwrap();
    let t = truth();
    for d in 0..2 {
        assert!(
            (fit.params.mu[d] / t.mu[d] - 1.0).abs() < 0.15,
            "{:?}",
            fit.params
        );
        for j in 0..2 {
            assert!(
                (fit.params.a[d][j] / t.a[d][j] - 1.0).abs() < 0.15,
                "{:?}",
                fit.params
            );
        }
    }
    let fitted = hawkes_neg_loglik(&fit.params, &seqs, 0.0).unwrap();
    let true_nll = hawkes_neg_loglik(&t, &seqs, 0.0).unwrap();
    assert!(fitted <= true_nll + 1e-3 * true_nll.abs());
}

#[test]
fn poisson_rollouts_have_exponential_gaps() {
    let p = MultiHawkes::new(vec![0.5, 1.5], vec![vec![0.0; 2]; 2], 1.0).unwrap();
    let n = 2000;
    let hist = EventSequence::empty(3.0);
    let (_, gap) = hawkes_predict_next(&p, &hist, 3.0, n, 1e3, 1).unwrap();
    // mean 1/2, standard error 1/(2√n)
    assert!((gap - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt(), "{gap}");
    let one = MultiHawkes::new(vec![1.0], vec![vec![0.3]], 1.0).unwrap();
    for seed in 0..5 {
        assert_eq!(
            hawkes_predict_next(&one, &hist, 3.0, 1, 1e3, seed)
                .unwrap()
                .0,
            0
        );
    }
    assert_eq!(
        hawkes_predict_next(&p, &hist, 3.0, 50, 1e3, 9).unwrap(),
        hawkes_predict_next(&p, &hist, 3.0, 50, 1e3, 9).unwrap()
    );
}
