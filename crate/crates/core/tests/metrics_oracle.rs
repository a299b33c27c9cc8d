use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twinpp::metrics::{confusion, f1_plus, macro_prf, mae, mae_plus};

fn naive_f1(preds: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let mut tp = 0;
        let mut fp = 0;
        let mut fneg = 0;
        for i in 0..preds.len() {
            match (preds[i] == c, truth[i] == c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
        }
        let p = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let r = if tp + fneg == 0 {
            0.0
        } else {
            tp as f64 / (tp + fneg) as f64
        };
        total += if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        };
    }
    total / k as f64
}

#[test]
fn brute_force_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let k = rng.gen_range(2..8);
        let n = rng.gen_range(1..60);
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let preds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let tg: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let pg: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let cm = confusion(&preds, &truth, k, &[]).unwrap();
        for i in 0..k {
            for j in 0..k {
                let c = (0..n).filter(|&s| truth[s] == i && preds[s] == j).count() as u64;
                assert_eq!(cm.counts[i][j], c);
            }
        }
        assert_eq!(cm.total(), n as u64);
        let f1 = macro_prf(&cm).macro_f1;
        assert!((f1 - naive_f1(&preds, &truth, k)).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&f1));
        let all = f1_plus(&preds, &truth, &pg, &tg, k, f64::INFINITY).unwrap();
        assert_eq!(all.value, Some(f1));
        let keep: Vec<usize> = (0..n).filter(|&i| (pg[i] - tg[i]).abs() < 3.0).collect();
        let fp = f1_plus(&preds, &truth, &pg, &tg, k, 3.0).unwrap();
        assert_eq!(fp.count, keep.len());
        if !keep.is_empty() {
            let p: Vec<usize> = keep.iter().map(|&i| preds[i]).collect();
            let t: Vec<usize> = keep.iter().map(|&i| truth[i]).collect();
            assert!((fp.value.unwrap() - naive_f1(&p, &t, k)).abs() < 1e-12);
        }
        let m = mae(&pg, &tg).unwrap();
        let naive = (0..n).map(|i| (pg[i] - tg[i]).abs()).sum::<f64>() / n as f64;
        assert!((m - naive).abs() < 1e-12);
        let mp = mae_plus(&preds, &truth, &pg, &tg).unwrap();
        let right: Vec<usize> = (0..n).filter(|&i| preds[i] == truth[i]).collect();
        assert_eq!(mp.count, right.len());
        if let Some(v) = mp.value {
            let naive =
                right.iter().map(|&i| (pg[i] - tg[i]).abs()).sum::<f64>() / right.len() as f64;
            assert!((v - naive).abs() < 1e-12);
            let worst = right
                .iter()
                .map(|&i| (pg[i] - tg[i]).abs())
                .fold(0.0, f64::max);
            assert!(v <= worst + 1e-12);
        }
        let mae_same = mae_plus(&truth, &truth, &pg, &tg).unwrap();
        assert!((mae_same.value.unwrap() - m).abs() < 1e-12);
    }
}
