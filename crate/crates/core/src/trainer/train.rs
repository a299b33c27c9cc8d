use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rmsprop_step, OptimizerState, TrainConfig};
use crate::error::{invalid, Error, Result};
use crate::model::{ClassWeights, ModelConfig, Sample, TwinRnn};
use crate::numcore::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T: Real = f64> {
    /// Parameters at the lowest validation loss.
    pub model: TwinRnn<T>,
    /// Row 0 is the untrained network.
    pub curve: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Mean loss over `samples`. Per-sample terms are summed in input order, so
/// the result does not depend on the worker count.
pub fn evaluate_loss<T: Real>(
    model: &TwinRnn<T>,
    samples: &[Sample],
    w: &ClassWeights,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("evaluate_loss"));
    }
    let losses: Vec<f64> = samples
        .par_iter()
        .map(|s| model.sample_loss(s, w))
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / samples.len() as f64)
}

fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Trains a fresh network. Deterministic given `train_cfg.rng_seed`; batch
/// gradients are reduced in sample order, so the thread count does not change
/// the result.
pub fn train<T: Real>(
    train_set: &[Sample],
    val_set: &[Sample],
    weights: &ClassWeights,
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    train_cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(invalid("training and validation sets must be non-empty"));
    }
    let mut model = TwinRnn::<T>::new(model_cfg.clone(), train_cfg.rng_seed)?;
    let mut opt = OptimizerState::new(model.params());

    let check = |epoch: usize, loss: f64| {
        if loss.is_finite() {
            Ok(loss)
        } else {
            Err(Error::Diverged { epoch, loss })
        }
    };
    let train0 = check(0, evaluate_loss(&model, train_set, weights)?)?;
    let val0 = check(0, evaluate_loss(&model, val_set, weights)?)?;
    let mut curve = vec![EpochRecord {
        epoch: 0,
        train_loss: train0,
        val_loss: val0,
    }];
    let mut best = (val0, 0usize, model.clone());
    let mut since_best = 0usize;

    for epoch in 1..=train_cfg.max_epochs {
        let order = epoch_order(train_set.len(), train_cfg.rng_seed, epoch);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(train_cfg.batch_size) {
            let per_sample: Vec<_> = batch
                .par_iter()
                .map(|&k| {
                    let mut g = model.params().zeros_like();
                    let terms = model.backward(&train_set[k], weights, &mut g)?;
                    Ok((terms.total(), g))
                })
                .collect::<Result<_>>()?;
            let mut sum = model.params().zeros_like();
            for (loss, g) in &per_sample {
                epoch_loss += loss;
                sum.add_assign(g)?;
            }
            let params = model.params_mut();
            params.accumulate(&sum, T::one() / T::of(batch.len() as f64))?;
            params.clip_grad_norm(T::of(train_cfg.grad_clip_norm));
            rmsprop_step(params, &mut opt, train_cfg).map_err(|_| Error::Diverged {
                epoch,
                loss: f64::NAN,
            })?;
        }
        let train_loss = check(epoch, epoch_loss / train_set.len() as f64)?;
        let val_loss = check(epoch, evaluate_loss(&model, val_set, weights)?)?;
        log::info!("epoch {epoch}: train {train_loss:.5} val {val_loss:.5}");
        curve.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        if val_loss < best.0 {
            best = (val_loss, epoch, model.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > train_cfg.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model: best.2,
        curve,
        best_epoch: best.1,
    })
}

/// `epoch,train_loss,val_loss` rows.
pub fn write_loss_curve(mut out: impl Write, curve: &[EpochRecord]) -> Result<()> {
    writeln!(out, "epoch,train_loss,val_loss")?;
    for r in curve {
        writeln!(out, "{},{},{}", r.epoch, r.train_loss, r.val_loss)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EventStep, HeadMode, Peephole, Streams};
    use rand::Rng;

    fn cfg() -> ModelConfig {
        ModelConfig {
            hidden_dim: 6,
            embed_dim: 4,
            head_mode: HeadMode::Hierarchical,
            streams: Streams::Both,
            peephole: Peephole::Diagonal,
            k_main: 2,
            k_sub: 3,
            ts_feature_dim: 2,
            event_feature_dim: None,
            sigma2: 10.0,
        }
    }

    /// Next subtype is the successor of the last one; gap depends on it.
    fn toy(n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let last = rng.gen_range(0..3);
                let next = (last + 1) % 3;
                Sample {
                    ts_window: (0..3)
                        .map(|_| vec![rng.gen_range(-1.0..1.0), 0.5])
                        .collect(),
                    event_window: (0..4)
                        .map(|k| EventStep {
                            sub_type: Some(if k == 3 { last } else { rng.gen_range(0..3) }),
                            dt: rng.gen_range(0.0..2.0),
                        })
                        .collect(),
                    target_main: usize::from(next > 0),
                    target_sub: next,
                    target_gap: 1.0 + 2.0 * next as f64,
                }
            })
            .collect()
    }

    fn tc(epochs: usize, patience: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 16,
            max_epochs: epochs,
            patience,
            rng_seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn learns_a_deterministic_toy_task() {
        let (tr, va) = (toy(200, 1), toy(60, 2));
        let w = ClassWeights::uniform(2, 3);
        let out = train::<f64>(&tr, &va, &w, &cfg(), &tc(30, 30)).unwrap();
        let first = out.curve[0].train_loss;
        let last = out.curve.last().unwrap().train_loss;
        assert!(last < 0.7 * first, "{first} -> {last}");
        let best = out.curve[out.best_epoch].val_loss;
        assert!(out.curve.iter().all(|r| r.val_loss >= best));
        assert_eq!(evaluate_loss(&out.model, &va, &w).unwrap(), best);
    }

    #[test]
    fn same_seed_same_curve() {
        let (tr, va) = (toy(64, 1), toy(16, 2));
        let w = ClassWeights::uniform(2, 3);
        let a = train::<f64>(&tr, &va, &w, &cfg(), &tc(3, 5)).unwrap();
        let b = train::<f64>(&tr, &va, &w, &cfg(), &tc(3, 5)).unwrap();
        let bits = |o: &TrainOutcome<f64>| {
            o.curve
                .iter()
                .map(|r| (r.train_loss.to_bits(), r.val_loss.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let c = pool.install(|| train::<f64>(&tr, &va, &w, &cfg(), &tc(3, 5)).unwrap());
        assert_eq!(bits(&a), bits(&c));
    }

    #[test]
    fn patience_zero_stops_after_first_non_improving_epoch() {
        let (tr, va) = (toy(64, 1), toy(16, 2));
        let w = ClassWeights::uniform(2, 3);
        // a huge learning rate makes validation loss bounce
        let mut t = tc(40, 0);
        t.learning_rate = 0.5;
        let out = train::<f64>(&tr, &va, &w, &cfg(), &t).unwrap();
        let n = out.curve.len();
        assert!(n < 41);
        let last = out.curve[n - 1].val_loss;
        let prev_best = out.curve[..n - 1]
            .iter()
            .map(|r| r.val_loss)
            .fold(f64::INFINITY, f64::min);
        assert!(last >= prev_best);
        assert!(
            out.curve[1..n - 1]
                .windows(2)
                .all(|w| w[1].val_loss < w[0].val_loss)
                || n <= 2
        );
    }

    #[test]
    fn shuffle_is_a_pure_function_of_seed_and_epoch() {
        assert_eq!(epoch_order(50, 9, 4), epoch_order(50, 9, 4));
        assert_ne!(epoch_order(50, 9, 4), epoch_order(50, 9, 5));
        let mut o = epoch_order(50, 9, 4);
        o.sort();
        assert_eq!(o, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn curve_csv_layout() {
        let mut buf = Vec::new();
        let curve = [EpochRecord {
            epoch: 0,
            train_loss: 1.5,
            val_loss: 2.0,
        }];
        write_loss_curve(&mut buf, &curve).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,train_loss,val_loss\n0,1.5,2\n"
        );
    }
}
