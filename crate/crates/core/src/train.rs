//! Stochastic training with per-parameter AdaGrad step sizes.
//!
//! Each parameter `θᵢ` moves by `gᵢ / sqrt(ε + Σ gᵢ²)`, where the sum runs
//! over every gradient the parameter has received so far (the base learning
//! rate is 1).

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{Gradients, Model};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Parameters start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub epsilon: f64,
    /// 1 is plain per-example SGD.
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 128,
            epochs: 50,
            seed: 0,
            init_scale: 0.1,
            epsilon: 1e-8,
            batch_size: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaGrad {
    accum: Gradients,
    epsilon: f64,
}

impl AdaGrad {
    pub fn new(model: &Model, epsilon: f64) -> Self {
        AdaGrad {
            accum: Gradients::zeros_like(model),
            epsilon,
        }
    }

    /// Accumulated squared gradients, parameter-shaped.
    pub fn accumulators(&self) -> &Gradients {
        &self.accum
    }

    /// Current step-size multiplier for each parameter.
    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.accum.iter().map(|a| 1.0 / (self.epsilon + a).sqrt())
    }

    pub fn step(&mut self, model: &mut Model, grads: &Gradients) {
        let eps = self.epsilon;
        let update = |params: &mut [f64], acc: &mut [f64], g: &[f64]| {
            for ((p, a), &g) in params.iter_mut().zip(acc.iter_mut()).zip(g) {
                if g != 0.0 {
                    *a += g * g;
                    *p -= g / (eps + *a).sqrt();
                }
            }
        };
        update(
            &mut model.hidden_weights,
            &mut self.accum.hidden_weights,
            &grads.hidden_weights,
        );
        update(
            &mut model.hidden_bias,
            &mut self.accum.hidden_bias,
            &grads.hidden_bias,
        );
        update(
            &mut model.output_weights,
            &mut self.accum.output_weights,
            &grads.output_weights,
        );
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    /// Mean pre-update hinge loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Trains a fresh model. Deterministic for a fixed dataset order, config and
/// seed.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<Trained> {
    if ds.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::invalid("epochs and batch size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = Model::random(cfg.hidden, ds.window(), ds.dim(), cfg.init_scale, &mut rng)?;
    let mut opt = AdaGrad::new(&model, cfg.epsilon);
    let mut grads = Gradients::zeros_like(&model);
    let mut act = vec![0.0; cfg.hidden];
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let examples = ds.examples();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            let weight = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += model.accumulate_gradient(&examples[i], weight, &mut act, &mut grads);
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFinite {
                    epoch: epoch + 1,
                    step: step + 1,
                });
            }
            total += batch_loss;
            if batch_loss > 0.0 {
                opt.step(&mut model, &grads);
                grads.clear();
            }
        }
        let mean = total / ds.len() as f64;
        info!("epoch {:>3}: hinge loss {mean:.6}", epoch + 1);
        epoch_losses.push(mean);
    }
    Ok(Trained {
        model,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::WindowExample;
    use crate::model::{gradients, hinge_loss};
    use crate::tag::Tag;

    fn separable() -> Dataset {
        // two tags, separated along the first feature
        let mut ex = Vec::new();
        for i in 0..20 {
            let v = 0.2 + i as f64 * 0.05;
            ex.push(WindowExample {
                features: vec![v, 0.1 * (i % 3) as f64],
                tag: Tag::Person,
            });
            ex.push(WindowExample {
                features: vec![-v, 0.1 * (i % 4) as f64],
                tag: Tag::NonEntity,
            });
        }
        Dataset::new(ex, 0, 2).unwrap()
    }

    #[test]
    fn default_epochs() {
        assert_eq!(TrainConfig::default().epochs, 50);
        assert_eq!(TrainConfig::default().epsilon, 1e-8);
    }

    #[test]
    fn first_step_is_unit_size() {
        let mut m = Model::zeros(2, 0, 1).unwrap();
        m.output_weights[Tag::NonEntity.index() * 2] = 0.3;
        m.hidden_weights = vec![0.5, -0.4];
        let before = m.clone();
        let ex = WindowExample {
            features: vec![1.0],
            tag: Tag::Person,
        };
        let g = gradients(&m, &ex).unwrap();
        let mut opt = AdaGrad::new(&m, 1e-8);
        opt.step(&mut m, &g);
        for ((p0, p1), g) in before.params().zip(m.params()).zip(g.iter()) {
            if g != 0.0 {
                let step = (p0 - p1).abs();
                let expect = g.abs() / (1e-8 + g * g).sqrt();
                assert!((step - expect).abs() < 1e-12);
                assert!((step - 1.0).abs() < 1e-6, "step {step} for gradient {g}");
            } else {
                assert_eq!(p0, p1);
            }
        }
    }

    #[test]
    fn accumulators_monotone_rates_nonincreasing() {
        let ds = separable();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut m = Model::random(3, 0, 2, 0.1, &mut rng).unwrap();
        let mut opt = AdaGrad::new(&m, 1e-8);
        let mut prev_acc: Vec<f64> = opt.accumulators().iter().collect();
        let mut prev_rate: Vec<f64> = opt.rates().collect();
        for ex in ds.examples() {
            let g = gradients(&m, ex).unwrap();
            opt.step(&mut m, &g);
            let acc: Vec<f64> = opt.accumulators().iter().collect();
            let rate: Vec<f64> = opt.rates().collect();
            for i in 0..acc.len() {
                assert!(acc[i] >= prev_acc[i] && acc[i] >= 0.0);
                assert!(rate[i] <= prev_rate[i]);
            }
            prev_acc = acc;
            prev_rate = rate;
        }
    }

    #[test]
    fn separable_set_reaches_zero_loss() {
        let ds = separable();
        let cfg = TrainConfig {
            hidden: 4,
            epochs: 50,
            seed: 11,
            ..TrainConfig::default()
        };
        let trained = train(&ds, &cfg).unwrap();
        assert_eq!(trained.epoch_losses.len(), 50);
        assert_eq!(hinge_loss(&trained.model, ds.examples()).unwrap(), 0.0);
        assert!(trained.epoch_losses[49] <= trained.epoch_losses[0]);
    }

    #[test]
    fn minibatch_option() {
        let ds = separable();
        let cfg = TrainConfig {
            hidden: 4,
            epochs: 50,
            seed: 11,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let trained = train(&ds, &cfg).unwrap();
        assert!(hinge_loss(&trained.model, ds.examples()).unwrap() < 0.05);
    }

    #[test]
    fn deterministic() {
        let ds = separable();
        let cfg = TrainConfig {
            hidden: 3,
            epochs: 5,
            seed: 3,
            ..TrainConfig::default()
        };
        let a = train(&ds, &cfg).unwrap().model;
        let b = train(&ds, &cfg).unwrap().model;
        assert_eq!(a.to_text(), b.to_text());
        let c = train(&ds, &TrainConfig { seed: 4, ..cfg }).unwrap().model;
        assert_ne!(a, c);
    }

    #[test]
    fn non_finite_aborts() {
        let ds = Dataset::new(
            vec![WindowExample {
                features: vec![f64::NAN],
                tag: Tag::Person,
            }],
            0,
            1,
        )
        .unwrap();
        let err = train(
            &ds,
            &TrainConfig {
                hidden: 2,
                ..TrainConfig::default()
            },
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::NonFinite { epoch: 1, step: 1 }),
            "{err}"
        );
    }

    #[test]
    fn rejects_bad_config() {
        let ds = separable();
        assert!(train(
            &ds,
            &TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            }
        )
        .is_err());
        let empty = Dataset::new(vec![], 0, 2).unwrap();
        assert!(train(&empty, &TrainConfig::default()).is_err());
    }
}
