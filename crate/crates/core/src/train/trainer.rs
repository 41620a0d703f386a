//! The mini-batch training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::curve::{EpochRecord, LearningCurve};
use super::loss::cross_entropy;
use crate::data::{one_hot, split, LabeledDataset};
use crate::error::{Error, Result};
use crate::nn::{Architecture, Network, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub test_fraction: f64,
    /// Rescale each averaged batch gradient to at most this L2 norm.
    pub max_grad_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            batch_size: 32,
            seed: 42,
            test_fraction: 0.25,
            max_grad_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.epochs < 1 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test fraction {} outside (0, 1)", self.test_fraction));
        }
        if self.batch_size < 1 {
            return bad("batch size must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("Adam epsilon must be positive".into());
        }
        if let Some(n) = self.max_grad_norm {
            if n.is_nan() || n <= 0.0 {
                return bad(format!("gradient norm limit {n} must be positive"));
            }
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Index of the largest entry; the first one wins ties.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

struct Prepared<T> {
    windows: Vec<Vec<T>>,
    targets: Vec<Vec<T>>,
    labels: Vec<usize>,
}

fn prepare<T: Scalar>(data: &LabeledDataset, num_classes: usize) -> Result<Prepared<T>> {
    let mut windows = Vec::with_capacity(data.len());
    let mut targets = Vec::with_capacity(data.len());
    let mut labels = Vec::with_capacity(data.len());
    for s in data.samples() {
        windows.push(s.sequence.values().iter().map(|&v| T::from(v).unwrap()).collect());
        targets.push(
            one_hot(s.label.index(), num_classes)?
                .into_iter()
                .map(|v| T::from(v).unwrap())
                .collect(),
        );
        labels.push(s.label.index());
    }
    Ok(Prepared {
        windows,
        targets,
        labels,
    })
}

fn check_shape<T: Scalar>(net: &Network<T>, data: &LabeledDataset) -> Result<()> {
    match data.shape() {
        Some(shape) if shape != (net.seq_len(), net.input_dim()) => Err(Error::Shape(format!(
            "dataset sequences are {}x{}, network expects {}x{}",
            shape.0,
            shape.1,
            net.seq_len(),
            net.input_dim()
        ))),
        _ => Ok(()),
    }
}

/// Mean loss and accuracy of `net` over a prepared set.
fn evaluate<T: Scalar>(net: &Network<T>, data: &Prepared<T>) -> Result<(f64, f64)> {
    let results: Vec<(f64, bool)> = (0..data.windows.len())
        .into_par_iter()
        .map(|i| {
            let probs = net.forward(&data.windows[i])?;
            let loss = cross_entropy(&probs, &data.targets[i])?;
            Ok((loss.to_f64().unwrap_or(f64::NAN), argmax(&probs) == data.labels[i]))
        })
        .collect::<Result<_>>()?;
    let n = results.len().max(1) as f64;
    let loss = results.iter().map(|r| r.0).sum::<f64>() / n;
    let acc = results.iter().filter(|r| r.1).count() as f64 / n;
    Ok((loss, acc))
}

/// Trains an existing network on `train`, optionally scoring `validation`
/// after every epoch.
///
/// Each epoch shuffles the training order with a generator seeded from
/// `config.seed`, then applies one Adam update per mini-batch using the mean
/// gradient of the batch. Per-sample gradients may be computed in parallel;
/// they are summed in batch order so results do not depend on scheduling.
/// Training loss and accuracy are those seen during the epoch's forward passes.
pub fn train_network<T: Scalar>(
    mut net: Network<T>,
    train: &LabeledDataset,
    validation: Option<&LabeledDataset>,
    config: &TrainConfig,
) -> Result<(Network<T>, LearningCurve)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::InsufficientData("training set is empty".into()));
    }
    check_shape(&net, train)?;
    let num_classes = net.num_classes();
    let train_set = prepare::<T>(train, num_classes)?;
    let val_set = match validation {
        Some(v) if !v.is_empty() => {
            check_shape(&net, v)?;
            Some(prepare::<T>(v, num_classes)?)
        }
        _ => None,
    };

    let adam = config.adam();
    let mut state = AdamState::new(&net);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x7261_696e_5f73_6866);
    let mut order: Vec<usize> = (0..train_set.windows.len()).collect();
    let mut curve = LearningCurve::default();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            let per_sample: Vec<_> = batch
                .par_iter()
                .map(|&i| net.loss_and_gradients(&train_set.windows[i], &train_set.targets[i]))
                .collect::<Result<_>>()?;
            let mut grads = net.zeros_like();
            for (&i, (loss, probs, g)) in batch.iter().zip(&per_sample) {
                loss_sum += loss.to_f64().unwrap_or(f64::NAN);
                if argmax(probs) == train_set.labels[i] {
                    correct += 1;
                }
                grads.accumulate(g);
            }
            drop(per_sample);
            grads.scale(T::one() / T::from(batch.len()).unwrap());
            if let Some(limit) = config.max_grad_norm {
                let norm = grads.l2_norm();
                if norm > limit {
                    grads.scale(T::lit(limit / norm));
                }
            }
            adam_step(&mut net, &grads, &mut state, &adam)?;
        }
        let n = train_set.windows.len() as f64;
        let train_loss = loss_sum / n;
        if !train_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                loss: train_loss,
            });
        }
        let (val_loss, val_accuracy) = match &val_set {
            Some(v) => {
                let (l, a) = evaluate(&net, v)?;
                (Some(l), Some(a))
            }
            None => (None, None),
        };
        let record = EpochRecord {
            epoch,
            train_loss,
            train_accuracy: correct as f64 / n,
            val_loss,
            val_accuracy,
        };
        log::debug!("{record:?}");
        if epoch % 10 == 0 || epoch == config.epochs {
            log::info!(
                "epoch {epoch}/{}: loss {:.5} acc {:.4} val_loss {} val_acc {}",
                config.epochs,
                record.train_loss,
                record.train_accuracy,
                val_loss.map_or("-".into(), |v| format!("{v:.5}")),
                val_accuracy.map_or("-".into(), |v| format!("{v:.4}")),
            );
        }
        curve.records.push(record);
    }
    Ok((net, curve))
}

/// Splits `dataset` with `config.test_fraction`/`config.seed`, initializes the
/// canonical network from `config.seed` and trains it, validating on the
/// held-out partition.
pub fn train(dataset: &LabeledDataset, config: &TrainConfig) -> Result<(Network<f32>, LearningCurve)> {
    config.validate()?;
    let (train_set, test_set) = split(dataset, config.test_fraction, config.seed)?;
    let net = Network::glorot(&Architecture::canonical(), config.seed)?;
    train_network(net, &train_set, Some(&test_set), config)
}
