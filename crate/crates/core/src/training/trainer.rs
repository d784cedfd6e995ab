use std::fmt;

use rand::seq::SliceRandom;

use super::loss::{cross_entropy_node, Regularization};
use super::optim::SgdMomentum;
use super::Hyperparams;
use crate::error::{Error, Result};
use crate::eval::accuracy;
use crate::math::Tensor;
use crate::model::{EmbeddedExample, Mode, Model, ModelConfig};
use crate::rng::{self, streams, Rng};

/// Loss and gradient of one mini-batch.
#[derive(Debug, Clone)]
pub struct BatchGradients {
    /// Mean cross-entropy plus the penalty, counted once.
    pub loss: f64,
    /// One tensor per parameter, in store order.
    pub grads: Vec<Tensor>,
}

/// Mean cross-entropy gradient over `batch` plus the L2 gradient `2λθ`.
/// Per-example gradients are reduced in batch order. Passing a dropout rate
/// and generator runs the forward passes in train mode.
pub fn batch_gradients(
    model: &Model,
    batch: &[&EmbeddedExample],
    reg: Regularization,
    mut dropout: Option<(f64, &mut Rng)>,
) -> Result<BatchGradients> {
    if batch.is_empty() {
        return Err(Error::Domain("gradient of an empty batch".into()));
    }
    let params = model.params();
    let mut grads: Vec<Tensor> = params.iter().map(|p| Tensor::zeros(p.value.shape())).collect();
    let scale = 1.0 / batch.len() as f64;
    let mut ce_total = 0.0;
    for ex in batch {
        let mode = match dropout.as_mut() {
            Some((rate, rng)) => Mode::Train { dropout: *rate, rng },
            None => Mode::Eval,
        };
        let mut pass = model.forward(ex, mode)?;
        let ce = cross_entropy_node(&mut pass.graph, pass.probs, pass.label)?;
        ce_total += pass.graph.value(ce).item();
        let g = pass.graph.backward(ce)?;
        for (id, acc) in params.ids().zip(grads.iter_mut()) {
            if let Some(gp) = g.get(pass.bound.var(id)) {
                acc.add_assign(&gp.scale(scale))?;
            }
        }
    }
    if reg.l2 != 0.0 {
        for (p, acc) in params.iter().zip(grads.iter_mut()) {
            if reg.covers(p.kind) {
                acc.add_assign(&p.value.scale(2.0 * reg.l2))?;
            }
        }
    }
    Ok(BatchGradients {
        loss: ce_total * scale + reg.penalty(params),
        grads,
    })
}

/// One line of the metrics log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub dev_acc: Option<f64>,
}

impl fmt::Display for EpochMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{:.6}\t{:.6}", self.epoch, self.train_loss, self.train_acc)?;
        if let Some(dev) = self.dev_acc {
            write!(f, "\t{dev:.6}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BestEpoch {
    pub epoch: usize,
    pub dev_acc: f64,
    pub model: Model,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters after the last epoch.
    pub model: Model,
    /// The epoch with the highest held-out accuracy, when a dev set was given.
    pub best: Option<BestEpoch>,
    pub log: Vec<EpochMetrics>,
}

impl TrainOutcome {
    pub fn metrics_log(&self) -> String {
        self.log.iter().map(|m| format!("{m}\n")).collect()
    }
}

/// Initializes a model from `hp.seed` and trains it.
pub fn train(
    train_set: &[EmbeddedExample],
    dev_set: Option<&[EmbeddedExample]>,
    config: ModelConfig,
    hp: &Hyperparams,
) -> Result<TrainOutcome> {
    let model = Model::new(config, &mut rng::stream(hp.seed, streams::INIT))?;
    train_model(model, train_set, dev_set, hp)
}

/// Trains an existing model. Examples are reshuffled every epoch; training
/// accuracy is measured in eval mode after each epoch.
pub fn train_model(
    mut model: Model,
    train_set: &[EmbeddedExample],
    dev_set: Option<&[EmbeddedExample]>,
    hp: &Hyperparams,
) -> Result<TrainOutcome> {
    hp.validate()?;
    if train_set.is_empty() {
        return Err(Error::Domain("training corpus is empty".into()));
    }
    let reg = hp.regularization();
    let mut rng = rng::stream(hp.seed, streams::TRAIN);
    let mut optimizer = SgdMomentum::new(model.params(), hp.learning_rate, hp.momentum);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut log = Vec::with_capacity(hp.max_epochs);
    let mut best: Option<BestEpoch> = None;

    for epoch in 1..=hp.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(hp.batch_size) {
            let batch: Vec<&EmbeddedExample> = chunk.iter().map(|&i| &train_set[i]).collect();
            let step = batch_gradients(&model, &batch, reg, Some((hp.dropout, &mut rng)))?;
            if !step.loss.is_finite() {
                return Err(Error::Domain(format!("non-finite training loss at epoch {epoch}")));
            }
            loss_sum += step.loss * batch.len() as f64;
            optimizer.step(model.params_mut(), &step.grads)?;
        }
        let train_acc = accuracy(&model, train_set)?;
        let dev_acc = dev_set.map(|d| accuracy(&model, d)).transpose()?;
        if let Some(acc) = dev_acc {
            if best.as_ref().is_none_or(|b| acc > b.dev_acc) {
                best = Some(BestEpoch {
                    epoch,
                    dev_acc: acc,
                    model: model.clone(),
                });
            }
        }
        log.push(EpochMetrics {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_acc,
            dev_acc,
        });
    }
    Ok(TrainOutcome { model, best, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentiment;
    use crate::model::Variant;

    fn tiny_set(seed: u64, n: usize) -> Vec<EmbeddedExample> {
        let mut rng = rng::seeded(seed);
        (0..n)
            .map(|i| EmbeddedExample {
                left: (0..2).map(|_| Tensor::uniform(&[4], 1.0, &mut rng)).collect(),
                target: vec![Tensor::uniform(&[4], 1.0, &mut rng)],
                right: (0..1).map(|_| Tensor::uniform(&[4], 1.0, &mut rng)).collect(),
                label: Sentiment::from_index(i % 3).unwrap(),
            })
            .collect()
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let cfg = ModelConfig::new(Variant::LcrRot, 4, 3);
        let hp = Hyperparams {
            max_epochs: 0,
            ..Hyperparams::default()
        };
        let out = train(&tiny_set(1, 5), None, cfg, &hp).unwrap();
        let init = Model::new(cfg, &mut rng::stream(hp.seed, streams::INIT)).unwrap();
        assert_eq!(out.model, init);
        assert!(out.log.is_empty());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let cfg = ModelConfig::new(Variant::LcrRot, 4, 3);
        assert!(matches!(train(&[], None, cfg, &Hyperparams::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn losses_finite_and_deterministic() {
        let cfg = ModelConfig::new(Variant::LcrRot, 4, 3);
        let hp = Hyperparams {
            max_epochs: 3,
            batch_size: 4,
            ..Hyperparams::default()
        };
        let data = tiny_set(2, 10);
        let dev = tiny_set(3, 4);
        let a = train(&data, Some(&dev), cfg, &hp).unwrap();
        let b = train(&data, Some(&dev), cfg, &hp).unwrap();
        assert!(a.log.iter().all(|m| m.train_loss.is_finite()));
        assert_eq!(a.log, b.log);
        assert_eq!(a.model, b.model);
        assert!(a.best.is_some());
        assert_eq!(a.metrics_log().lines().count(), 3);
        assert_eq!(a.metrics_log().lines().next().unwrap().split('\t').count(), 4);
    }

    #[test]
    fn metrics_line_format() {
        let m = EpochMetrics {
            epoch: 2,
            train_loss: 0.5,
            train_acc: 0.75,
            dev_acc: None,
        };
        assert_eq!(m.to_string(), "2\t0.500000\t0.750000");
    }
}
