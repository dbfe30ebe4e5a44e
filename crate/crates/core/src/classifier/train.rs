use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Metrics};
use super::{Labeled, Model, TrainSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub momentum: f64,
    pub seed: u64,
    pub init_scale: f64,
    pub embed_dim: usize,
    pub hidden_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 20,
            batch_size: 32,
            l2: 1e-5,
            momentum: 0.9,
            seed: 0,
            init_scale: 0.1,
            embed_dim: 64,
            hidden_dim: 64,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParameter("learning_rate must be > 0".into()));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidParameter("batch_size must be >= 1".into()));
        }
        if self.l2 < 0.0 || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParameter("l2 must be >= 0 and momentum in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Mean cross-entropy plus `l2 · ‖θ‖²` over `examples`, with its gradient.
/// Examples are reduced in slice order.
pub fn dataset_loss_gradients<M: Model>(
    model: &M,
    examples: &[Labeled<M::Input>],
    l2: f64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    loss_gradients(model, examples.iter(), l2)
}

fn loss_gradients<'a, M: Model>(
    model: &M,
    examples: impl ExactSizeIterator<Item = &'a Labeled<M::Input>>,
    l2: f64,
) -> Result<(f64, Vec<Vec<f64>>)>
where
    M::Input: 'a,
{
    let mut grads = model.zero_grads();
    let scale = 1.0 / examples.len() as f64;
    let mut loss = 0.0;
    for ex in examples {
        loss += scale * model.accumulate_loss_gradients(&ex.input, ex.label, scale, &mut grads)?;
    }
    if l2 > 0.0 {
        for (g, p) in grads.iter_mut().zip(model.params()) {
            for (gi, &pi) in g.iter_mut().zip(p) {
                *gi += 2.0 * l2 * pi;
                loss += l2 * pi * pi;
            }
        }
    }
    Ok((loss, grads))
}

pub fn dataset_loss<M: Model>(model: &M, examples: &[Labeled<M::Input>], l2: f64) -> Result<f64> {
    Ok(dataset_loss_gradients(model, examples, l2)?.0)
}

/// Mini-batch SGD with classical momentum on mean cross-entropy plus L2.
/// Batches follow a seeded per-epoch shuffle; the result is bitwise
/// reproducible for a fixed config.
pub fn train<M: Model>(mut model: M, data: &TrainSet<M::Input>, config: &TrainConfig) -> Result<(M, Metrics)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let classes: BTreeSet<usize> = data.iter().map(|e| e.label).collect();
    if classes.len() < 2 {
        return Err(Error::InvalidParameter("training data must contain at least two classes".into()));
    }

    let mut rng = crate::stage_rng(config.seed, crate::streams::SHUFFLE);
    let mut velocity = model.zero_grads();
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (batch_no, batch) in order.chunks(config.batch_size).enumerate() {
            let (loss, grads) = loss_gradients(&model, batch.iter().map(|&i| &data[i]), config.l2)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_no,
                    loss,
                });
            }
            for ((p, g), v) in model.params_mut().into_iter().zip(&grads).zip(&mut velocity) {
                for ((pi, &gi), vi) in p.iter_mut().zip(g).zip(v.iter_mut()) {
                    *vi = config.momentum * *vi + gi;
                    *pi -= config.learning_rate * *vi;
                }
            }
        }
        if model.params().iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Diverged {
                epoch,
                batch: usize::MAX,
                loss: f64::NAN,
            });
        }
    }
    let metrics = evaluate(&model, data)?;
    Ok((model, metrics))
}
