use std::borrow::Cow;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::cnn::{SmallCnn, Trace};
use super::real::Real;
use crate::error::{Error, Result};
use crate::rng::Streams;

/// Samples per gradient work unit. Fixed so the summation order, and with it
/// the trained weights, does not depend on the thread count.
const CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument(format!(
                "momentum {} outside [0, 1)",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Source of labelled network inputs. `epoch` lets a set re-draw random
/// augmentations every pass; sets that do not augment ignore it.
pub trait TrainingSet<T: Real>: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Input tensor (channel-major, unit interval) and class index of sample `index`.
    fn sample(&self, index: usize, epoch: usize) -> Result<(Cow<'_, [T]>, usize)>;
}

/// In-memory set of ready-made input tensors.
#[derive(Clone, Debug, Default)]
pub struct TensorSet<T> {
    pub inputs: Vec<Vec<T>>,
    pub labels: Vec<usize>,
}

impl<T: Real> TrainingSet<T> for TensorSet<T> {
    fn len(&self) -> usize {
        self.inputs.len()
    }

    fn sample(&self, index: usize, _epoch: usize) -> Result<(Cow<'_, [T]>, usize)> {
        Ok((Cow::Borrowed(&self.inputs[index]), self.labels[index]))
    }
}

/// Mean training loss of every epoch, in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epoch_losses: Vec<f64>,
}

/// Mini-batch SGD with heavy-ball momentum on the mean cross-entropy.
/// Sample order is reshuffled every epoch from the seed.
pub fn train<T: Real>(
    net: &mut SmallCnn<T>,
    data: &impl TrainingSet<T>,
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset("no training samples".into()));
    }
    let classes = net.architecture().num_classes;
    let n = data.len();
    let shuffle = Streams::new(cfg.seed, "shuffle");
    let mut velocity = vec![T::zero(); net.parameter_count()];
    let lr = T::lit(cfg.learning_rate);
    let mu = T::lit(cfg.momentum);
    let mut log = TrainLog::default();

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut shuffle.stream(epoch as u64));
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (grads, loss) = batch_gradient(net, data, batch, epoch, classes)?;
            loss_sum += loss;
            let scale = T::lit(1.0 / batch.len() as f64);
            for ((w, v), g) in net.params_mut().iter_mut().zip(&mut velocity).zip(&grads) {
                *v = mu * *v + *g * scale;
                *w = *w - lr * *v;
            }
        }
        let mean = loss_sum / n as f64;
        if !mean.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "training diverged at epoch {}",
                epoch + 1
            )));
        }
        log.epoch_losses.push(mean);
    }
    Ok(log)
}

/// Summed gradient and summed loss over `indices`.
fn batch_gradient<T: Real>(
    net: &SmallCnn<T>,
    data: &impl TrainingSet<T>,
    indices: &[usize],
    epoch: usize,
    classes: usize,
) -> Result<(Vec<T>, f64)> {
    let partials: Vec<Result<(Vec<T>, f64)>> = indices
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grads = vec![T::zero(); net.parameter_count()];
            let mut trace = Trace::new(net.architecture());
            let mut loss = 0.0;
            for &i in chunk {
                let (input, label) = data.sample(i, epoch)?;
                if label >= classes {
                    return Err(Error::ClassOutOfRange {
                        index: label,
                        num_classes: classes,
                    });
                }
                let probs = net.forward_traced(&input, &mut trace);
                loss -= probs[label].max(f64::MIN_POSITIVE).ln();
                net.backward(&mut trace, &probs, label, &mut grads);
            }
            Ok((grads, loss))
        })
        .collect();

    let mut total = vec![T::zero(); net.parameter_count()];
    let mut loss = 0.0;
    for part in partials {
        let (g, l) = part?;
        for (t, v) in total.iter_mut().zip(&g) {
            *t = *t + *v;
        }
        loss += l;
    }
    Ok((total, loss))
}

/// Summed cross-entropy gradient over the whole set, without updating weights.
pub fn gradient<T: Real>(net: &SmallCnn<T>, data: &impl TrainingSet<T>) -> Result<Vec<T>> {
    let indices: Vec<usize> = (0..data.len()).collect();
    Ok(batch_gradient(net, data, &indices, 0, net.architecture().num_classes)?.0)
}

/// Summed cross-entropy over the whole set.
pub fn total_loss<T: Real>(net: &SmallCnn<T>, data: &impl TrainingSet<T>) -> Result<f64> {
    let mut loss = 0.0;
    for i in 0..data.len() {
        let (input, label) = data.sample(i, 0)?;
        loss += net.loss(&input, label);
    }
    Ok(loss)
}

/// Fraction of samples whose arg-max class equals the label.
pub fn accuracy<T: Real>(net: &SmallCnn<T>, data: &impl TrainingSet<T>) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("no samples to score".into()));
    }
    let hits: Result<Vec<bool>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let (input, label) = data.sample(i, 0)?;
            Ok(super::argmax(&net.forward(&input)) == label)
        })
        .collect();
    Ok(hits?.into_iter().filter(|&h| h).count() as f64 / data.len() as f64)
}
