//! The built-in patch classifier: a small CNN, its trainer, the binary
//! weight format and the [`Classifier`] contract shared with external models.

mod checkpoint;
mod classifier;
mod cnn;
mod real;
mod train;

pub use checkpoint::{Checkpoint, Layer};
pub use classifier::{ensure_labels, Classifier, ExternalClassifier, ProbabilityVector, TrainedModel};
pub use cnn::{raster_to_tensor, Architecture, SmallCnn, TensorSpec, DEFAULT_WIDTHS, MIN_INPUT_SIZE};
pub use real::Real;
pub use train::{accuracy, gradient, total_loss, train, TensorSet, TrainConfig, TrainLog, TrainingSet};

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
