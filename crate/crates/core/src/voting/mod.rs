//! Image-level prediction from patch-level posteriors: per-patch
//! evaluation, majority voting, mean aggregation and the central-crop mode.

mod aggregate;
mod infer;
mod record;

pub use aggregate::{majority_vote, mean_aggregate, InferenceMode, Prediction, ProbabilityMatrix};
pub use infer::{evaluate_patches, infer_image, infer_with_model, patch_size, to_input};
pub use record::{write_records, PredictionRecord, RECORD_HEADER};
