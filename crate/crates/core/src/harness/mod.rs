//! Experiment plumbing: synthetic texture suites, per-fold training and
//! scoring, and report files.

mod config;
mod experiment;
mod pipeline;
mod report;
pub mod synth;

pub use config::ExperimentConfig;
pub use experiment::{assert_disjoint, evaluate_saved_models, fold_model_name, prepare_split, run_cv_experiment};
pub use pipeline::{build_training_set, derive_seed, evaluate_indices, train_on_indices, PatchDataset};
pub use report::{
    accuracy_csv, config_txt, confusion_csv, predictions_csv, table_csv, write_report, CvReport, ImageOutcome,
    ModelResult,
};
pub use synth::{synth_generate, ClassTexture, SynthSpec};
