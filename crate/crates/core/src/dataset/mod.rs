//! Manifests, stratified cross-validation folds, proportional subsampling
//! and class statistics. Folds are assigned to whole images, never patches.

mod folds;
mod manifest;
mod stats;

pub use folds::{
    folds_to_string, load_folds, parse_folds, stratified_kfold, write_folds, FoldAssignment, FOLD_HEADER,
};
pub use manifest::{
    load_manifest, manifest_to_string, parse_manifest, write_manifest, DatasetManifest, SampleRecord,
    MANIFEST_HEADER,
};
pub use stats::{
    class_histogram, reference_manifest, subsample_counts, subsample_fraction, ClassHistogram,
    REFERENCE_CLASS_COUNTS,
};
