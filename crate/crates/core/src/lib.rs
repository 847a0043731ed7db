//! Patch-grid training and majority-vote inference for classifying
//! high-resolution images whose classes differ only in fine texture.
//!
//! The pipeline tiles each image into a fixed grid, trains a small CNN on
//! the (optionally augmented) patches, and at inference time lets every
//! patch vote for a class.
//!
//! Runnable walkthroughs of each stage live in `examples/`:
//!
//! ```bash
//! cargo run --release --example tiling
//! cargo run --release --example patch_voting
//! ```

pub mod augment;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod imagery;
pub mod model;
pub mod rng;
pub mod voting;

pub use error::{Error, Result};
