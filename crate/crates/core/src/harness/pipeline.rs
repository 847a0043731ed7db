use std::borrow::Cow;

use rand::RngCore;
use rayon::prelude::*;

use crate::augment::{tang_apply, tdli_expand, vl_protocol, AugmentProtocol, TangDraw, TangParams, VlParams};
use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};
use crate::imagery::{decode_image, rescale, resize, tile_grid, GridSpec, Raster};
use crate::model::{raster_to_tensor, Architecture, SmallCnn, TrainConfig, TrainedModel, TrainingSet};
use crate::rng::Streams;
use crate::voting::{infer_with_model, InferenceMode, Prediction};

/// Whole images fed to the rotating protocol are first reduced so their
/// longer side is at most this many times the network input.
const TANG_WORKING_SCALE: usize = 4;

/// Training samples of one fold with the manifest record each one came from.
pub struct PatchDataset {
    images: Vec<Raster>,
    labels: Vec<usize>,
    sources: Vec<usize>,
    input_size: usize,
    /// Set for the protocol that re-draws its augmentation every epoch.
    tang: Option<(Streams, Vec<String>)>,
}

impl PatchDataset {
    /// Manifest record index behind every sample, in sample order.
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The stored rasters: network-sized samples, or working-size whole images
    /// for the per-epoch protocol.
    pub fn images(&self) -> &[Raster] {
        &self.images
    }
}

impl TrainingSet<f32> for PatchDataset {
    fn len(&self) -> usize {
        self.images.len()
    }

    fn sample(&self, index: usize, epoch: usize) -> Result<(Cow<'_, [f32]>, usize)> {
        let label = self.labels[index];
        match &self.tang {
            None => Ok((Cow::Owned(raster_to_tensor(&self.images[index])), label)),
            Some((streams, paths)) => {
                let draw = TangDraw::sample(&mut streams.child(&paths[index]).stream(epoch as u64));
                let params = TangParams { output: self.input_size };
                let img = tang_apply(&self.images[index], &draw, &params)?;
                Ok((Cow::Owned(raster_to_tensor(&img)), label))
            }
        }
    }
}

/// Decodes the selected images and turns them into training samples:
/// grid patches (plain or quarter-turn expanded) for the patch protocols,
/// whole-image augmentations for the baselines. Every sample is finally
/// resized to `input_size` squared.
pub fn build_training_set(
    m: &DatasetManifest,
    indices: &[usize],
    protocol: AugmentProtocol,
    grid: GridSpec,
    input_size: usize,
    seed: u64,
) -> Result<PatchDataset> {
    if protocol.is_whole_image() && grid != GridSpec::single() {
        return Err(Error::Config(format!("{protocol} needs grid 1x1, got {grid}")));
    }
    let streams = Streams::new(seed, protocol.name());
    let per_image: Vec<Vec<Raster>> = indices
        .par_iter()
        .map(|&i| {
            let img = decode_image(m.image_path(i))?;
            let key = &m.records()[i].path;
            let samples = match protocol {
                AugmentProtocol::None => tile_grid(&img, grid)?.into_patches(),
                AugmentProtocol::Tdli => tdli_expand(tile_grid(&img, grid)?.patches(), &streams.child(key)),
                AugmentProtocol::VerlyLopes(p) => {
                    let params = VlParams {
                        crop: img.width().min(img.height()),
                        output: input_size,
                        ..p
                    };
                    return vl_protocol(&img, &streams.child(key), &params);
                }
                AugmentProtocol::Tang(_) => {
                    let longest = img.width().max(img.height());
                    let limit = TANG_WORKING_SCALE * input_size;
                    let base = if longest > limit { rescale(&img, limit as f64 / longest as f64)? } else { img };
                    return Ok(vec![base]);
                }
            };
            samples.iter().map(|p| resize(p, input_size, input_size)).collect()
        })
        .collect::<Result<_>>()?;

    let classes = m.class_indices();
    let mut set = PatchDataset {
        images: Vec::new(),
        labels: Vec::new(),
        sources: Vec::new(),
        input_size,
        tang: None,
    };
    for (&i, samples) in indices.iter().zip(per_image) {
        set.labels.extend(std::iter::repeat_n(classes[i], samples.len()));
        set.sources.extend(std::iter::repeat_n(i, samples.len()));
        set.images.extend(samples);
    }
    if matches!(protocol, AugmentProtocol::Tang(_)) {
        let paths = set.sources.iter().map(|&i| m.records()[i].path.clone()).collect();
        set.tang = Some((streams, paths));
    }
    Ok(set)
}

/// Per-fold seed for a named purpose.
pub fn derive_seed(seed: u64, purpose: &str, fold: usize) -> u64 {
    Streams::new(seed, purpose).stream(fold as u64).next_u64()
}

/// Trains a network on `train_indices`. Also returns the training set's
/// provenance so callers can prove no held-out image contributed.
#[allow(clippy::too_many_arguments)]
pub fn train_on_indices(
    m: &DatasetManifest,
    train_indices: &[usize],
    protocol: AugmentProtocol,
    grid: GridSpec,
    input_size: usize,
    train: &TrainConfig,
    seed: u64,
    fold: usize,
) -> Result<(TrainedModel, Vec<usize>)> {
    let data = build_training_set(m, train_indices, protocol, grid, input_size, derive_seed(seed, "augment", fold))?;
    let arch = Architecture::new(m.num_classes(), input_size)?;
    let mut cnn = SmallCnn::init(arch, derive_seed(seed, "init", fold));
    let cfg = TrainConfig {
        seed: derive_seed(seed, "train", fold),
        ..*train
    };
    crate::model::train(&mut cnn, &data, &cfg)?;
    let model = TrainedModel::new(m.labels().to_vec(), grid, protocol, cnn)?;
    Ok((model, data.sources))
}

/// Predictions for every selected image under every mode: `out[mode][image]`.
pub fn evaluate_indices(
    model: &TrainedModel,
    m: &DatasetManifest,
    indices: &[usize],
    modes: &[InferenceMode],
) -> Result<Vec<Vec<Prediction>>> {
    let per_image: Vec<Vec<Prediction>> = indices
        .par_iter()
        .map(|&i| {
            let img = decode_image(m.image_path(i))?;
            modes.iter().map(|&mode| infer_with_model(model, &img, model.grid, mode)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..modes.len())
        .map(|k| per_image.iter().map(|p| p[k].clone()).collect())
        .collect())
}
