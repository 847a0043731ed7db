use rayon::prelude::*;

use super::aggregate::{majority_vote, mean_aggregate, InferenceMode, Prediction, ProbabilityMatrix};
use crate::error::{Error, Result};
use crate::imagery::{central_crop, resize, tile_grid, GridSpec, PatchSet, Raster};
use crate::model::{Classifier, ProbabilityVector, TrainedModel};

/// Brings a patch to the classifier's square input size (no-op when it already is).
pub fn to_input(patch: &Raster, size: usize) -> Result<Raster> {
    resize(patch, size, size)
}

/// Runs the classifier on every patch in parallel. Entry order follows the
/// grid, whatever order the workers finish in.
pub fn evaluate_patches(m: &dyn Classifier, ps: &PatchSet) -> Result<ProbabilityMatrix> {
    let size = m.input_size();
    let entries = ps
        .patches()
        .par_iter()
        .map(|p| m.predict_proba(&to_input(p, size)?))
        .collect::<Result<Vec<_>>>()?;
    ProbabilityMatrix::new(ps.grid(), entries)
}

/// Size of one grid cell of `r` under `g`, which is also the central-crop size.
pub fn patch_size(r: &Raster, g: GridSpec) -> Result<(usize, usize)> {
    let (w, h) = r.dimensions();
    if g.cols() > w || g.rows() > h {
        return Err(Error::GridTooLarge {
            rows: g.rows(),
            cols: g.cols(),
            width: w,
            height: h,
        });
    }
    Ok((w / g.cols(), h / g.rows()))
}

pub fn infer_image(m: &dyn Classifier, r: &Raster, g: GridSpec, mode: InferenceMode) -> Result<Prediction> {
    match mode {
        InferenceMode::Vote => Ok(majority_vote(&evaluate_patches(m, &tile_grid(r, g)?)?)),
        InferenceMode::Mean => Ok(mean_aggregate(&evaluate_patches(m, &tile_grid(r, g)?)?)),
        InferenceMode::Central => {
            let (pw, ph) = patch_size(r, g)?;
            let crop = central_crop(r, pw, ph)?;
            let p = m.predict_proba(&to_input(&crop, m.input_size())?)?;
            Ok(single(p, InferenceMode::Central))
        }
    }
}

/// [`infer_image`] with the grid taken from, and checked against, the model.
pub fn infer_with_model(model: &TrainedModel, r: &Raster, g: GridSpec, mode: InferenceMode) -> Result<Prediction> {
    if g != model.grid {
        return Err(Error::Config(format!(
            "inference grid {g} differs from the training grid {}",
            model.grid
        )));
    }
    infer_image(model, r, g, mode)
}

fn single(p: ProbabilityVector, mode: InferenceMode) -> Prediction {
    let c = p.argmax();
    let mut vote_tally = vec![0; p.len()];
    vote_tally[c] = 1;
    let summed_probs = p.as_slice().to_vec();
    let per_patch = ProbabilityMatrix::new(GridSpec::single(), vec![p]).expect("one entry for a 1x1 grid");
    Prediction {
        predicted_class: c,
        vote_tally,
        summed_probs,
        per_patch,
        mode,
    }
}
