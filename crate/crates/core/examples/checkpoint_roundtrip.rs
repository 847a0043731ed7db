//! Saves a trained model to a weight file and checks the reloaded copy
//! predicts identically.

use patchvote::augment::AugmentProtocol;
use patchvote::imagery::{GridSpec, Raster};
use patchvote::model::{Architecture, Checkpoint, SmallCnn, TrainedModel};
use patchvote::voting::{infer_with_model, InferenceMode};

fn main() -> patchvote::Result<()> {
    let labels: Vec<String> = ["oak", "teak", "pine"].iter().map(|s| s.to_string()).collect();
    let grid = GridSpec::new(2, 2)?;
    let cnn = SmallCnn::<f32>::init(Architecture::new(3, 16)?, 4);
    let model = TrainedModel::new(labels, grid, AugmentProtocol::Tdli, cnn)?;

    let dir = tempfile::tempdir().expect("temporary directory");
    let path = dir.path().join("model.pvw");
    model.save(&path)?;
    let ck = Checkpoint::load(&path)?;
    for layer in &ck.layers {
        println!("{:<14} {:?}", layer.name, layer.shape);
    }

    let back = TrainedModel::load(&path)?;
    let img = Raster::from_fn(64, 48, |x, y| [(x * 4) as u8, (y * 5) as u8, 90]);
    let a = infer_with_model(&model, &img, grid, InferenceMode::Vote)?;
    let b = infer_with_model(&back, &img, grid, InferenceMode::Vote)?;
    println!("same prediction after reload: {}", a == b);
    Ok(())
}
