//! Votes over patches with a hand-written classifier that calls a patch
//! "bright" when its mean intensity is above 128.

use patchvote::imagery::{GridSpec, Raster};
use patchvote::model::ExternalClassifier;
use patchvote::voting::{infer_image, InferenceMode, PredictionRecord};

fn main() -> patchvote::Result<()> {
    let labels = vec!["dark".to_string(), "bright".to_string()];
    let clf = ExternalClassifier::new(labels.clone(), 8, |r: &Raster| {
        let mean = r.as_bytes().iter().map(|&b| b as f64).sum::<f64>() / r.as_bytes().len() as f64;
        let p = (mean / 255.0).clamp(0.05, 0.95);
        Ok(vec![1.0 - p, p])
    });

    // bright everywhere except a dark band through the middle two rows
    let img = Raster::from_fn(80, 60, |_, y| if (20..40).contains(&y) { [30; 3] } else { [220; 3] });
    let grid = GridSpec::new(6, 8)?;
    for mode in [InferenceMode::Vote, InferenceMode::Central, InferenceMode::Mean] {
        let p = infer_image(&clf, &img, grid, mode)?;
        let rec = PredictionRecord::new("band.png", &p, &labels)?;
        println!("{:>7}: {} (tally {})", mode.name(), rec.predicted, rec.tally);
    }
    Ok(())
}
