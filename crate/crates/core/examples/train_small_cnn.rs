//! Trains the built-in CNN on 16x16 patches of two texture classes.

use patchvote::harness::SynthSpec;
use patchvote::imagery::{resize, tile_grid, GridSpec};
use patchvote::model::{accuracy, raster_to_tensor, train, Architecture, SmallCnn, TensorSet, TrainConfig};

fn main() -> patchvote::Result<()> {
    let spec = SynthSpec::fine_grained(2, 4, 400, 300, 1)?;
    let grid = GridSpec::new(6, 8)?;
    let mut data = TensorSet::<f32> { inputs: Vec::new(), labels: Vec::new() };
    for n in 0..spec.len() {
        let label = n / spec.images_per_class;
        for patch in tile_grid(&spec.render(n), grid)?.patches() {
            data.inputs.push(raster_to_tensor(&resize(patch, 16, 16)?));
            data.labels.push(label);
        }
    }

    let arch = Architecture::new(2, 16)?;
    let mut net = SmallCnn::<f32>::init(arch, 1);
    println!("{} parameters, {} samples", net.parameter_count(), data.inputs.len());
    let cfg = TrainConfig { epochs: 20, learning_rate: 0.005, seed: 1, ..TrainConfig::default() };
    let log = train(&mut net, &data, &cfg)?;
    for (e, l) in log.epoch_losses.iter().enumerate() {
        println!("epoch {e}: loss {l:.4}");
    }
    println!("training accuracy {:.3}", accuracy(&net, &data)?);
    Ok(())
}
