//! Expands the 48 patches of one image into 192 rotated and flipped samples.

use patchvote::augment::{tdli_expand, FlipDraw};
use patchvote::harness::SynthSpec;
use patchvote::imagery::{tile_grid, GridSpec};
use patchvote::rng::Streams;

fn main() -> patchvote::Result<()> {
    let img = SynthSpec::fine_grained(2, 1, 800, 600, 3)?.render(0);
    let tiles = tile_grid(&img, GridSpec::new(6, 8)?)?;
    let streams = Streams::new(3, "tdli");
    let expanded = tdli_expand(tiles.patches(), &streams);
    println!("{} patches -> {} training samples", tiles.len(), expanded.len());

    let untouched = (0..expanded.len() as u64)
        .filter(|&n| FlipDraw::sample(&mut streams.stream(n)).is_identity())
        .count();
    println!("{untouched} of {} samples kept their rotation unflipped", expanded.len());
    Ok(())
}
