//! Cuts one synthetic 1600x1200 texture into a 6x8 grid and puts it back together.

use patchvote::harness::SynthSpec;
use patchvote::imagery::{central_crop, tile_grid, GridSpec};

fn main() -> patchvote::Result<()> {
    let spec = SynthSpec::fine_grained(2, 1, 1600, 1200, 7)?;
    let img = spec.render(0);
    let grid = GridSpec::new(6, 8)?;
    let tiles = tile_grid(&img, grid)?;
    println!(
        "{}x{} image -> {} patches of {}x{}",
        img.width(),
        img.height(),
        tiles.len(),
        tiles.patch_width(),
        tiles.patch_height()
    );
    println!("reassembled image identical: {}", tiles.reassemble() == img);

    let centre = central_crop(&img, tiles.patch_width(), tiles.patch_height())?;
    println!("central patch is {}x{}", centre.width(), centre.height());
    Ok(())
}
