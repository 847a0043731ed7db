//! The two whole-image baselines applied to a single synthetic image.

use patchvote::augment::{tang_apply, vl_protocol, TangDraw, TangParams, VlParams};
use patchvote::harness::SynthSpec;
use patchvote::rng::Streams;

fn main() -> patchvote::Result<()> {
    let img = SynthSpec::fine_grained(2, 1, 400, 300, 5)?.render(0);

    let vl = VlParams { crop: 300, output: 64, ..VlParams::default() };
    let copies = vl_protocol(&img, &Streams::new(5, "vl"), &vl)?;
    println!("vl: {} copies of {}x{}", copies.len(), copies[0].width(), copies[0].height());

    let tang = TangParams { output: 64 };
    let streams = Streams::new(5, "tang");
    for epoch in 0..3 {
        let draw = TangDraw::sample(&mut streams.stream(epoch));
        let out = tang_apply(&img, &draw, &tang)?;
        println!(
            "tang epoch {epoch}: angle {:+.1} brightness {:.3} -> {}x{}",
            draw.angle,
            draw.brightness,
            out.width(),
            out.height()
        );
    }
    Ok(())
}
