use rand::Rng;

use crate::imagery::Raster;
use crate::rng::Streams;

/// Mirror axis. `Horizontal` swaps left and right; `Vertical` swaps top and bottom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipAxis {
    Horizontal,
    Vertical,
}

/// Rotates counterclockwise by `90 * k` degrees. `k` is taken modulo 4.
pub fn rotate90(r: &Raster, k: u8) -> Raster {
    let (w, h) = r.dimensions();
    match k % 4 {
        0 => r.clone(),
        1 => Raster::from_fn(h, w, |x, y| r.pixel(w - 1 - y, x)),
        2 => Raster::from_fn(w, h, |x, y| r.pixel(w - 1 - x, h - 1 - y)),
        _ => Raster::from_fn(h, w, |x, y| r.pixel(y, h - 1 - x)),
    }
}

pub fn flip(r: &Raster, axis: FlipAxis) -> Raster {
    let (w, h) = r.dimensions();
    let c = Raster::CHANNELS;
    let mut out = r.clone();
    match axis {
        FlipAxis::Horizontal => {
            let src = r.as_bytes();
            for (y, row) in out.as_bytes_mut().chunks_exact_mut(w * c).enumerate() {
                let src_row = &src[y * w * c..(y + 1) * w * c];
                for x in 0..w {
                    let s = (w - 1 - x) * c;
                    row[x * c..x * c + c].copy_from_slice(&src_row[s..s + c]);
                }
            }
        }
        FlipAxis::Vertical => {
            for (y, row) in out.as_bytes_mut().chunks_exact_mut(w * c).enumerate() {
                row.copy_from_slice(r.row(h - 1 - y));
            }
        }
    }
    out
}

/// The two independent coin flips applied to one patch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlipDraw {
    pub horizontal: bool,
    pub vertical: bool,
}

impl FlipDraw {
    pub fn sample(rng: &mut impl Rng) -> Self {
        let horizontal = rng.gen_bool(0.5);
        let vertical = rng.gen_bool(0.5);
        FlipDraw {
            horizontal,
            vertical,
        }
    }

    pub fn is_identity(&self) -> bool {
        !self.horizontal && !self.vertical
    }

    pub fn apply(&self, r: &Raster) -> Raster {
        match (self.horizontal, self.vertical) {
            (false, false) => r.clone(),
            (true, false) => flip(r, FlipAxis::Horizontal),
            (false, true) => flip(r, FlipAxis::Vertical),
            (true, true) => rotate90(r, 2),
        }
    }
}

/// Replaces every patch with its four quarter-turn rotations, then flips each
/// result horizontally with probability 0.5 and vertically with probability
/// 0.5. The flip for output `n` is drawn from `streams.stream(n)`.
///
/// Output order: `4 * p + k` holds rotation `k` of input patch `p`.
pub fn tdli_expand(patches: &[Raster], streams: &Streams) -> Vec<Raster> {
    tdli_expand_with(patches, |n| FlipDraw::sample(&mut streams.stream(n)))
}

/// [`tdli_expand`] with the flip decisions supplied by `draw(ordinal)`.
pub fn tdli_expand_with(patches: &[Raster], mut draw: impl FnMut(u64) -> FlipDraw) -> Vec<Raster> {
    let mut out = Vec::with_capacity(patches.len() * 4);
    for (p, patch) in patches.iter().enumerate() {
        for k in 0..4u8 {
            let rotated = rotate90(patch, k);
            let d = draw((4 * p + k as usize) as u64);
            out.push(if d.is_identity() { rotated } else { d.apply(&rotated) });
        }
    }
    out
}
