use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::dihedral::{flip, FlipAxis};
use super::free::{
    adjust_brightness, rotate_free, zoom_height, BRIGHTNESS_RANGE, MAX_FREE_ROTATION_DEG,
    ZOOM_HEIGHT_RANGE,
};
use crate::error::{Error, Result};
use crate::imagery::{central_crop, resize, Raster};
use crate::rng::Streams;

/// Settings of the whole-image baseline that crops a square, then produces
/// `copies` randomly zoomed, flipped and rotated versions of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlParams {
    pub crop: usize,
    pub output: usize,
    pub copies: usize,
    pub flip_probability: f64,
}

impl Default for VlParams {
    fn default() -> Self {
        VlParams {
            crop: 3000,
            output: 299,
            copies: 20,
            flip_probability: 0.5,
        }
    }
}

/// One sample of the random parameters of [`vl_protocol`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlDraw {
    pub zoom: f64,
    pub flip: bool,
    pub angle: f64,
}

impl VlDraw {
    pub const IDENTITY: VlDraw = VlDraw {
        zoom: 1.0,
        flip: false,
        angle: 0.0,
    };

    pub fn sample(rng: &mut impl Rng, params: &VlParams) -> Self {
        let zoom = rng.gen_range(ZOOM_HEIGHT_RANGE.0..=ZOOM_HEIGHT_RANGE.1);
        let flip = rng.gen_bool(params.flip_probability);
        let angle = rng.gen_range(-MAX_FREE_ROTATION_DEG..=MAX_FREE_ROTATION_DEG);
        VlDraw { zoom, flip, angle }
    }
}

/// Centre-crops to `params.crop` squared, then returns `params.copies`
/// independent augmentations, each resized to `params.output` squared.
/// Copy `n` uses `streams.stream(n)`.
pub fn vl_protocol(image: &Raster, streams: &Streams, params: &VlParams) -> Result<Vec<Raster>> {
    vl_protocol_with(image, params, |n| VlDraw::sample(&mut streams.stream(n), params))
}

pub fn vl_protocol_with(
    image: &Raster,
    params: &VlParams,
    mut draw: impl FnMut(u64) -> VlDraw,
) -> Result<Vec<Raster>> {
    if image.width() < params.crop || image.height() < params.crop {
        return Err(Error::InvalidArgument(format!(
            "image {}x{} is smaller than the {c}x{c} crop",
            image.width(),
            image.height(),
            c = params.crop
        )));
    }
    let square = central_crop(image, params.crop, params.crop)?;
    (0..params.copies as u64)
        .map(|n| vl_apply(&square, &draw(n), params.output))
        .collect()
}

fn vl_apply(square: &Raster, d: &VlDraw, output: usize) -> Result<Raster> {
    let mut img = zoom_height(square, d.zoom)?;
    if d.flip {
        img = flip(&img, FlipAxis::Horizontal);
    }
    img = rotate_free(&img, d.angle)?;
    resize(&img, output, output)
}

/// Settings of the whole-image baseline that rotates, rescales brightness and
/// always mirrors each image once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangParams {
    pub output: usize,
}

impl Default for TangParams {
    fn default() -> Self {
        TangParams { output: 224 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangDraw {
    pub angle: f64,
    pub brightness: f64,
}

impl TangDraw {
    pub const IDENTITY: TangDraw = TangDraw {
        angle: 0.0,
        brightness: 1.0,
    };

    pub fn sample(rng: &mut impl Rng) -> Self {
        let angle = rng.gen_range(-MAX_FREE_ROTATION_DEG..=MAX_FREE_ROTATION_DEG);
        let brightness = rng.gen_range(BRIGHTNESS_RANGE.0..=BRIGHTNESS_RANGE.1);
        TangDraw { angle, brightness }
    }
}

pub fn tang_protocol(image: &Raster, rng: &mut impl Rng, params: &TangParams) -> Result<Raster> {
    tang_apply(image, &TangDraw::sample(rng), params)
}

pub fn tang_apply(image: &Raster, d: &TangDraw, params: &TangParams) -> Result<Raster> {
    let img = rotate_free(image, d.angle)?;
    let img = adjust_brightness(&img, d.brightness)?;
    let img = flip(&img, FlipAxis::Horizontal);
    resize(&img, params.output, params.output)
}

/// Which augmentation the training phase applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AugmentProtocol {
    None,
    /// Quarter-turn rotations plus random flips on every patch.
    Tdli,
    VerlyLopes(VlParams),
    Tang(TangParams),
}

impl AugmentProtocol {
    pub fn name(&self) -> &'static str {
        match self {
            AugmentProtocol::None => "none",
            AugmentProtocol::Tdli => "tdli",
            AugmentProtocol::VerlyLopes(_) => "vl",
            AugmentProtocol::Tang(_) => "tang",
        }
    }

    /// True for the protocols that train on whole images rather than patches.
    pub fn is_whole_image(&self) -> bool {
        matches!(self, AugmentProtocol::VerlyLopes(_) | AugmentProtocol::Tang(_))
    }
}

impl fmt::Display for AugmentProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentProtocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(AugmentProtocol::None),
            "tdli" => Ok(AugmentProtocol::Tdli),
            "vl" | "verly_lopes" => Ok(AugmentProtocol::VerlyLopes(VlParams::default())),
            "tang" => Ok(AugmentProtocol::Tang(TangParams::default())),
            other => Err(Error::InvalidArgument(format!(
                "unknown augmentation {other:?} (expected none, tdli, vl or tang)"
            ))),
        }
    }
}
