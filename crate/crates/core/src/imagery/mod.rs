//! Rasters and the geometric primitives applied to them: decoding, grid
//! tiling, central cropping and resampling.

mod codec;
mod raster;
mod resample;
mod tile;

pub use codec::{decode_image, encode_png};
pub use raster::Raster;
pub use resample::{central_crop, rescale, resize};
pub(crate) use resample::quantize;
pub use tile::{tile_grid, trim_to_grid, GridSpec, PatchIndex, PatchSet};
