//! Training-set augmentation: the quarter-turn/flip expansion applied to
//! patches, and the two whole-image baseline protocols it is compared with.
//! Randomized steps draw from keyed [`Streams`](crate::rng::Streams) and are
//! also exposed with explicit draws for testing.

mod dihedral;
mod free;
mod protocols;

pub use dihedral::{flip, rotate90, tdli_expand, tdli_expand_with, FlipAxis, FlipDraw};
pub use free::{
    adjust_brightness, random_zoom_height, rotate_free, zoom_height, BRIGHTNESS_RANGE,
    MAX_FREE_ROTATION_DEG, ZOOM_HEIGHT_RANGE,
};
pub use protocols::{
    tang_apply, tang_protocol, vl_protocol, vl_protocol_with, AugmentProtocol, TangDraw,
    TangParams, VlDraw, VlParams,
};
