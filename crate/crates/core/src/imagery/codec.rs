use std::path::Path;

use image::{ColorType, DynamicImage, ImageFormat, ImageReader};

use super::Raster;
use crate::error::{Error, Result};

fn decode_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads an 8-bit RGB or grayscale PNG/JPEG. Grayscale is expanded to three
/// identical channels; alpha and 16-bit images are rejected.
pub fn decode_image(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        Some(other) => return Err(decode_err(path, format!("unsupported format {other:?}"))),
        None => return Err(decode_err(path, "unrecognized image format")),
    }
    let img = reader
        .decode()
        .map_err(|e| decode_err(path, e.to_string()))?;
    from_dynamic(img).map_err(|reason| decode_err(path, reason))
}

fn from_dynamic(img: DynamicImage) -> std::result::Result<Raster, String> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageRgb8(buf) => buf.into_raw(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().flat_map(|v| [v, v, v]).collect(),
        other => {
            return Err(match other.color() {
                ColorType::Rgba8 | ColorType::La8 => "alpha channel not supported".to_string(),
                c => format!("unsupported color model or bit depth {c:?}"),
            })
        }
    };
    Raster::new(w, h, data).map_err(|e| e.to_string())
}

/// Writes a lossless PNG.
pub fn encode_png(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    image::save_buffer_with_format(
        path,
        raster.as_bytes(),
        raster.width() as u32,
        raster.height() as u32,
        image::ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => decode_err(path, other.to_string()),
    })
}
