use crate::error::{Error, Result};

/// An 8-bit RGB image stored row-major, three interleaved samples per pixel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width * height * Self::CHANNELS;
        if data.len() != expected {
            return Err(Error::InvalidRaster(format!(
                "{width}x{height} needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    /// A raster filled with one color.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * Self::CHANNELS)
            .collect();
        Raster {
            width,
            height,
            data,
        }
    }

    /// Builds a raster by evaluating `f(x, y)` for every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        let mut data = Vec::with_capacity(width * height * Self::CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Raster {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * Self::CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * Self::CHANNELS;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn row(&self, y: usize) -> &[u8] {
        let stride = self.width * Self::CHANNELS;
        &self.data[y * stride..(y + 1) * stride]
    }

    /// Copies the `w`×`h` region whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Raster> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::CropTooLarge {
                crop_w: x + w,
                crop_h: y + h,
                width: self.width,
                height: self.height,
            });
        }
        let mut data = Vec::with_capacity(w * h * Self::CHANNELS);
        for row in y..y + h {
            let start = (row * self.width + x) * Self::CHANNELS;
            data.extend_from_slice(&self.data[start..start + w * Self::CHANNELS]);
        }
        Ok(Raster {
            width: w,
            height: h,
            data,
        })
    }

    /// Pastes `src` with its top-left corner at `(x, y)`. Panics if it does not fit.
    pub fn paste(&mut self, src: &Raster, x: usize, y: usize) {
        assert!(x + src.width <= self.width && y + src.height <= self.height);
        let n = src.width * Self::CHANNELS;
        for row in 0..src.height {
            let dst = ((y + row) * self.width + x) * Self::CHANNELS;
            self.data[dst..dst + n].copy_from_slice(src.row(row));
        }
    }
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(Raster::new(0, 3, vec![]).is_err());
        assert!(Raster::new(2, 2, vec![0; 11]).is_err());
        assert!(Raster::new(2, 2, vec![0; 12]).is_ok());
    }

    #[test]
    fn crop_and_paste_are_inverse() {
        let r = Raster::from_fn(7, 5, |x, y| [x as u8, y as u8, (x * y) as u8]);
        let c = r.crop(2, 1, 3, 3).unwrap();
        assert_eq!(c.pixel(0, 0), [2, 1, 2]);
        let mut blank = Raster::filled(7, 5, [0, 0, 0]);
        blank.paste(&c, 2, 1);
        assert_eq!(blank.pixel(4, 3), r.pixel(4, 3));
        assert!(r.crop(5, 0, 3, 1).is_err());
    }
}
