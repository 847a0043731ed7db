use rand::Rng;

use crate::error::{Error, Result};
use crate::imagery::{central_crop, quantize, resize, Raster};

/// Rotation range used by both baseline protocols, in degrees either side of zero.
pub const MAX_FREE_ROTATION_DEG: f64 = 45.0;
pub const BRIGHTNESS_RANGE: (f64, f64) = (0.8, 1.2);
pub const ZOOM_HEIGHT_RANGE: (f64, f64) = (0.8, 1.2);

/// Symmetric reflection of an integer index into `0..n` (edge pixel repeated).
#[inline]
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Rotates counterclockwise by `degrees` about the raster centre with
/// bilinear sampling. Pixels whose source falls outside the raster are
/// filled by mirroring across the border. Output keeps the input size.
pub fn rotate_free(r: &Raster, degrees: f64) -> Result<Raster> {
    if !degrees.is_finite() {
        return Err(Error::InvalidArgument(format!("rotation angle {degrees} is not finite")));
    }
    if degrees == 0.0 {
        return Ok(r.clone());
    }
    let (w, h) = r.dimensions();
    let (sin, cos) = degrees.to_radians().sin_cos();
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let src = r.as_bytes();
    let c = Raster::CHANNELS;
    let mut data = Vec::with_capacity(w * h * c);
    for y in 0..h {
        let dy = y as f64 + 0.5 - cy;
        for x in 0..w {
            let dx = x as f64 + 0.5 - cx;
            // inverse map: destination offset rotated clockwise back onto the source
            let sx = cx + dx * cos - dy * sin - 0.5;
            let sy = cy + dx * sin + dy * cos - 0.5;
            let (fx, fy) = (sx.floor(), sy.floor());
            let (ax, ay) = ((sx - fx) as f32, (sy - fy) as f32);
            let (x0, y0) = (fx as i64, fy as i64);
            let xs = [reflect(x0, w), reflect(x0 + 1, w)];
            let ys = [reflect(y0, h), reflect(y0 + 1, h)];
            let at = |xx: usize, yy: usize, ch: usize| src[(yy * w + xx) * c + ch] as f32;
            for ch in 0..c {
                let top = at(xs[0], ys[0], ch) * (1.0 - ax) + at(xs[1], ys[0], ch) * ax;
                let bottom = at(xs[0], ys[1], ch) * (1.0 - ax) + at(xs[1], ys[1], ch) * ax;
                data.push(quantize(top * (1.0 - ay) + bottom * ay));
            }
        }
    }
    Raster::new(w, h, data)
}

/// Multiplies every sample by `factor`, rounding half away from zero and
/// clamping to `0..=255`. `factor` must lie in [`BRIGHTNESS_RANGE`].
pub fn adjust_brightness(r: &Raster, factor: f64) -> Result<Raster> {
    let (lo, hi) = BRIGHTNESS_RANGE;
    if !(lo..=hi).contains(&factor) {
        return Err(Error::InvalidArgument(format!(
            "brightness factor {factor} outside [{lo}, {hi}]"
        )));
    }
    if factor == 1.0 {
        return Ok(r.clone());
    }
    let mut out = r.clone();
    for v in out.as_bytes_mut() {
        let scaled = (*v as f64 * factor).round();
        *v = scaled.clamp(0.0, 255.0) as u8;
    }
    Ok(out)
}

/// Rescales the height by `zoom` keeping the width, then restores the original
/// height by centre-cropping (zoom in) or mirror-padding (zoom out).
pub fn zoom_height(r: &Raster, zoom: f64) -> Result<Raster> {
    let (lo, hi) = ZOOM_HEIGHT_RANGE;
    if !(lo..=hi).contains(&zoom) {
        return Err(Error::InvalidArgument(format!("zoom {zoom} outside [{lo}, {hi}]")));
    }
    let (w, h) = r.dimensions();
    let zh = ((h as f64 * zoom).round() as usize).max(1);
    if zh == h {
        return Ok(r.clone());
    }
    let scaled = resize(r, w, zh)?;
    if zh > h {
        return central_crop(&scaled, w, h);
    }
    Ok(pad_rows_reflect(&scaled, h))
}

/// Draws a zoom factor uniformly from [`ZOOM_HEIGHT_RANGE`] and applies it.
pub fn random_zoom_height(r: &Raster, rng: &mut impl Rng) -> Result<Raster> {
    let zoom = rng.gen_range(ZOOM_HEIGHT_RANGE.0..=ZOOM_HEIGHT_RANGE.1);
    zoom_height(r, zoom)
}

fn pad_rows_reflect(r: &Raster, target_h: usize) -> Raster {
    let h = r.height();
    let top = (target_h - h) / 2;
    let mut data = Vec::with_capacity(r.width() * target_h * Raster::CHANNELS);
    for y in 0..target_h {
        let src_y = reflect(y as i64 - top as i64, h);
        data.extend_from_slice(r.row(src_y));
    }
    Raster::new(r.width(), target_h, data).expect("padded buffer matches dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::rotate90;
    use crate::rng::Streams;

    fn random_raster(w: usize, h: usize, seed: u64) -> Raster {
        let mut rng = Streams::new(seed, "test-raster").stream(0);
        Raster::from_fn(w, h, |_, _| rng.gen())
    }

    #[test]
    fn reflect_indices() {
        let got: Vec<usize> = (-3..7).map(|i| reflect(i, 4)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
    }

    #[test]
    fn zero_degrees_is_identity() {
        let r = random_raster(9, 6, 2);
        assert_eq!(rotate_free(&r, 0.0).unwrap(), r);
    }

    #[test]
    fn ninety_degrees_matches_quarter_turn() {
        for seed in 0..5 {
            let r = random_raster(12, 12, seed);
            let a = rotate_free(&r, 90.0).unwrap();
            let b = rotate90(&r, 1);
            for (p, q) in a.as_bytes().iter().zip(b.as_bytes()) {
                assert!((*p as i32 - *q as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn constant_raster_stays_constant() {
        let r = Raster::filled(17, 11, [200, 13, 77]);
        for deg in [-45.0, -30.5, -1.0, 7.25, 33.0, 45.0] {
            assert_eq!(rotate_free(&r, deg).unwrap(), r, "angle {deg}");
        }
    }

    #[test]
    fn brightness_arithmetic() {
        let r = Raster::new(1, 1, vec![200, 250, 0]).unwrap();
        assert_eq!(adjust_brightness(&r, 1.0).unwrap(), r);
        assert_eq!(adjust_brightness(&r, 1.2).unwrap().as_bytes(), &[240, 255, 0]);
        assert_eq!(adjust_brightness(&r, 0.8).unwrap().as_bytes(), &[160, 200, 0]);
        assert!(adjust_brightness(&r, 1.3).is_err());
    }

    #[test]
    fn zoom_dimension_arithmetic() {
        let r = random_raster(100, 100, 5);
        assert_eq!(zoom_height(&r, 1.0).unwrap(), r);

        // 0.8: 100x80 intermediate padded back, the middle rows are the scaled image
        let scaled = resize(&r, 100, 80).unwrap();
        let out = zoom_height(&r, 0.8).unwrap();
        assert_eq!(out.dimensions(), (100, 100));
        assert_eq!(out.row(10), scaled.row(0));
        assert_eq!(out.row(89), scaled.row(79));
        assert_eq!(out.row(9), scaled.row(0));
        assert_eq!(out.row(90), scaled.row(79));

        // 1.2: 100x120 intermediate, centre-cropped
        let scaled = resize(&r, 100, 120).unwrap();
        let out = zoom_height(&r, 1.2).unwrap();
        assert_eq!(out, central_crop(&scaled, 100, 100).unwrap());
        assert_eq!(out.row(0), scaled.row(10));
    }

    #[test]
    fn random_zoom_keeps_shape() {
        let r = random_raster(30, 40, 1);
        let s = Streams::new(4, "zoom");
        for n in 0..10 {
            let z = random_zoom_height(&r, &mut s.stream(n)).unwrap();
            assert_eq!(z.dimensions(), (30, 40));
        }
    }
}
