use super::Raster;
use crate::error::{Error, Result};

/// The `w`×`h` region centred in `r`, anchored at
/// `(floor((width - w) / 2), floor((height - h) / 2))`.
pub fn central_crop(r: &Raster, w: usize, h: usize) -> Result<Raster> {
    if w == 0 || h == 0 || w > r.width() || h > r.height() {
        return Err(Error::CropTooLarge {
            crop_w: w,
            crop_h: h,
            width: r.width(),
            height: r.height(),
        });
    }
    if (w, h) == r.dimensions() {
        return Ok(r.clone());
    }
    r.crop((r.width() - w) / 2, (r.height() - h) / 2, w, h)
}

/// Round half away from zero, clamped to the 8-bit range.
#[inline]
pub(crate) fn quantize(v: f32) -> u8 {
    if v <= 0.0 {
        0
    } else if v >= 255.0 {
        255
    } else {
        (v + 0.5).floor() as u8
    }
}

/// Per-output-sample contributions along one axis.
struct AxisWeights {
    starts: Vec<usize>,
    lens: Vec<usize>,
    weights: Vec<f32>,
    stride: usize,
}

impl AxisWeights {
    /// Triangle (bilinear) filter on pixel centres. When shrinking, the
    /// filter widens by the scale factor so every source pixel contributes.
    /// The second half of the outputs mirrors the first half exactly.
    fn new(src: usize, dst: usize) -> Self {
        let scale = src as f64 / dst as f64;
        let support = scale.max(1.0);
        let stride = (2.0 * support).ceil() as usize + 2;
        let mut starts = vec![0; dst];
        let mut lens = vec![0; dst];
        let mut weights = vec![0.0f32; dst * stride];
        for o in 0..dst.div_ceil(2) {
            let center = (o as f64 + 0.5) * scale;
            let lo = ((center - support).floor().max(0.0)) as usize;
            let hi = ((center + support).ceil() as usize).min(src);
            let mut ws: Vec<f64> = (lo..hi)
                .map(|i| (1.0 - ((i as f64 + 0.5 - center) / support).abs()).max(0.0))
                .collect();
            let total: f64 = ws.iter().sum();
            ws.iter_mut().for_each(|w| *w /= total);
            // trim zero-weight taps so the identity case reads exactly one pixel
            let first = ws.iter().position(|&w| w > 0.0).unwrap_or(0);
            let last = ws.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            let taps = &mut ws[first..=last];
            let n = taps.len();
            if 2 * o + 1 == dst {
                for k in 0..n / 2 {
                    let avg = 0.5 * (taps[k] + taps[n - 1 - k]);
                    taps[k] = avg;
                    taps[n - 1 - k] = avg;
                }
            }
            let taps = &*taps;
            let start = lo + first;
            let mirror = dst - 1 - o;
            starts[o] = start;
            lens[o] = taps.len();
            starts[mirror] = src - (start + taps.len());
            lens[mirror] = taps.len();
            for (k, &w) in taps.iter().enumerate() {
                weights[o * stride + k] = w as f32;
                weights[mirror * stride + taps.len() - 1 - k] = w as f32;
            }
        }
        AxisWeights {
            starts,
            lens,
            weights,
            stride,
        }
    }

    #[inline]
    fn taps(&self, o: usize) -> (usize, &[f32]) {
        let base = o * self.stride;
        (self.starts[o], &self.weights[base..base + self.lens[o]])
    }
}

/// Resamples to exactly `target_w`×`target_h` with a separable bilinear
/// filter (area-widened when shrinking) and round-half-away quantization.
pub fn resize(r: &Raster, target_w: usize, target_h: usize) -> Result<Raster> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::InvalidArgument(format!(
            "resize target must be positive, got {target_w}x{target_h}"
        )));
    }
    let (w, h) = r.dimensions();
    if (w, h) == (target_w, target_h) {
        return Ok(r.clone());
    }
    const C: usize = Raster::CHANNELS;
    let src = r.as_bytes();

    let xw = AxisWeights::new(w, target_w);
    let mut horiz = vec![0.0f32; h * target_w * C];
    for y in 0..h {
        let row = &src[y * w * C..(y + 1) * w * C];
        let out = &mut horiz[y * target_w * C..(y + 1) * target_w * C];
        for ox in 0..target_w {
            let (start, taps) = xw.taps(ox);
            let tap = |k: usize| {
                let px = &row[(start + k) * C..(start + k) * C + C];
                let wt = taps[k];
                [wt * px[0] as f32, wt * px[1] as f32, wt * px[2] as f32]
            };
            let mut acc = [0.0f32; C];
            let n = taps.len();
            for k in 0..n / 2 {
                let (a, b) = (tap(k), tap(n - 1 - k));
                for c in 0..C {
                    acc[c] += a[c] + b[c];
                }
            }
            if n % 2 == 1 {
                let m = tap(n / 2);
                for c in 0..C {
                    acc[c] += m[c];
                }
            }
            out[ox * C..ox * C + C].copy_from_slice(&acc);
        }
    }

    let yw = AxisWeights::new(h, target_h);
    let mut data = vec![0u8; target_w * target_h * C];
    let line = target_w * C;
    let mut acc = vec![0.0f32; line];
    for oy in 0..target_h {
        let (start, taps) = yw.taps(oy);
        acc.iter_mut().for_each(|a| *a = 0.0);
        let src_line = |k: usize| &horiz[(start + k) * line..(start + k + 1) * line];
        let n = taps.len();
        for k in 0..n / 2 {
            let (wa, wb) = (taps[k], taps[n - 1 - k]);
            for ((a, &u), &v) in acc.iter_mut().zip(src_line(k)).zip(src_line(n - 1 - k)) {
                *a += wa * u + wb * v;
            }
        }
        if n % 2 == 1 {
            let wm = taps[n / 2];
            for (a, &u) in acc.iter_mut().zip(src_line(n / 2)) {
                *a += wm * u;
            }
        }
        for (d, &a) in data[oy * line..(oy + 1) * line].iter_mut().zip(&acc) {
            *d = quantize(a);
        }
    }
    Raster::new(target_w, target_h, data)
}

/// Scales both axes by `factor`, rounding the target size to the nearest pixel.
pub fn rescale(r: &Raster, factor: f64) -> Result<Raster> {
    let tw = ((r.width() as f64 * factor).round() as usize).max(1);
    let th = ((r.height() as f64 * factor).round() as usize).max(1);
    resize(r, tw, th)
}
