//! Procedural wood-like textures whose classes differ only at a scale of a
//! few pixels: grain period, grain direction and pore size.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{write_manifest, DatasetManifest, SampleRecord};
use crate::error::{Error, Result};
use crate::imagery::{encode_png, Raster};
use crate::rng::Streams;

/// Fine-scale parameters of one class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassTexture {
    pub name: String,
    /// Wavelength of the sinusoidal grain, in pixels.
    pub grain_period: f64,
    /// Direction of the grain lines, degrees counterclockwise from horizontal.
    pub grain_orientation: f64,
    pub pores_per_megapixel: f64,
    pub pore_radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub classes: Vec<ClassTexture>,
    pub images_per_class: usize,
    pub width: usize,
    pub height: usize,
    /// Peak-to-peak grain contrast in grey levels.
    pub grain_amplitude: f64,
    /// Standard deviation of per-pixel noise in grey levels.
    pub noise: f64,
    /// Half-width of the per-image uniform jitter of the base tone.
    pub tone_jitter: f64,
    pub seed: u64,
}

const PERIODS: [f64; 3] = [9.0, 13.0, 17.0];
const ORIENTATIONS: [f64; 3] = [0.0, 45.0, 22.5];
/// (radius, pores per megapixel): equal covered area per level, so pores
/// shift the mean tone identically for every class.
const PORES: [(f64, f64); 3] = [(2.0, 3600.0), (4.0, 900.0), (3.0, 1600.0)];
pub const MAX_CLASSES: usize = PERIODS.len() * ORIENTATIONS.len() * PORES.len();

impl SynthSpec {
    /// `num_classes` textures built from three factors with several levels
    /// each. The first eight classes form the 2×2×2 cube of the first two
    /// levels, so any two of them differ in at least one fine-scale factor
    /// while sharing tone, contrast and pore coverage.
    pub fn fine_grained(num_classes: usize, images_per_class: usize, width: usize, height: usize, seed: u64) -> Result<Self> {
        if !(2..=MAX_CLASSES).contains(&num_classes) {
            return Err(Error::InvalidArgument(format!(
                "synthetic class count must be in 2..={MAX_CLASSES}, got {num_classes}"
            )));
        }
        let mut combos: Vec<[usize; 3]> = (0..MAX_CLASSES)
            .map(|i| [i % 3, (i / 3) % 3, i / 9])
            .collect();
        // cube of level 0/1 first, then anything involving level 2
        combos.sort_by_key(|c| (c.iter().max().copied(), c[2], c[1], c[0]));
        let classes = combos[..num_classes]
            .iter()
            .map(|&[p, o, r]| ClassTexture {
                name: format!(
                    "grain{}-deg{}-pore{}",
                    PERIODS[p],
                    ORIENTATIONS[o],
                    PORES[r].0
                ),
                grain_period: PERIODS[p],
                grain_orientation: ORIENTATIONS[o],
                pores_per_megapixel: PORES[r].1,
                pore_radius: PORES[r].0,
            })
            .collect();
        let spec = SynthSpec {
            classes,
            images_per_class,
            width,
            height,
            grain_amplitude: 70.0,
            noise: 6.0,
            tone_jitter: 20.0,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() || self.images_per_class == 0 {
            return Err(Error::InvalidArgument("need at least one class and one image per class".into()));
        }
        if self.width < 8 || self.height < 8 {
            return Err(Error::InvalidArgument(format!(
                "image size {}x{} below 8x8",
                self.width, self.height
            )));
        }
        for c in &self.classes {
            if !(c.grain_period > 0.0 && c.pore_radius >= 0.0 && c.pores_per_megapixel >= 0.0) {
                return Err(Error::InvalidArgument(format!("bad texture parameters for {}", c.name)));
            }
            if c.name.is_empty() || c.name.contains([',', '/', '\\']) {
                return Err(Error::InvalidArgument(format!("unusable class name {:?}", c.name)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.classes.len() * self.images_per_class
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Relative path and label of image `n` (class-major order).
    pub fn record(&self, n: usize) -> SampleRecord {
        let (c, i) = (n / self.images_per_class, n % self.images_per_class);
        let name = &self.classes[c].name;
        SampleRecord::new(format!("{name}/{i:04}.png"), name.clone(), format!("{name}-{i:04}"))
    }

    /// Image `n`, a pure function of these settings and `n`.
    pub fn render(&self, n: usize) -> Raster {
        let class = &self.classes[n / self.images_per_class];
        let mut rng = Streams::new(self.seed, "synth").stream(n as u64);
        render_texture(self, class, &mut rng)
    }
}

fn render_texture(spec: &SynthSpec, t: &ClassTexture, rng: &mut impl Rng) -> Raster {
    let (w, h) = (spec.width, spec.height);
    let tone = 128.0 + rng.gen_range(-spec.tone_jitter..=spec.tone_jitter);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let (sin, cos) = t.grain_orientation.to_radians().sin_cos();
    let k = 2.0 * PI / t.grain_period;
    let amp = spec.grain_amplitude / 2.0;

    // grain varies across the line direction
    let mut field: Vec<f64> = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let across = -(x as f64) * sin + y as f64 * cos;
            field.push(tone + amp * (k * across + phase).sin());
        }
    }

    let area = (w * h) as f64 / 1e6;
    let pores = (t.pores_per_megapixel * area).round() as usize;
    let r = t.pore_radius;
    let reach = r.ceil() as i64 + 1;
    for _ in 0..pores {
        let cx = rng.gen_range(0.0..w as f64);
        let cy = rng.gen_range(0.0..h as f64);
        let (x0, x1) = ((cx as i64 - reach).max(0), (cx as i64 + reach).min(w as i64 - 1));
        let (y0, y1) = ((cy as i64 - reach).max(0), (cy as i64 + reach).min(h as i64 - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
                // one-pixel soft edge
                let cover = (r + 0.5 - d).clamp(0.0, 1.0);
                let v = &mut field[y as usize * w + x as usize];
                *v -= cover * (*v - 0.3 * tone);
            }
        }
    }

    let mut data = Vec::with_capacity(w * h * 3);
    for v in field {
        let n = spec.noise * gaussian(rng);
        let g = (v + n).round().clamp(0.0, 255.0);
        // faint warm tint, identical for every class
        data.extend_from_slice(&[g as u8, (g * 0.85).round() as u8, (g * 0.65).round() as u8]);
    }
    Raster::new(w, h, data).expect("buffer matches dimensions")
}

/// Standard normal variate by Box-Muller.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Renders every image of `spec` into `out` as PNG and writes
/// `out/manifest.csv`. Returns the manifest.
pub fn synth_generate(spec: &SynthSpec, out: impl AsRef<Path>) -> Result<DatasetManifest> {
    spec.validate()?;
    let out = out.as_ref();
    for c in &spec.classes {
        let dir = out.join(&c.name);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    (0..spec.len())
        .into_par_iter()
        .try_for_each(|n| encode_png(&spec.render(n), out.join(&spec.record(n).path)))?;
    let manifest = DatasetManifest::new(out, (0..spec.len()).map(|n| spec.record(n)).collect())?;
    write_manifest(&manifest, out.join("manifest.csv"))?;
    Ok(manifest)
}
