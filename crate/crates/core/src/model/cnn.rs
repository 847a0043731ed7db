use rand::Rng;

use super::real::Real;
use crate::error::{Error, Result};
use crate::imagery::Raster;
use crate::rng::Streams;

pub const DEFAULT_WIDTHS: [usize; 3] = [16, 32, 64];
pub const MIN_INPUT_SIZE: usize = 8;
const KERNEL: usize = 3;
const TAPS: usize = KERNEL * KERNEL;

/// Shape of a [`SmallCnn`]: three conv(3×3, same) → ReLU → maxpool(2×2)
/// blocks, global average pooling, and one dense layer onto the classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub input_size: usize,
    pub num_classes: usize,
    pub widths: [usize; 3],
}

/// Name, shape and position of one parameter tensor inside the flat buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

impl Architecture {
    pub fn new(num_classes: usize, input_size: usize) -> Result<Self> {
        Self::with_widths(num_classes, input_size, DEFAULT_WIDTHS)
    }

    pub fn with_widths(num_classes: usize, input_size: usize, widths: [usize; 3]) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if input_size < MIN_INPUT_SIZE {
            return Err(Error::InvalidArgument(format!(
                "input size {input_size} below the minimum of {MIN_INPUT_SIZE}"
            )));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidArgument("channel widths must be positive".into()));
        }
        Ok(Architecture {
            input_size,
            num_classes,
            widths,
        })
    }

    pub fn layout(&self) -> Vec<TensorSpec> {
        let mut specs = Vec::with_capacity(8);
        let mut offset = 0;
        let mut push = |name: String, shape: Vec<usize>| {
            let spec = TensorSpec {
                name,
                shape,
                offset,
            };
            offset += spec.len();
            specs.push(spec);
        };
        let mut c_in = Raster::CHANNELS;
        for (b, &c_out) in self.widths.iter().enumerate() {
            push(format!("conv{}.weight", b + 1), vec![c_out, c_in, KERNEL, KERNEL]);
            push(format!("conv{}.bias", b + 1), vec![c_out]);
            c_in = c_out;
        }
        push("fc.weight".into(), vec![self.num_classes, c_in]);
        push("fc.bias".into(), vec![self.num_classes]);
        specs
    }

    pub fn parameter_count(&self) -> usize {
        self.layout().iter().map(TensorSpec::len).sum()
    }

    /// Spatial side length entering each block.
    fn sides(&self) -> [usize; 3] {
        let s0 = self.input_size;
        [s0, s0 / 2, s0 / 4]
    }

    fn final_side(&self) -> usize {
        self.input_size / 8
    }
}

/// The built-in classifier. Parameters live in one flat buffer described by
/// [`Architecture::layout`], which keeps optimizer updates and checkpointing
/// trivial.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallCnn<T: Real = f32> {
    arch: Architecture,
    layout: Vec<TensorSpec>,
    params: Vec<T>,
}

impl<T: Real> SmallCnn<T> {
    /// Fan-in scaled uniform weights (`±sqrt(6 / fan_in)`), zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let layout = arch.layout();
        let total = layout.iter().map(TensorSpec::len).sum();
        let mut params = vec![T::zero(); total];
        let mut rng = Streams::new(seed, "init").stream(0);
        for spec in layout.iter().filter(|s| s.name.ends_with(".weight")) {
            let fan_in: usize = spec.shape[1..].iter().product();
            let limit = (6.0 / fan_in as f64).sqrt();
            for p in &mut params[spec.range()] {
                *p = T::lit(rng.gen_range(-limit..limit));
            }
        }
        SmallCnn {
            arch,
            layout,
            params,
        }
    }

    pub fn from_params(arch: Architecture, params: Vec<T>) -> Result<Self> {
        let layout = arch.layout();
        let total: usize = layout.iter().map(TensorSpec::len).sum();
        if params.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "architecture needs {total} parameters, got {}",
                params.len()
            )));
        }
        Ok(SmallCnn {
            arch,
            layout,
            params,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layout(&self) -> &[TensorSpec] {
        &self.layout
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn tensor(&self, name: &str) -> Option<&[T]> {
        self.spec(name).map(|s| &self.params[s.range()])
    }

    fn spec(&self, name: &str) -> Option<&TensorSpec> {
        self.layout.iter().find(|s| s.name == name)
    }

    /// Zeroes the dense layer so every input maps to the uniform distribution.
    pub fn zero_head(&mut self) {
        for name in ["fc.weight", "fc.bias"] {
            let r = self.spec(name).expect("dense layer present").range();
            self.params[r].iter_mut().for_each(|p| *p = T::zero());
        }
    }

    /// Converts an 8-bit raster of the network's input size into its input tensor.
    pub fn input_from_raster(&self, r: &Raster) -> Result<Vec<T>> {
        let s = self.arch.input_size;
        if r.dimensions() != (s, s) {
            return Err(Error::ShapeMismatch(format!(
                "network expects {s}x{s} input, got {}x{}",
                r.width(),
                r.height()
            )));
        }
        Ok(raster_to_tensor(r))
    }

    /// Class probabilities for one input in channel-major layout.
    pub fn forward(&self, input: &[T]) -> Vec<f64> {
        let mut tr = Trace::new(&self.arch);
        self.forward_traced(input, &mut tr)
    }

    pub fn predict_raster(&self, r: &Raster) -> Result<Vec<f64>> {
        Ok(self.forward(&self.input_from_raster(r)?))
    }

    /// Cross-entropy of one sample.
    pub fn loss(&self, input: &[T], label: usize) -> f64 {
        -self.forward(input)[label].max(f64::MIN_POSITIVE).ln()
    }

    pub(crate) fn forward_traced(&self, input: &[T], tr: &mut Trace<T>) -> Vec<f64> {
        tr.input.copy_from_slice(input);
        let mut c_in = Raster::CHANNELS;
        for b in 0..3 {
            let (prev, rest) = tr.blocks.split_at_mut(b);
            let x: &[T] = if b == 0 { &tr.input } else { &prev[b - 1].pooled };
            let blk = &mut rest[0];
            let w = &self.params[self.layout[2 * b].range()];
            let bias = &self.params[self.layout[2 * b + 1].range()];
            let (s, c_out) = (blk.side, blk.c_out);
            let hw = s * s;
            im2col(x, c_in, s, &mut blk.col);
            T::gemm(
                c_out,
                c_in * TAPS,
                hw,
                w,
                c_in * TAPS,
                1,
                &blk.col,
                hw,
                1,
                T::zero(),
                &mut blk.act,
                hw,
                1,
            );
            for (c, row) in blk.act.chunks_exact_mut(hw).enumerate() {
                let bc = bias[c];
                for v in row {
                    let z = *v + bc;
                    *v = if z > T::zero() { z } else { T::zero() };
                }
            }
            max_pool(&blk.act, c_out, s, &mut blk.pooled, &mut blk.argmax);
            c_in = c_out;
        }

        let last = &tr.blocks[2];
        let area = last.pooled.len() / last.c_out;
        let inv = T::lit(1.0 / area as f64);
        for (f, plane) in tr.feat.iter_mut().zip(last.pooled.chunks_exact(area)) {
            *f = plane.iter().copied().sum::<T>() * inv;
        }

        let fc_w = &self.params[self.layout[6].range()];
        let fc_b = &self.params[self.layout[7].range()];
        let width = tr.feat.len();
        let logits: Vec<f64> = (0..self.arch.num_classes)
            .map(|j| {
                let row = &fc_w[j * width..(j + 1) * width];
                let z = row.iter().zip(&tr.feat).map(|(&w, &f)| w * f).sum::<T>() + fc_b[j];
                z.to_f64().unwrap()
            })
            .collect();
        softmax(&logits)
    }

    /// Adds the gradient of the cross-entropy of the traced sample to `grads`.
    pub(crate) fn backward(&self, tr: &mut Trace<T>, probs: &[f64], label: usize, grads: &mut [T]) {
        let c = self.arch.num_classes;
        let width = tr.feat.len();
        let dlogits: Vec<T> = (0..c)
            .map(|j| T::lit(probs[j] - if j == label { 1.0 } else { 0.0 }))
            .collect();

        let fc_w = &self.params[self.layout[6].range()];
        {
            let gw = &mut grads[self.layout[6].range()];
            for j in 0..c {
                for k in 0..width {
                    gw[j * width + k] = gw[j * width + k] + dlogits[j] * tr.feat[k];
                }
            }
        }
        {
            let gb = &mut grads[self.layout[7].range()];
            for j in 0..c {
                gb[j] = gb[j] + dlogits[j];
            }
        }

        // gradient w.r.t. the last pooled map (global average pooling spreads it evenly)
        let last = &mut tr.blocks[2];
        let area = last.pooled.len() / last.c_out;
        let inv = T::lit(1.0 / area as f64);
        for k in 0..width {
            let d = (0..c).map(|j| fc_w[j * width + k] * dlogits[j]).sum::<T>() * inv;
            last.dpooled[k * area..(k + 1) * area].iter_mut().for_each(|v| *v = d);
        }

        for b in (0..3).rev() {
            let (prev, rest) = tr.blocks.split_at_mut(b);
            let blk = &mut rest[0];
            let (s, c_out) = (blk.side, blk.c_out);
            let c_in = if b == 0 { Raster::CHANNELS } else { prev[b - 1].c_out };
            let hw = s * s;
            let k_dim = c_in * TAPS;

            blk.dact.iter_mut().for_each(|v| *v = T::zero());
            for (&src, &d) in blk.argmax.iter().zip(&blk.dpooled) {
                let src = src as usize;
                if blk.act[src] > T::zero() {
                    blk.dact[src] = blk.dact[src] + d;
                }
            }

            let gb = &mut grads[self.layout[2 * b + 1].range()];
            for (g, row) in gb.iter_mut().zip(blk.dact.chunks_exact(hw)) {
                *g = *g + row.iter().copied().sum::<T>();
            }
            let gw = &mut grads[self.layout[2 * b].range()];
            T::gemm(
                c_out, hw, k_dim, &blk.dact, hw, 1, &blk.col, 1, hw, T::one(), gw, k_dim, 1,
            );

            if b > 0 {
                let w = &self.params[self.layout[2 * b].range()];
                T::gemm(
                    k_dim,
                    c_out,
                    hw,
                    w,
                    1,
                    k_dim,
                    &blk.dact,
                    hw,
                    1,
                    T::zero(),
                    &mut blk.dcol,
                    hw,
                    1,
                );
                col2im(&blk.dcol, c_in, s, &mut prev[b - 1].dpooled);
            }
        }
    }
}

/// Channel-major planes with samples scaled to the unit interval.
pub fn raster_to_tensor<T: Real>(r: &Raster) -> Vec<T> {
    let plane = r.width() * r.height();
    let mut out = vec![T::zero(); Raster::CHANNELS * plane];
    let scale = T::lit(1.0 / 255.0);
    for (p, px) in r.as_bytes().chunks_exact(Raster::CHANNELS).enumerate() {
        for (c, &v) in px.iter().enumerate() {
            out[c * plane + p] = T::from_u8(v).expect("u8 fits any float") * scale;
        }
    }
    out
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Scratch buffers for one forward/backward pass.
pub(crate) struct Trace<T> {
    input: Vec<T>,
    blocks: Vec<BlockTrace<T>>,
    feat: Vec<T>,
}

struct BlockTrace<T> {
    side: usize,
    c_out: usize,
    col: Vec<T>,
    act: Vec<T>,
    pooled: Vec<T>,
    argmax: Vec<u32>,
    dpooled: Vec<T>,
    dact: Vec<T>,
    dcol: Vec<T>,
}

impl<T: Real> Trace<T> {
    pub(crate) fn new(arch: &Architecture) -> Self {
        let sides = arch.sides();
        let mut c_in = Raster::CHANNELS;
        let blocks = (0..3)
            .map(|b| {
                let (s, c_out) = (sides[b], arch.widths[b]);
                let p = s / 2;
                let blk = BlockTrace {
                    side: s,
                    c_out,
                    col: vec![T::zero(); c_in * TAPS * s * s],
                    act: vec![T::zero(); c_out * s * s],
                    pooled: vec![T::zero(); c_out * p * p],
                    argmax: vec![0; c_out * p * p],
                    dpooled: vec![T::zero(); c_out * p * p],
                    dact: vec![T::zero(); c_out * s * s],
                    dcol: vec![T::zero(); if b > 0 { c_in * TAPS * s * s } else { 0 }],
                };
                c_in = c_out;
                blk
            })
            .collect();
        debug_assert!(arch.final_side() >= 1);
        Trace {
            input: vec![T::zero(); Raster::CHANNELS * arch.input_size * arch.input_size],
            blocks,
            feat: vec![T::zero(); arch.widths[2]],
        }
    }
}

/// Unfolds 3×3 same-padded neighbourhoods: row `ci*9 + ky*3 + kx`, column `y*s + x`.
fn im2col<T: Real>(x: &[T], c_in: usize, s: usize, col: &mut [T]) {
    let hw = s * s;
    for ci in 0..c_in {
        let plane = &x[ci * hw..(ci + 1) * hw];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &mut col[(ci * TAPS + ky * KERNEL + kx) * hw..][..hw];
                for y in 0..s {
                    let out = &mut row[y * s..(y + 1) * s];
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= s as isize {
                        out.iter_mut().for_each(|v| *v = T::zero());
                        continue;
                    }
                    let src = &plane[sy as usize * s..(sy as usize + 1) * s];
                    match kx {
                        0 => {
                            out[0] = T::zero();
                            out[1..].copy_from_slice(&src[..s - 1]);
                        }
                        1 => out.copy_from_slice(src),
                        _ => {
                            out[..s - 1].copy_from_slice(&src[1..]);
                            out[s - 1] = T::zero();
                        }
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: accumulates column gradients back onto the input.
fn col2im<T: Real>(col: &[T], c_in: usize, s: usize, dx: &mut [T]) {
    let hw = s * s;
    dx.iter_mut().for_each(|v| *v = T::zero());
    for ci in 0..c_in {
        let plane = &mut dx[ci * hw..(ci + 1) * hw];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &col[(ci * TAPS + ky * KERNEL + kx) * hw..][..hw];
                for y in 0..s {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= s as isize {
                        continue;
                    }
                    let src = &row[y * s..(y + 1) * s];
                    let dst = &mut plane[sy as usize * s..(sy as usize + 1) * s];
                    match kx {
                        0 => {
                            for (d, &v) in dst[..s - 1].iter_mut().zip(&src[1..]) {
                                *d = *d + v;
                            }
                        }
                        1 => {
                            for (d, &v) in dst.iter_mut().zip(src) {
                                *d = *d + v;
                            }
                        }
                        _ => {
                            for (d, &v) in dst[1..].iter_mut().zip(&src[..s - 1]) {
                                *d = *d + v;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// 2×2 stride-2 max pooling; odd trailing rows/columns are dropped.
fn max_pool<T: Real>(act: &[T], channels: usize, s: usize, out: &mut [T], argmax: &mut [u32]) {
    let p = s / 2;
    for c in 0..channels {
        let base = c * s * s;
        for py in 0..p {
            for px in 0..p {
                let mut best = base + 2 * py * s + 2 * px;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = base + (2 * py + dy) * s + 2 * px + dx;
                    if act[idx] > act[best] {
                        best = idx;
                    }
                }
                let o = c * p * p + py * p + px;
                out[o] = act[best];
                argmax[o] = best as u32;
            }
        }
    }
}
