use std::fmt;
use std::str::FromStr;

use super::Raster;
use crate::error::{Error, Result};

/// A `rows`×`cols` partition of an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 1x1, got {rows}x{cols}"
            )));
        }
        Ok(GridSpec { rows, cols })
    }

    pub const fn single() -> Self {
        GridSpec { rows: 1, cols: 1 }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn transpose(&self) -> Self {
        GridSpec {
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = PatchIndex> {
        let cols = self.cols;
        (0..self.len()).map(move |k| PatchIndex { i: k / cols, j: k % cols })
    }

    pub fn linear(&self, idx: PatchIndex) -> usize {
        debug_assert!(idx.i < self.rows && idx.j < self.cols);
        idx.i * self.cols + idx.j
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::InvalidArgument(format!("grid must look like RxC, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad grid dimension {v:?} in {s:?}")))
        };
        GridSpec::new(parse(r)?, parse(c)?)
    }
}

/// Row `i`, column `j` of a patch grid (both zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatchIndex {
    pub i: usize,
    pub j: usize,
}

/// The patches of one image in row-major grid order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchSet {
    grid: GridSpec,
    patch_width: usize,
    patch_height: usize,
    patches: Vec<Raster>,
}

impl PatchSet {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn patch_width(&self) -> usize {
        self.patch_width
    }

    pub fn patch_height(&self) -> usize {
        self.patch_height
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn get(&self, idx: PatchIndex) -> &Raster {
        &self.patches[self.grid.linear(idx)]
    }

    pub fn patches(&self) -> &[Raster] {
        &self.patches
    }

    pub fn into_patches(self) -> Vec<Raster> {
        self.patches
    }

    pub fn iter(&self) -> impl Iterator<Item = (PatchIndex, &Raster)> {
        self.grid.indices().zip(self.patches.iter())
    }

    /// Concatenates the patches back into one raster.
    pub fn reassemble(&self) -> Raster {
        let mut out = Raster::filled(
            self.patch_width * self.grid.cols,
            self.patch_height * self.grid.rows,
            [0, 0, 0],
        );
        for (idx, p) in self.iter() {
            out.paste(p, idx.j * self.patch_width, idx.i * self.patch_height);
        }
        out
    }
}

/// Drops the remainder pixels that keep `r` from dividing evenly into `g`:
/// `floor(rem/2)` from the leading edge, the rest from the trailing edge.
pub fn trim_to_grid(r: &Raster, g: GridSpec) -> Result<Raster> {
    let (w, h) = r.dimensions();
    if w < g.cols || h < g.rows {
        return Err(Error::GridTooLarge {
            rows: g.rows,
            cols: g.cols,
            width: w,
            height: h,
        });
    }
    let (rem_w, rem_h) = (w % g.cols, h % g.rows);
    if rem_w == 0 && rem_h == 0 {
        return Ok(r.clone());
    }
    r.crop(rem_w / 2, rem_h / 2, w - rem_w, h - rem_h)
}

/// Splits `r` into `g.rows`×`g.cols` non-overlapping patches of equal size.
pub fn tile_grid(r: &Raster, g: GridSpec) -> Result<PatchSet> {
    let trimmed;
    let src = if r.width().is_multiple_of(g.cols) && r.height().is_multiple_of(g.rows) {
        r
    } else {
        trimmed = trim_to_grid(r, g)?;
        &trimmed
    };
    let (pw, ph) = (src.width() / g.cols, src.height() / g.rows);
    if pw == 0 || ph == 0 {
        return Err(Error::GridTooLarge {
            rows: g.rows,
            cols: g.cols,
            width: r.width(),
            height: r.height(),
        });
    }
    let patches = g
        .indices()
        .map(|idx| src.crop(idx.j * pw, idx.i * ph, pw, ph))
        .collect::<Result<Vec<_>>>()?;
    Ok(PatchSet {
        grid: g,
        patch_width: pw,
        patch_height: ph,
        patches,
    })
}
