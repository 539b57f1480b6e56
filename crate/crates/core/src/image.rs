//! Rasters and patch grids.
//!
//! Pixels are stored row-major in `(y, x, channel)` order with values in
//! `[0, 1]`. A [`PatchGrid`] holds the same pixels cut into equal blocks;
//! its values may leave `[0, 1]` after spectral edits and are clamped back
//! only when reassembled into an [`Image`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Side length images are resized to when a grid does not divide them.
pub const FALLBACK_SIDE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimensions(format!(
                "zero-sized image {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidDimensions(format!(
                "{channels} channels, expected 1 or 3"
            )));
        }
        if pixels.len() != height * width * channels {
            return Err(Error::ShapeMismatch(format!(
                "{} pixels for {height}x{width}x{channels}",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(if bad.is_finite() {
                Error::PixelOutOfRange(bad)
            } else {
                Error::NonFinite("image pixels")
            });
        }
        Ok(Self {
            height,
            width,
            channels,
            pixels,
        })
    }

    /// Builds an image from a per-sample function; values are clamped to `[0, 1]`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    pixels.push(clamp_unit(f(y, x, c)));
                }
            }
        }
        Self::new(height, width, channels, pixels)
    }

    pub fn constant(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    /// Whether `grid` splits this image into whole patches.
    pub fn divisible_by(&self, grid: GridSpec) -> bool {
        self.height.is_multiple_of(grid.rows) && self.width.is_multiple_of(grid.cols)
    }
}

/// Number of patch rows and columns an image is cut into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig(format!("grid {rows}x{cols}")));
        }
        Ok(Self { rows, cols })
    }

    /// `n x n` grid. Panics if `n == 0`.
    pub fn square(n: usize) -> Self {
        assert!(n > 0, "grid side must be positive");
        Self { rows: n, cols: n }
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    grid: GridSpec,
    patch_h: usize,
    patch_w: usize,
    channels: usize,
    patches: Vec<Vec<f64>>,
}

impl PatchGrid {
    pub fn new(
        grid: GridSpec,
        patch_h: usize,
        patch_w: usize,
        channels: usize,
        patches: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if patches.len() != grid.cells() {
            return Err(Error::ShapeMismatch(format!(
                "{} patches for a {}x{} grid",
                patches.len(),
                grid.rows,
                grid.cols
            )));
        }
        if patch_h == 0 || patch_w == 0 || channels == 0 {
            return Err(Error::InvalidDimensions(format!(
                "patch {patch_h}x{patch_w}x{channels}"
            )));
        }
        let len = patch_h * patch_w * channels;
        if let Some(p) = patches.iter().find(|p| p.len() != len) {
            return Err(Error::ShapeMismatch(format!(
                "patch of {} values, expected {len}",
                p.len()
            )));
        }
        Ok(Self {
            grid,
            patch_h,
            patch_w,
            channels,
            patches,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn patch_h(&self) -> usize {
        self.patch_h
    }

    pub fn patch_w(&self) -> usize {
        self.patch_w
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Values per patch: `patch_h * patch_w * channels`.
    pub fn patch_len(&self) -> usize {
        self.patch_h * self.patch_w * self.channels
    }

    pub fn patch(&self, i: usize) -> &[f64] {
        &self.patches[i]
    }

    pub fn patches(&self) -> &[Vec<f64>] {
        &self.patches
    }

    /// Same geometry, new patch contents.
    pub fn with_patches(&self, patches: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.grid, self.patch_h, self.patch_w, self.channels, patches)
    }

    /// Output slot `k` receives input patch `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        let patches = perm.iter().map(|&src| self.patches[src].clone()).collect();
        self.with_patches(patches)
    }

    /// One channel of patch `i` as an `patch_h x patch_w` row-major plane.
    pub fn channel_plane(&self, i: usize, c: usize) -> Vec<f64> {
        self.patches[i]
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }
}

pub(crate) fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::ShapeMismatch(format!(
            "permutation of length {} for {len} items",
            perm.len()
        )));
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || core::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidConfig(format!("not a permutation: {perm:?}")));
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Bilinear resize with the align-corners convention: output corners sample
/// input corners exactly.
pub fn resize_bilinear(img: &Image, out_h: usize, out_w: usize) -> Result<Image> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidDimensions(format!(
            "zero target size {out_h}x{out_w}"
        )));
    }
    if out_h == img.height && out_w == img.width {
        return Ok(img.clone());
    }
    let ys = axis_samples(img.height, out_h);
    let xs = axis_samples(img.width, out_w);
    let ch = img.channels;
    let mut pixels = Vec::with_capacity(out_h * out_w * ch);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            for c in 0..ch {
                let top = img.get(y0, x0, c) * (1.0 - tx) + img.get(y0, x1, c) * tx;
                let bottom = img.get(y1, x0, c) * (1.0 - tx) + img.get(y1, x1, c) * tx;
                pixels.push(clamp_unit(top * (1.0 - ty) + bottom * ty));
            }
        }
    }
    Image::new(out_h, out_w, ch, pixels)
}

/// `(lower index, upper index, weight of upper)` for each output coordinate.
fn axis_samples(input: usize, output: usize) -> Vec<(usize, usize, f64)> {
    (0..output)
        .map(|o| {
            let src = if output > 1 {
                (o * (input - 1)) as f64 / (output - 1) as f64
            } else {
                0.0
            };
            let lo = (libm::floor(src) as usize).min(input - 1);
            let hi = (lo + 1).min(input - 1);
            (lo, hi, src - lo as f64)
        })
        .collect()
}

/// Cuts an image into `grid.rows x grid.cols` equal patches in row-major grid order.
pub fn patchify(img: &Image, grid: GridSpec) -> Result<PatchGrid> {
    if !img.divisible_by(grid) {
        return Err(Error::NonDivisible {
            height: img.height,
            width: img.width,
            rows: grid.rows,
            cols: grid.cols,
        });
    }
    let ph = img.height / grid.rows;
    let pw = img.width / grid.cols;
    let ch = img.channels;
    let row_len = pw * ch;
    let mut patches = Vec::with_capacity(grid.cells());
    for gr in 0..grid.rows {
        for gc in 0..grid.cols {
            let mut patch = Vec::with_capacity(ph * row_len);
            for y in 0..ph {
                let start = ((gr * ph + y) * img.width + gc * pw) * ch;
                patch.extend_from_slice(&img.pixels[start..start + row_len]);
            }
            patches.push(patch);
        }
    }
    PatchGrid::new(grid, ph, pw, ch, patches)
}

/// Reassembles a patch grid. Values are clamped into `[0, 1]`, which is the
/// identity for grids produced by [`patchify`].
pub fn unpatchify(pg: &PatchGrid) -> Result<Image> {
    if pg.patches.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("patch grid"));
    }
    let (ph, pw, ch) = (pg.patch_h, pg.patch_w, pg.channels);
    let height = ph * pg.grid.rows;
    let width = pw * pg.grid.cols;
    let row_len = pw * ch;
    let mut pixels = vec![0.0; height * width * ch];
    for (i, patch) in pg.patches.iter().enumerate() {
        let (gr, gc) = (i / pg.grid.cols, i % pg.grid.cols);
        for y in 0..ph {
            let start = ((gr * ph + y) * width + gc * pw) * ch;
            for (dst, &src) in pixels[start..start + row_len]
                .iter_mut()
                .zip(&patch[y * row_len..(y + 1) * row_len])
            {
                *dst = clamp_unit(src);
            }
        }
    }
    Image::new(height, width, ch, pixels)
}

/// Per-channel mean of patch `i`.
pub fn patch_mean(pg: &PatchGrid, i: usize) -> Result<Vec<f64>> {
    let patch = pg.patches.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: pg.len(),
    })?;
    let mut sums = vec![0.0; pg.channels];
    for px in patch.chunks_exact(pg.channels) {
        for (s, v) in sums.iter_mut().zip(px) {
            *s += v;
        }
    }
    let count = (pg.patch_h * pg.patch_w) as f64;
    Ok(sums.into_iter().map(|s| s / count).collect())
}

/// Returns the image unchanged when `grid` divides it, otherwise a
/// `fallback x fallback` resize, failing if that still does not divide.
pub fn fit_to_grid(img: &Image, grid: GridSpec, fallback: usize) -> Result<Image> {
    if img.divisible_by(grid) {
        return Ok(img.clone());
    }
    let resized = resize_bilinear(img, fallback, fallback)?;
    if resized.divisible_by(grid) {
        Ok(resized)
    } else {
        Err(Error::NonDivisible {
            height: fallback,
            width: fallback,
            rows: grid.rows,
            cols: grid.cols,
        })
    }
}
