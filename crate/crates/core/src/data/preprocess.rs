//! Intensity windowing and resampling.

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, Grid, ImageGrid};

/// Abdominal CT window in HU.
pub const ABDOMEN_WINDOW: (f64, f64) = (-360.0, 440.0);
/// Lung CT window in HU.
pub const LUNG_WINDOW: (f64, f64) = (-1000.0, 400.0);

/// `v -> clamp((v - lo) / (hi - lo), 0, 1)`. NaN inputs map to 0.
pub fn window_normalize<T: Copy + Into<f64>>(raw: &Grid<T>, lo: f64, hi: f64) -> Result<ImageGrid> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidWindow { lo, hi });
    }
    let span = hi - lo;
    Ok(raw.map(|&v| {
        let v: f64 = v.into();
        if v.is_nan() {
            0.0
        } else {
            ((v - lo) / span).clamp(0.0, 1.0)
        }
    }))
}

/// Source coordinate (in pixel-index units) of output pixel `i`'s center.
#[inline]
fn source_coord(i: usize, in_len: usize, out_len: usize) -> f64 {
    let x = (i as f64 + 0.5) * in_len as f64 / out_len as f64 - 0.5;
    x.clamp(0.0, (in_len - 1) as f64)
}

/// Bilinear interpolation sampled at output pixel centers.
pub fn resample_bilinear(image: &ImageGrid, out_w: usize, out_h: usize) -> Result<ImageGrid> {
    let (in_w, in_h) = image.dims();
    if (in_w, in_h) == (out_w, out_h) {
        return Ok(image.clone());
    }
    let xs: Vec<(usize, usize, f64)> = (0..out_w)
        .map(|c| {
            let x = source_coord(c, in_w, out_w);
            let x0 = x.floor() as usize;
            (x0, (x0 + 1).min(in_w - 1), x - x0 as f64)
        })
        .collect();
    Grid::from_fn(out_w, out_h, |r, c| {
        let y = source_coord(r, in_h, out_h);
        let y0 = y.floor() as usize;
        let y1 = (y0 + 1).min(in_h - 1);
        let fy = y - y0 as f64;
        let (x0, x1, fx) = xs[c];
        let top = *image.get(y0, x0) * (1.0 - fx) + *image.get(y0, x1) * fx;
        let bottom = *image.get(y1, x0) * (1.0 - fx) + *image.get(y1, x1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Nearest-neighbour resampling, used for masks so they stay binary.
pub fn resample_nearest(mask: &BinaryMask, out_w: usize, out_h: usize) -> Result<BinaryMask> {
    let (in_w, in_h) = mask.dims();
    let pick = |i: usize, in_len: usize, out_len: usize| {
        (((i as f64 + 0.5) * in_len as f64 / out_len as f64).floor() as usize).min(in_len - 1)
    };
    Grid::from_fn(out_w, out_h, |r, c| *mask.get(pick(r, in_h, out_h), pick(c, in_w, out_w)))
}
