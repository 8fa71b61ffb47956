//! Region (DSC) and boundary (NSD) agreement between two binary masks.
//!
//! Boundaries are 4-connected with the image border treated as background.
//! Distances are measured between pixel centers and computed exactly with a
//! separable squared-distance transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, Grid};

pub const DEFAULT_TAU: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dsc: f64,
    pub nsd: f64,
    pub tau: f64,
}

/// Per-pixel Euclidean distance to the nearest source pixel.
pub type DistanceGrid = Grid<f64>;

pub fn dsc(g: &BinaryMask, s: &BinaryMask) -> Result<f64> {
    g.same_dims(s)?;
    let (mut ng, mut ns, mut inter) = (0usize, 0usize, 0usize);
    for (&a, &b) in g.as_slice().iter().zip(s.as_slice()) {
        ng += a as usize;
        ns += b as usize;
        inter += (a && b) as usize;
    }
    if ng + ns == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (ng + ns) as f64)
}

/// True pixels with at least one false (or off-grid) 4-neighbour.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let at = |r: isize, c: isize| -> bool {
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && *mask.get(r as usize, c as usize)
    };
    Grid::from_fn(w, h, |r, c| {
        let (r, c) = (r as isize, c as isize);
        at(r, c) && !(at(r - 1, c) && at(r + 1, c) && at(r, c - 1) && at(r, c + 1))
    })
    .expect("dimensions of an existing grid")
}

const INF: i64 = i64::MAX / 4;

/// Lower envelope of parabolas `(q - p)^2 + f[p]` over the finite entries
/// of `f`, written into `out`. Integer arithmetic throughout.
fn envelope_1d(f: &[i64], out: &mut [i64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    v.clear();
    z.clear();
    for (q, &fq) in f.iter().enumerate() {
        if fq >= INF {
            continue;
        }
        // pop parabolas hidden by q
        while let Some(&p) = v.last() {
            let s = intersection(f, p, q);
            if s <= *z.last().expect("z tracks v") {
                v.pop();
                z.pop();
            } else {
                break;
            }
        }
        z.push(match v.last() {
            Some(&p) => intersection(f, p, q),
            None => f64::NEG_INFINITY,
        });
        v.push(q);
    }
    if v.is_empty() {
        out.fill(INF);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as i64 - p as i64;
        *o = d * d + f[p];
    }
}

#[inline]
fn intersection(f: &[i64], p: usize, q: usize) -> f64 {
    let (pi, qi) = (p as i64, q as i64);
    ((f[q] + qi * qi) - (f[p] + pi * pi)) as f64 / (2 * (qi - pi)) as f64
}

/// Exact squared Euclidean distances (in pixel units) to the nearest source pixel.
pub fn squared_distance_transform(source: &BinaryMask) -> Result<Grid<i64>> {
    if source.count() == 0 {
        return Err(Error::EmptySource);
    }
    let (w, h) = source.dims();
    let mut grid: Vec<i64> = source.as_slice().iter().map(|&b| if b { 0 } else { INF }).collect();

    let mut v = Vec::new();
    let mut z = Vec::new();
    let mut col = vec![0i64; h];
    let mut col_out = vec![0i64; h];
    for c in 0..w {
        for r in 0..h {
            col[r] = grid[r * w + c];
        }
        envelope_1d(&col, &mut col_out, &mut v, &mut z);
        for r in 0..h {
            grid[r * w + c] = col_out[r];
        }
    }
    let mut row_out = vec![0i64; w];
    for r in 0..h {
        let row = &mut grid[r * w..(r + 1) * w];
        envelope_1d(row, &mut row_out, &mut v, &mut z);
        row.copy_from_slice(&row_out);
    }
    Grid::from_vec(w, h, grid)
}

pub fn distance_transform(source: &BinaryMask) -> Result<DistanceGrid> {
    Ok(squared_distance_transform(source)?.map(|&d| (d as f64).sqrt()))
}

/// Convenience wrapper taking an explicit `(row, col)` source set.
pub fn distance_transform_of(source: &[(usize, usize)], width: usize, height: usize) -> Result<DistanceGrid> {
    let mut mask = BinaryMask::filled(width, height, false)?;
    for &(r, c) in source {
        if r >= height || c >= width {
            return Err(Error::InvalidGrid(format!("source pixel ({r}, {c}) outside {width}x{height}")));
        }
        mask.set(r, c, true);
    }
    distance_transform(&mask)
}

/// Boundary pixels of `from` lying within `tau` of the boundary `to_dist` was built from.
fn count_within(from: &BinaryMask, to_dist: &DistanceGrid, tau: f64) -> usize {
    from.as_slice()
        .iter()
        .zip(to_dist.as_slice())
        .filter(|(&b, &d)| b && d <= tau)
        .count()
}

pub fn nsd(g: &BinaryMask, s: &BinaryMask, tau: f64) -> Result<f64> {
    g.same_dims(s)?;
    if !(tau >= 0.0) {
        return Err(Error::Config(format!("tolerance {tau} must be >= 0")));
    }
    let bg = boundary(g);
    let bs = boundary(s);
    let (ng, ns) = (bg.count(), bs.count());
    match (ng, ns) {
        (0, 0) => return Ok(1.0),
        (0, _) | (_, 0) => return Ok(0.0),
        _ => {}
    }
    let dg = distance_transform(&bg)?;
    let ds = distance_transform(&bs)?;
    let hits = count_within(&bg, &ds, tau) + count_within(&bs, &dg, tau);
    Ok(hits as f64 / (ng + ns) as f64)
}

pub fn evaluate_masks(g: &BinaryMask, s: &BinaryMask, tau: f64) -> Result<MetricReport> {
    Ok(MetricReport { dsc: dsc(g, s)?, nsd: nsd(g, s, tau)?, tau })
}
