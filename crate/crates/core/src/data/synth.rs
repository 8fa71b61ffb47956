//! Synthetic segmentation suites.
//!
//! Both suites draw ellipses over a noisy background. The labelled target and
//! the unlabelled distractors share the same intensity, so only the prompt
//! box tells them apart.
//!
//! * `standard`: one target covering 2-20% of the image and up to two
//!   smaller distractors kept at least [`STANDARD_MIN_GAP`] pixels away.
//! * `tiny`: a target covering less than 1% of the image with one to three
//!   larger distractors whose nearest pixel lies within
//!   [`TINY_MAX_GAP`] pixels of the target.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{box_from_mask, BinaryMask, Grid, ImageGrid};
use crate::metrics::squared_distance_transform;
use crate::rng::{stream, uniform, Domain, StreamRng};

pub const FOREGROUND_MEAN: f64 = 0.7;
pub const BACKGROUND_MEAN: f64 = 0.3;
pub const NOISE_SIGMA: f64 = 0.05;
pub const DEFAULT_GRID: usize = 128;

pub const STANDARD_AREA: (f64, f64) = (0.02, 0.20);
pub const STANDARD_MIN_GAP: f64 = 8.0;
pub const TINY_AREA: (f64, f64) = (0.002, 0.008);
pub const TINY_AREA_LIMIT: f64 = 0.01;
pub const TINY_MIN_GAP: f64 = 2.0;
pub const TINY_MAX_GAP: f64 = 10.0;

const MAX_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Standard,
    Tiny,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Standard => "standard",
            Suite::Tiny => "tiny",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Suite::Standard => 0,
            Suite::Tiny => 1,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Suite::Standard),
            "tiny" => Ok(Suite::Tiny),
            other => Err(Error::Config(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSample {
    pub index: usize,
    pub image: ImageGrid,
    /// Target only; distractors are not labelled.
    pub mask: BinaryMask,
    pub distractor_count: usize,
    pub target_area_fraction: f64,
}

/// How samples are divided between train, validation and test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SplitSpec {
    /// Validation and test get `floor(n * ratio)` samples, train the rest.
    Ratios { train: f64, val: f64, test: f64 },
    Counts { train: usize, val: usize, test: usize },
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Ratios { train: 0.8, val: 0.1, test: 0.1 }
    }
}

impl SplitSpec {
    fn counts(&self, n: usize) -> Result<(usize, usize, usize)> {
        match *self {
            SplitSpec::Ratios { train, val, test } => {
                if (train + val + test - 1.0).abs() > 1e-9 || train < 0.0 || val < 0.0 || test < 0.0 {
                    return Err(Error::Config(format!("split ratios {train}/{val}/{test} must be >= 0 and sum to 1")));
                }
                let v = (n as f64 * val).floor() as usize;
                let t = (n as f64 * test).floor() as usize;
                Ok((n - v - t, v, t))
            }
            SplitSpec::Counts { train, val, test } => {
                if train + val + test != n {
                    return Err(Error::Config(format!("split counts {train}/{val}/{test} do not sum to {n}")));
                }
                Ok((train, val, test))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub suite: Suite,
    pub grid: usize,
    pub seed: u64,
    pub train: Vec<SyntheticSample>,
    pub val: Vec<SyntheticSample>,
    pub test: Vec<SyntheticSample>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::EmptyDataset("train"));
        }
        if self.val.is_empty() {
            return Err(Error::EmptyDataset("val"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    angle: f64,
}

impl Ellipse {
    fn random<R: Rng + ?Sized>(rng: &mut R, area: f64, cx: f64, cy: f64) -> Self {
        // log-uniform aspect in [1/2, 2]
        let ratio = uniform(rng, -(2f64.ln()), 2f64.ln()).exp();
        let a = (area * ratio / PI).sqrt();
        Self { cx, cy, a, b: a / ratio, angle: uniform(rng, 0.0, PI) }
    }

    /// Half extents of the axis-aligned box around the ellipse.
    fn half_extents(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (
            ((self.a * c).powi(2) + (self.b * s).powi(2)).sqrt(),
            ((self.a * s).powi(2) + (self.b * c).powi(2)).sqrt(),
        )
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = (dx * c + dy * s) / self.a;
        let v = (-dx * s + dy * c) / self.b;
        u * u + v * v <= 1.0
    }

    fn raster(&self, size: usize) -> BinaryMask {
        Grid::from_fn(size, size, |r, c| self.contains(c as f64 + 0.5, r as f64 + 0.5)).expect("nonzero grid")
    }
}

fn random_center<R: Rng + ?Sized>(rng: &mut R, e: &Ellipse, size: usize, margin: f64) -> Option<(f64, f64)> {
    let (hx, hy) = e.half_extents();
    let s = size as f64;
    let (lo_x, hi_x) = (hx + margin, s - hx - margin);
    let (lo_y, hi_y) = (hy + margin, s - hy - margin);
    (lo_x < hi_x && lo_y < hi_y).then(|| (uniform(rng, lo_x, hi_x), uniform(rng, lo_y, hi_y)))
}

fn fraction(mask: &BinaryMask) -> f64 {
    mask.count() as f64 / mask.len() as f64
}

fn overlaps(a: &BinaryMask, b: &BinaryMask) -> bool {
    a.as_slice().iter().zip(b.as_slice()).any(|(&x, &y)| x && y)
}

/// Smallest center-to-center distance between `other` and the source of `dist2`.
fn min_distance(dist2: &Grid<i64>, other: &BinaryMask) -> f64 {
    other
        .as_slice()
        .iter()
        .zip(dist2.as_slice())
        .filter(|(&b, _)| b)
        .map(|(_, &d)| d)
        .min()
        .map_or(f64::INFINITY, |d| (d as f64).sqrt())
}

fn draw_target<R: Rng + ?Sized>(rng: &mut R, size: usize, area: (f64, f64), limit: f64, margin: f64) -> Result<BinaryMask> {
    let total = (size * size) as f64;
    for _ in 0..MAX_ATTEMPTS {
        let f = uniform(rng, area.0, area.1);
        let mut e = Ellipse::random(rng, f * total, 0.0, 0.0);
        let Some((cx, cy)) = random_center(rng, &e, size, margin) else { continue };
        e.cx = cx;
        e.cy = cy;
        let m = e.raster(size);
        let frac = fraction(&m);
        if m.count() >= 4 && frac >= area.0.min(limit) && frac < limit {
            return Ok(m);
        }
    }
    Err(Error::InvalidGrid(format!("could not place a target on a {size}x{size} grid")))
}

fn standard_shapes(rng: &mut StreamRng, size: usize) -> Result<(BinaryMask, Vec<BinaryMask>)> {
    let total = (size * size) as f64;
    let target = draw_target(rng, size, STANDARD_AREA, STANDARD_AREA.1 + f64::EPSILON, 2.0)?;
    let target_d2 = squared_distance_transform(&target)?;
    let wanted = rng.random_range(0..=2usize);
    let mut distractors = Vec::new();
    for _ in 0..wanted {
        for _ in 0..50 {
            let area = uniform(rng, 0.005, 0.03) * total;
            let mut e = Ellipse::random(rng, area, 0.0, 0.0);
            let Some((cx, cy)) = random_center(rng, &e, size, 1.0) else { continue };
            e.cx = cx;
            e.cy = cy;
            let m = e.raster(size);
            if m.count() > 0 && min_distance(&target_d2, &m) >= STANDARD_MIN_GAP {
                distractors.push(m);
                break;
            }
        }
    }
    Ok((target, distractors))
}

fn tiny_shapes(rng: &mut StreamRng, size: usize) -> Result<(BinaryMask, Vec<BinaryMask>)> {
    let total = (size * size) as f64;
    let target = draw_target(rng, size, TINY_AREA, TINY_AREA_LIMIT, TINY_MAX_GAP + 2.0)?;
    let target_area = target.count();
    let target_d2 = squared_distance_transform(&target)?;
    let (tx, ty) = box_from_mask(&target)?.center();
    let wanted = rng.random_range(1..=3usize);
    let mut distractors: Vec<BinaryMask> = Vec::new();
    for _ in 0..MAX_ATTEMPTS {
        if distractors.len() == wanted {
            break;
        }
        let f = uniform(rng, 0.012, 0.04);
        let e0 = Ellipse::random(rng, f * total, 0.0, 0.0);
        let reach = e0.a.max(e0.b);
        let gap = uniform(rng, TINY_MIN_GAP, TINY_MAX_GAP);
        let dir = uniform(rng, 0.0, 2.0 * PI);
        // start far enough out that the shapes cannot touch, then walk inward
        let mut dist = reach + 2.0 * TINY_MAX_GAP + (target_area as f64).sqrt();
        let mut placed = None;
        while dist > 0.0 {
            let e = Ellipse { cx: tx + dist * dir.cos(), cy: ty + dist * dir.sin(), ..e0 };
            let m = e.raster(size);
            let d = min_distance(&target_d2, &m);
            if d < TINY_MIN_GAP {
                break;
            }
            if d <= gap.max(TINY_MIN_GAP) {
                placed = Some(m);
                break;
            }
            dist -= 0.5;
        }
        let Some(m) = placed else { continue };
        if m.count() > target_area && !overlaps(&m, &target) {
            distractors.push(m);
        }
    }
    if distractors.is_empty() {
        return Err(Error::InvalidGrid("could not place a distractor next to the tiny target".into()));
    }
    Ok((target, distractors))
}

fn render<R: Rng + ?Sized>(rng: &mut R, size: usize, target: &BinaryMask, distractors: &[BinaryMask]) -> ImageGrid {
    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
    Grid::from_fn(size, size, |r, c| {
        let fg = *target.get(r, c) || distractors.iter().any(|d| *d.get(r, c));
        let base = if fg { FOREGROUND_MEAN } else { BACKGROUND_MEAN };
        (base + noise.sample(rng)).clamp(0.0, 1.0)
    })
    .expect("nonzero grid")
}

fn check_sample(suite: Suite, s: &SyntheticSample, distractors: &[BinaryMask]) -> Result<()> {
    let bad = |why: &str| Err(Error::InvalidGrid(format!("sample {} violates {suite} contract: {why}", s.index)));
    if s.mask.count() == 0 {
        return bad("empty target");
    }
    match suite {
        Suite::Standard => {
            if !(STANDARD_AREA.0..=STANDARD_AREA.1).contains(&s.target_area_fraction) {
                return bad("target area fraction");
            }
        }
        Suite::Tiny => {
            if s.target_area_fraction >= TINY_AREA_LIMIT {
                return bad("target area fraction");
            }
            if distractors.is_empty() || distractors.len() > 3 {
                return bad("distractor count");
            }
            let d2 = squared_distance_transform(&s.mask)?;
            for d in distractors {
                let gap = min_distance(&d2, d);
                if d.count() <= s.mask.count() || !(TINY_MIN_GAP..=TINY_MAX_GAP).contains(&gap) {
                    return bad("distractor size or proximity");
                }
            }
        }
    }
    Ok(())
}

fn gen_sample(suite: Suite, size: usize, seed: u64, index: usize) -> Result<SyntheticSample> {
    let mut rng = stream(seed, Domain::Dataset, (suite.tag() << 32) | index as u64);
    let (mask, distractors) = match suite {
        Suite::Standard => standard_shapes(&mut rng, size)?,
        Suite::Tiny => tiny_shapes(&mut rng, size)?,
    };
    let image = render(&mut rng, size, &mask, &distractors);
    let sample = SyntheticSample {
        index,
        target_area_fraction: fraction(&mask),
        distractor_count: distractors.len(),
        image,
        mask,
    };
    check_sample(suite, &sample, &distractors)?;
    Ok(sample)
}

/// Generate `n` samples split 80/10/10.
pub fn gen_synthetic(n: usize, suite: Suite, grid: usize, seed: u64) -> Result<DatasetSplit> {
    gen_synthetic_split(n, suite, grid, seed, SplitSpec::default())
}

pub fn gen_synthetic_split(n: usize, suite: Suite, grid: usize, seed: u64, split: SplitSpec) -> Result<DatasetSplit> {
    if n < 10 {
        return Err(Error::Config(format!("need at least 10 samples, got {n}")));
    }
    if grid < 32 {
        return Err(Error::Config(format!("grid {grid} too small (minimum 32)")));
    }
    let (n_train, n_val, _) = split.counts(n)?;
    let samples: Vec<SyntheticSample> =
        (0..n).into_par_iter().map(|i| gen_sample(suite, grid, seed, i)).collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, Domain::Split, suite.tag()));
    let mut slots: Vec<Option<SyntheticSample>> = samples.into_iter().map(Some).collect();
    let mut take = |ids: &[usize]| -> Vec<SyntheticSample> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.iter().map(|&i| slots[i].take().expect("each index used once")).collect()
    };
    let train = take(&order[..n_train]);
    let val = take(&order[n_train..n_train + n_val]);
    let test = take(&order[n_train + n_val..]);
    Ok(DatasetSplit { suite, grid, seed, train, val, test })
}
