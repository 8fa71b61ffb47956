//! Adaptive bounding-box perturbation and the fixed-range baseline.
//!
//! Offsets along x are `eps1 <= 0 <= delta1`, offsets along y are the same
//! values divided by the aspect coefficient. Each edge is drawn uniformly
//! between "moved outward by the delta magnitude" and "moved inward by the
//! eps magnitude", so `eps_shrink = 0` reduces to pure expansion and
//! `delta_expand = 0` to pure shrinkage.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Coefficients, DEFAULT_THETA_FLOOR};
use crate::rng::uniform;

pub const DEFAULT_BASELINE_MAX_SHIFT: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Shrink magnitude in pixels, `<= 0`.
    pub eps_shrink: f64,
    /// Expand magnitude in pixels, `>= 0`.
    pub delta_expand: f64,
    /// Floor applied to `eps_shrink`.
    pub eps_shrink_min: f64,
    /// Ceiling applied to `delta_expand`.
    pub delta_expand_max: f64,
    pub theta_floor: f64,
    pub min_box_size: f64,
    pub max_resample: u32,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            eps_shrink: -20.0,
            delta_expand: 20.0,
            eps_shrink_min: -20.0,
            delta_expand_max: 20.0,
            theta_floor: DEFAULT_THETA_FLOOR,
            min_box_size: 1.0,
            max_resample: 10,
        }
    }
}

impl PerturbationConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.eps_shrink, self.delta_expand, self.eps_shrink_min, self.delta_expand_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("perturbation magnitudes must be finite".into()));
        }
        if self.eps_shrink_min > 0.0 {
            return Err(Error::Config(format!("eps_shrink_min {} must be <= 0", self.eps_shrink_min)));
        }
        if self.delta_expand_max < 0.0 {
            return Err(Error::Config(format!("delta_expand_max {} must be >= 0", self.delta_expand_max)));
        }
        if !(self.theta_floor > 0.0 && self.theta_floor <= 1.0) {
            return Err(Error::Config(format!("theta_floor {} outside (0, 1]", self.theta_floor)));
        }
        if !(self.min_box_size > 0.0 && self.min_box_size.is_finite()) {
            return Err(Error::Config(format!("min_box_size {} must be > 0", self.min_box_size)));
        }
        Ok(())
    }

    /// `eps_shrink` limited to `[eps_shrink_min, 0]`.
    pub fn applied_eps_shrink(&self) -> f64 {
        self.eps_shrink.max(self.eps_shrink_min).min(0.0)
    }

    /// `delta_expand` limited to `[0, delta_expand_max]`.
    pub fn applied_delta_expand(&self) -> f64 {
        self.delta_expand.min(self.delta_expand_max).max(0.0)
    }
}

/// Per-axis offsets: index 1 is the x axis, index 2 the y axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetQuad {
    pub eps1: f64,
    pub eps2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub applied_eps_shrink: f64,
    pub applied_delta_expand: f64,
}

impl OffsetQuad {
    pub fn zero() -> Self {
        Self { eps1: 0.0, eps2: 0.0, delta1: 0.0, delta2: 0.0, applied_eps_shrink: 0.0, applied_delta_expand: 0.0 }
    }
}

pub fn compute_offsets(config: &PerturbationConfig, coeffs: &Coefficients) -> OffsetQuad {
    let eps = config.applied_eps_shrink();
    let delta = config.applied_delta_expand();
    let eps1 = eps * coeffs.theta_omega;
    let delta1 = delta * coeffs.theta_omega;
    OffsetQuad {
        eps1,
        eps2: eps1 / coeffs.xi,
        delta1,
        delta2: delta1 / coeffs.xi,
        applied_eps_shrink: eps,
        applied_delta_expand: delta,
    }
}

/// The raw edge draws of the accepted (or last) attempt.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrawRecord {
    /// `[x_min', y_min', x_max', y_max']` before clamping to the image.
    pub samples: [f64; 4],
    pub offsets: OffsetQuad,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbedBox {
    pub bbox: BoundingBox,
    pub draw: DrawRecord,
    pub resample_count: u32,
    pub fell_back: bool,
}

fn clamp_edges(e: [f64; 4], image_w: usize, image_h: usize) -> [f64; 4] {
    let (w, h) = (image_w as f64, image_h as f64);
    [e[0].clamp(0.0, w), e[1].clamp(0.0, h), e[2].clamp(0.0, w), e[3].clamp(0.0, h)]
}

/// Centered box with the given side, shifted to fit inside the image.
fn centered_box(center: (f64, f64), side_x: f64, side_y: f64, image_w: usize, image_h: usize) -> BoundingBox {
    let (w, h) = (image_w as f64, image_h as f64);
    let sx = side_x.min(w);
    let sy = side_y.min(h);
    let x0 = (center.0 - 0.5 * sx).clamp(0.0, w - sx);
    let y0 = (center.1 - 0.5 * sy).clamp(0.0, h - sy);
    BoundingBox { x_min: x0, y_min: y0, x_max: x0 + sx, y_max: y0 + sy }
}

pub fn sample_perturbed_box<R: Rng + ?Sized>(
    bbox: &BoundingBox,
    offsets: &OffsetQuad,
    image_w: usize,
    image_h: usize,
    config: &PerturbationConfig,
    rng: &mut R,
) -> Result<PerturbedBox> {
    bbox.check_within(image_w, image_h)?;
    let (ex, dx) = (offsets.eps1.abs(), offsets.delta1);
    let (ey, dy) = (offsets.eps2.abs(), offsets.delta2);

    let mut samples;
    let mut resample_count = 0;
    loop {
        samples = [
            uniform(rng, bbox.x_min - dx, bbox.x_min + ex),
            uniform(rng, bbox.y_min - dy, bbox.y_min + ey),
            uniform(rng, bbox.x_max - ex, bbox.x_max + dx),
            uniform(rng, bbox.y_max - ey, bbox.y_max + dy),
        ];
        let e = clamp_edges(samples, image_w, image_h);
        if e[2] - e[0] >= config.min_box_size && e[3] - e[1] >= config.min_box_size {
            return Ok(PerturbedBox {
                bbox: BoundingBox { x_min: e[0], y_min: e[1], x_max: e[2], y_max: e[3] },
                draw: DrawRecord { samples, offsets: *offsets },
                resample_count,
                fell_back: false,
            });
        }
        if resample_count == config.max_resample {
            break;
        }
        resample_count += 1;
    }

    let side_x = (bbox.width() - 2.0 * ex).max(config.min_box_size);
    let side_y = (bbox.height() - 2.0 * ey).max(config.min_box_size);
    Ok(PerturbedBox {
        bbox: centered_box(bbox.center(), side_x, side_y, image_w, image_h),
        draw: DrawRecord { samples, offsets: *offsets },
        resample_count,
        fell_back: true,
    })
}

/// Fixed-range, expand-only perturbation: every edge moves outward by an
/// independent `U(0, max_shift)` draw.
pub fn sample_baseline_box<R: Rng + ?Sized>(
    bbox: &BoundingBox,
    max_shift: f64,
    image_w: usize,
    image_h: usize,
    rng: &mut R,
) -> Result<PerturbedBox> {
    bbox.check_within(image_w, image_h)?;
    if !(max_shift >= 0.0 && max_shift.is_finite()) {
        return Err(Error::Config(format!("baseline max_shift {max_shift} must be >= 0")));
    }
    let samples = [
        bbox.x_min - uniform(rng, 0.0, max_shift),
        bbox.y_min - uniform(rng, 0.0, max_shift),
        bbox.x_max + uniform(rng, 0.0, max_shift),
        bbox.y_max + uniform(rng, 0.0, max_shift),
    ];
    let e = clamp_edges(samples, image_w, image_h);
    Ok(PerturbedBox {
        bbox: BoundingBox { x_min: e[0], y_min: e[1], x_max: e[2], y_max: e[3] },
        draw: DrawRecord {
            samples,
            offsets: OffsetQuad {
                eps1: 0.0,
                eps2: 0.0,
                delta1: max_shift,
                delta2: max_shift,
                applied_eps_shrink: 0.0,
                applied_delta_expand: max_shift,
            },
        },
        resample_count: 0,
        fell_back: false,
    })
}

/// Training-time prompt perturbation strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturberKind {
    /// Ground-truth box unchanged.
    None,
    /// Fixed-range expand-only.
    Baseline,
    /// Size/aspect scaling plus bidirectional factors.
    Adaptive,
    /// Size/aspect scaling, expansion only.
    AdaptiveScaledOnly,
    /// Bidirectional factors without size/aspect scaling.
    BidirectionalOnly,
}

impl PerturberKind {
    pub const ALL: [PerturberKind; 5] = [
        PerturberKind::None,
        PerturberKind::Baseline,
        PerturberKind::Adaptive,
        PerturberKind::AdaptiveScaledOnly,
        PerturberKind::BidirectionalOnly,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PerturberKind::None => "none",
            PerturberKind::Baseline => "baseline",
            PerturberKind::Adaptive => "adaptive",
            PerturberKind::AdaptiveScaledOnly => "adaptive-scaled-only",
            PerturberKind::BidirectionalOnly => "bidirectional-only",
        }
    }
}

impl fmt::Display for PerturberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerturberKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PerturberKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown perturber '{s}'")))
    }
}

/// A perturbation strategy bound to its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturber {
    pub kind: PerturberKind,
    pub config: PerturbationConfig,
    pub baseline_max_shift: f64,
}

impl Perturber {
    pub fn new(kind: PerturberKind, config: PerturbationConfig) -> Self {
        Self { kind, config, baseline_max_shift: DEFAULT_BASELINE_MAX_SHIFT }
    }

    /// Offsets this strategy would use for `bbox`; `None` for strategies
    /// that do not go through the offset equations.
    pub fn offsets(&self, bbox: &BoundingBox, image_w: usize, image_h: usize) -> Result<Option<OffsetQuad>> {
        let cfg = &self.config;
        Ok(match self.kind {
            PerturberKind::None | PerturberKind::Baseline => None,
            PerturberKind::Adaptive => {
                Some(compute_offsets(cfg, &Coefficients::for_box(bbox, image_w, image_h, cfg.theta_floor)?))
            }
            PerturberKind::AdaptiveScaledOnly => {
                let expand_only = PerturbationConfig { eps_shrink: 0.0, ..*cfg };
                Some(compute_offsets(&expand_only, &Coefficients::for_box(bbox, image_w, image_h, cfg.theta_floor)?))
            }
            PerturberKind::BidirectionalOnly => Some(compute_offsets(cfg, &Coefficients::unit())),
        })
    }

    pub fn perturb<R: Rng + ?Sized>(
        &self,
        bbox: &BoundingBox,
        image_w: usize,
        image_h: usize,
        rng: &mut R,
    ) -> Result<PerturbedBox> {
        match self.kind {
            PerturberKind::None => {
                bbox.check_within(image_w, image_h)?;
                Ok(PerturbedBox {
                    bbox: *bbox,
                    draw: DrawRecord {
                        samples: [bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max],
                        offsets: OffsetQuad::zero(),
                    },
                    resample_count: 0,
                    fell_back: false,
                })
            }
            PerturberKind::Baseline => sample_baseline_box(bbox, self.baseline_max_shift, image_w, image_h, rng),
            _ => {
                let offsets = self.offsets(bbox, image_w, image_h)?.expect("offset-based strategy");
                sample_perturbed_box(bbox, &offsets, image_w, image_h, &self.config, rng)
            }
        }
    }
}

/// Empirical summary of repeated adaptive draws around one box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationStats {
    pub n: usize,
    pub mean_width: f64,
    pub mean_height: f64,
    pub mean_center_x: f64,
    pub mean_center_y: f64,
    /// Fraction of draws whose area exceeds the input area.
    pub expand_fraction: f64,
    /// Fraction of draws that needed at least one resample.
    pub resample_rate: f64,
}

/// Running sums behind [`PerturbationStats`].
#[derive(Default)]
pub struct StatsAccumulator {
    n: usize,
    width: f64,
    height: f64,
    cx: f64,
    cy: f64,
    expand: usize,
    resampled: usize,
}

impl StatsAccumulator {
    pub fn push(&mut self, original: &BoundingBox, p: &PerturbedBox) {
        let (cx, cy) = p.bbox.center();
        self.n += 1;
        self.width += p.bbox.width();
        self.height += p.bbox.height();
        self.cx += cx;
        self.cy += cy;
        if p.bbox.area() > original.area() {
            self.expand += 1;
        }
        if p.resample_count > 0 {
            self.resampled += 1;
        }
    }

    pub fn finish(&self) -> PerturbationStats {
        let n = self.n.max(1) as f64;
        PerturbationStats {
            n: self.n,
            mean_width: self.width / n,
            mean_height: self.height / n,
            mean_center_x: self.cx / n,
            mean_center_y: self.cy / n,
            expand_fraction: self.expand as f64 / n,
            resample_rate: self.resampled as f64 / n,
        }
    }
}

pub fn perturbation_stats<R: Rng + ?Sized>(
    bbox: &BoundingBox,
    config: &PerturbationConfig,
    coeffs: &Coefficients,
    image_w: usize,
    image_h: usize,
    n: usize,
    rng: &mut R,
) -> Result<PerturbationStats> {
    if n == 0 {
        return Err(Error::Config("perturbation_stats needs n >= 1".into()));
    }
    let offsets = compute_offsets(config, coeffs);
    let mut acc = StatsAccumulator::default();
    for _ in 0..n {
        let p = sample_perturbed_box(bbox, &offsets, image_w, image_h, config, rng)?;
        acc.push(bbox, &p);
    }
    Ok(acc.finish())
}
