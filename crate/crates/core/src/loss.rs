//! Training objective: binary cross-entropy plus Dice loss, with an explicit
//! weight-decay penalty for reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, Grid};

pub const CLIP_EPS: f64 = 1e-7;
pub const DEFAULT_LAMBDA: f64 = 1e-4;

/// Foreground probabilities, clipped to `[CLIP_EPS, 1 - CLIP_EPS]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMap(Grid<f64>);

impl ProbabilityMap {
    pub fn new(values: Grid<f64>) -> Self {
        Self(values.map(|&p| clip(p)))
    }

    pub fn from_vec(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Ok(Self::new(Grid::from_vec(width, height, values)?))
    }

    /// Wrap values without clipping; gradient routines check the domain.
    pub fn unclipped(values: Grid<f64>) -> Self {
        Self(values)
    }

    pub fn grid(&self) -> &Grid<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    /// `p > threshold`, ties to background.
    pub fn threshold(&self, threshold: f64) -> BinaryMask {
        self.0.map(|&p| p > threshold)
    }
}

#[inline]
pub fn clip(p: f64) -> f64 {
    p.clamp(CLIP_EPS, 1.0 - CLIP_EPS)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub bce: f64,
    pub dice: f64,
    pub combined: f64,
    pub wd_penalty: f64,
    #[serde(rename = "final")]
    pub final_loss: f64,
}

fn check(s: &ProbabilityMap, g: &BinaryMask) -> Result<()> {
    s.grid().same_dims(g)
}

pub fn bce(s: &ProbabilityMap, g: &BinaryMask) -> Result<f64> {
    check(s, g)?;
    let n = g.len() as f64;
    let sum: f64 = s
        .as_slice()
        .iter()
        .zip(g.as_slice())
        .map(|(&p, &t)| if t { p.ln() } else { (1.0 - p).ln() })
        .sum();
    Ok(-sum / n)
}

struct DiceSums {
    overlap: f64,
    denom: f64,
}

fn dice_sums(s: &[f64], g: &[bool]) -> DiceSums {
    let mut overlap = 0.0;
    let mut g2 = 0.0;
    let mut s2 = 0.0;
    for (&p, &t) in s.iter().zip(g) {
        let t = t as u8 as f64;
        overlap += t * p;
        g2 += t * t;
        s2 += p * p;
    }
    DiceSums { overlap, denom: g2 + s2 }
}

pub fn dice_loss(s: &ProbabilityMap, g: &BinaryMask) -> Result<f64> {
    check(s, g)?;
    let DiceSums { overlap, denom } = dice_sums(s.as_slice(), g.as_slice());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - 2.0 * overlap / denom)
}

pub fn combined_loss(s: &ProbabilityMap, g: &BinaryMask) -> Result<LossReport> {
    let bce = bce(s, g)?;
    let dice = dice_loss(s, g)?;
    let combined = bce + dice;
    Ok(LossReport { bce, dice, combined, wd_penalty: 0.0, final_loss: combined })
}

/// `lambda * 1/2 * sum(w^2)`.
pub fn weight_decay_penalty(weights: &[f64], lambda: f64) -> f64 {
    lambda * 0.5 * weights.iter().map(|w| w * w).sum::<f64>()
}

pub fn final_loss(s: &ProbabilityMap, g: &BinaryMask, weights: &[f64], lambda: f64) -> Result<LossReport> {
    if !(lambda >= 0.0) {
        return Err(Error::Config(format!("lambda {lambda} must be >= 0")));
    }
    let mut report = combined_loss(s, g)?;
    report.wd_penalty = weight_decay_penalty(weights, lambda);
    report.final_loss = report.combined + report.wd_penalty;
    Ok(report)
}

/// Analytic `d(L_BCE + L_Dice) / d s_i` for every pixel.
pub fn loss_gradient(s: &ProbabilityMap, g: &BinaryMask) -> Result<Grid<f64>> {
    check(s, g)?;
    if let Some((index, &value)) = s.as_slice().iter().enumerate().find(|(_, &p)| !(p > 0.0 && p < 1.0)) {
        return Err(Error::DomainError { index, value });
    }
    let (w, h) = s.dims();
    Grid::from_vec(w, h, gradient_values(s.as_slice(), g.as_slice()))
}

pub(crate) fn gradient_values(s: &[f64], g: &[bool]) -> Vec<f64> {
    let n = s.len() as f64;
    let DiceSums { overlap, denom } = dice_sums(s, g);
    let d2 = denom * denom;
    s.iter()
        .zip(g)
        .map(|(&p, &t)| {
            let t = t as u8 as f64;
            let d_bce = (p - t) / (p * (1.0 - p)) / n;
            // d/dp of 1 - 2I/D with dI/dp = t, dD/dp = 2p
            let d_dice = if denom == 0.0 { 0.0 } else { -2.0 * (t * denom - 2.0 * p * overlap) / d2 };
            d_bce + d_dice
        })
        .collect()
}
