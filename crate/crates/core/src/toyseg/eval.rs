use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::model::{predict, ToyModel};
use crate::data::SyntheticSample;
use crate::error::{Error, Result};
use crate::geometry::{box_from_mask, BinaryMask, BoundingBox, ImageGrid};
use crate::metrics::{evaluate_masks, MetricReport};

pub const PREDICTION_THRESHOLD: f64 = 0.5;
pub const DEFAULT_ERROR_DSC_THRESHOLD: f64 = 0.5;
pub const MAX_PROMPT_FRACTION: f64 = 0.4;

/// Test-time prompt regime: every edge of the ground-truth box is moved by
/// a fraction of the corresponding side length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PromptMode {
    Standard,
    Expand(f64),
    Shrink(f64),
}

impl PromptMode {
    pub fn label(&self) -> &'static str {
        match self {
            PromptMode::Standard => "standard",
            PromptMode::Expand(_) => "expand",
            PromptMode::Shrink(_) => "shrink",
        }
    }

    fn fraction(&self) -> f64 {
        match *self {
            PromptMode::Standard => 0.0,
            PromptMode::Expand(f) | PromptMode::Shrink(f) => f,
        }
    }
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptMode::Standard => f.write_str("standard"),
            PromptMode::Expand(x) => write!(f, "expand:{x}"),
            PromptMode::Shrink(x) => write!(f, "shrink:{x}"),
        }
    }
}

impl FromStr for PromptMode {
    type Err = Error;

    /// `standard`, `expand:F` or `shrink:F`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad prompt mode '{s}'"));
        match s.split_once(':') {
            None if s == "standard" => Ok(PromptMode::Standard),
            Some((kind, f)) => {
                let f: f64 = f.parse().map_err(|_| bad())?;
                match kind {
                    "expand" => Ok(PromptMode::Expand(f)),
                    "shrink" => Ok(PromptMode::Shrink(f)),
                    _ => Err(bad()),
                }
            }
            None => Err(bad()),
        }
    }
}

/// Prompt box for `mode`, clamped to the image.
pub fn prompt_box(gt: &BoundingBox, mode: PromptMode, image_w: usize, image_h: usize) -> Result<BoundingBox> {
    let f = mode.fraction();
    if !(0.0..=MAX_PROMPT_FRACTION).contains(&f) {
        return Err(Error::Config(format!("prompt fraction {f} outside [0, {MAX_PROMPT_FRACTION}]")));
    }
    let sign = match mode {
        PromptMode::Shrink(_) => -1.0,
        _ => 1.0,
    };
    let dx = sign * f * gt.width();
    let dy = sign * f * gt.height();
    BoundingBox::new(
        (gt.x_min - dx).max(0.0),
        (gt.y_min - dy).max(0.0),
        (gt.x_max + dx).min(image_w as f64),
        (gt.y_max + dy).min(image_h as f64),
    )
}

/// Anything that turns an image and a box prompt into a binary mask.
pub trait PromptSegmenter: Sync {
    fn segment(&self, image: &ImageGrid, prompt: &BoundingBox) -> Result<BinaryMask>;
}

impl PromptSegmenter for ToyModel {
    fn segment(&self, image: &ImageGrid, prompt: &BoundingBox) -> Result<BinaryMask> {
        Ok(predict(self, image, prompt)?.threshold(PREDICTION_THRESHOLD))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalSummary {
    pub mode: PromptMode,
    pub n: usize,
    pub dsc_mean: f64,
    pub nsd_mean: f64,
    pub tau: f64,
    pub per_image: Vec<MetricReport>,
}

impl EvalSummary {
    /// Fraction of images whose DSC falls below `threshold`.
    pub fn error_rate(&self, threshold: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.per_image.iter().filter(|r| r.dsc < threshold).count() as f64 / self.n as f64
    }
}

/// Macro-averaged DSC and NSD over `samples` under one prompt regime.
pub fn evaluate<M: PromptSegmenter>(model: &M, samples: &[SyntheticSample], mode: PromptMode, tau: f64) -> Result<EvalSummary> {
    let per_image: Vec<MetricReport> = samples
        .par_iter()
        .map(|s| {
            let gt = box_from_mask(&s.mask)?;
            let prompt = prompt_box(&gt, mode, s.image.width(), s.image.height())?;
            let pred = model.segment(&s.image, &prompt)?;
            evaluate_masks(&s.mask, &pred, tau)
        })
        .collect::<Result<_>>()?;
    let n = per_image.len();
    let mean = |f: fn(&MetricReport) -> f64| if n == 0 { 0.0 } else { per_image.iter().map(f).sum::<f64>() / n as f64 };
    Ok(EvalSummary { mode, n, dsc_mean: mean(|r| r.dsc), nsd_mean: mean(|r| r.nsd), tau, per_image })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, Suite};

    struct Oracle(Vec<(ImageGrid, BinaryMask)>);

    impl PromptSegmenter for Oracle {
        fn segment(&self, image: &ImageGrid, _prompt: &BoundingBox) -> Result<BinaryMask> {
            Ok(self.0.iter().find(|(i, _)| i == image).expect("known image").1.clone())
        }
    }

    #[test]
    fn prompt_boxes() {
        let gt = BoundingBox::new(10.0, 20.0, 30.0, 60.0).unwrap();
        assert_eq!(prompt_box(&gt, PromptMode::Standard, 100, 100).unwrap(), gt);
        assert_eq!(prompt_box(&gt, PromptMode::Expand(0.0), 100, 100).unwrap(), gt);
        assert_eq!(prompt_box(&gt, PromptMode::Shrink(0.0), 100, 100).unwrap(), gt);
        assert_eq!(
            prompt_box(&gt, PromptMode::Expand(0.1), 100, 100).unwrap(),
            BoundingBox::new(8.0, 16.0, 32.0, 64.0).unwrap()
        );
        assert_eq!(
            prompt_box(&gt, PromptMode::Shrink(0.1), 100, 100).unwrap(),
            BoundingBox::new(12.0, 24.0, 28.0, 56.0).unwrap()
        );
        assert_eq!(prompt_box(&gt, PromptMode::Expand(0.4), 35, 62).unwrap().x_max, 35.0);
        assert!(prompt_box(&gt, PromptMode::Shrink(0.5), 100, 100).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("standard".parse::<PromptMode>().unwrap(), PromptMode::Standard);
        assert_eq!("shrink:0.1".parse::<PromptMode>().unwrap(), PromptMode::Shrink(0.1));
        assert_eq!("expand:0.25".parse::<PromptMode>().unwrap(), PromptMode::Expand(0.25));
        assert!("grow:0.1".parse::<PromptMode>().is_err());
        assert!("expand".parse::<PromptMode>().is_err());
    }

    #[test]
    fn oracle_scores_perfectly() {
        let d = gen_synthetic(10, Suite::Standard, 48, 1).unwrap();
        let all: Vec<_> = d.train.iter().chain(&d.val).chain(&d.test).cloned().collect();
        let oracle = Oracle(all.iter().map(|s| (s.image.clone(), s.mask.clone())).collect());
        for mode in [PromptMode::Standard, PromptMode::Expand(0.2), PromptMode::Shrink(0.2)] {
            let e = evaluate(&oracle, &all, mode, 2.0).unwrap();
            assert_eq!((e.dsc_mean, e.nsd_mean), (1.0, 1.0));
            assert_eq!(e.error_rate(0.5), 0.0);
        }
    }

    #[test]
    fn zero_fraction_equals_standard() {
        let d = gen_synthetic(10, Suite::Standard, 48, 2).unwrap();
        let m = ToyModel::with_weights([-3.0, 4.0, 2.0, 1.0, -0.5, -0.5]);
        let s = evaluate(&m, &d.train, PromptMode::Standard, 2.0).unwrap();
        let e = evaluate(&m, &d.train, PromptMode::Expand(0.0), 2.0).unwrap();
        let k = evaluate(&m, &d.train, PromptMode::Shrink(0.0), 2.0).unwrap();
        assert_eq!(s.per_image, e.per_image);
        assert_eq!(s.per_image, k.per_image);
    }

    #[test]
    fn zero_model_predicts_nothing() {
        let d = gen_synthetic(10, Suite::Standard, 48, 3).unwrap();
        let e = evaluate(&ToyModel::default(), &d.train, PromptMode::Standard, 2.0).unwrap();
        assert_eq!(e.dsc_mean, 0.0);
        assert_eq!(e.nsd_mean, 0.0);
        assert_eq!(e.error_rate(0.5), 1.0);
    }
}
