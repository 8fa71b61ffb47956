use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::{featurize, FeatureVector, FEATURE_COUNT};
use super::model::{forward, ToyModel};
use super::optim::PlateauScheduler;
use crate::data::{DatasetSplit, SyntheticSample};
use crate::error::{Error, Result};
use crate::geometry::{box_from_mask, BinaryMask, BoundingBox, Grid, ImageGrid};
use crate::loss::{combined_loss, final_loss, gradient_values, LossReport, ProbabilityMap, CLIP_EPS, DEFAULT_LAMBDA};
use crate::perturb::{PerturbationConfig, Perturber, PerturberKind, DEFAULT_BASELINE_MAX_SHIFT};
use crate::rng::{stream, Domain};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: u32,
    pub lr: f64,
    pub lambda: f64,
    pub scheduler_factor: f64,
    pub scheduler_patience: u32,
    pub scheduler_min_lr: f64,
    pub perturber: PerturberKind,
    pub perturbation: PerturbationConfig,
    pub baseline_max_shift: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            lr: 0.01,
            lambda: DEFAULT_LAMBDA,
            scheduler_factor: 0.5,
            scheduler_patience: 3,
            scheduler_min_lr: 1e-6,
            perturber: PerturberKind::Adaptive,
            perturbation: PerturbationConfig::default(),
            baseline_max_shift: DEFAULT_BASELINE_MAX_SHIFT,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.epochs < 1 {
            return bad("epochs must be >= 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr {} must be > 0", self.lr));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda {} must be >= 0", self.lambda));
        }
        if !(self.scheduler_factor > 0.0 && self.scheduler_factor < 1.0) {
            return bad(format!("scheduler_factor {} outside (0, 1)", self.scheduler_factor));
        }
        if self.scheduler_patience < 1 {
            return bad("scheduler_patience must be >= 1".into());
        }
        if !(self.scheduler_min_lr >= 0.0) {
            return bad(format!("scheduler_min_lr {} must be >= 0", self.scheduler_min_lr));
        }
        if !(self.baseline_max_shift >= 0.0 && self.baseline_max_shift.is_finite()) {
            return bad(format!("baseline_max_shift {} must be >= 0", self.baseline_max_shift));
        }
        self.perturbation.validate()
    }

    pub fn perturber(&self) -> Perturber {
        Perturber { baseline_max_shift: self.baseline_max_shift, ..Perturber::new(self.perturber, self.perturbation) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: u32,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Rate used during this epoch.
    pub lr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: ToyModel,
    /// Validation loss of the initial model, before any update.
    pub initial_val_loss: f64,
    pub history: Vec<EpochRecord>,
}

/// Gradient of `L_BCE + L_Dice` with respect to the model weights, plus the
/// loss report at the current weights.
pub fn weight_gradient(
    weights: &[f64; FEATURE_COUNT],
    features: &Grid<FeatureVector>,
    mask: &BinaryMask,
    lambda: f64,
) -> Result<([f64; FEATURE_COUNT], LossReport)> {
    features.same_dims(mask)?;
    let (raw, clipped) = forward(weights, features);
    let (w, h) = mask.dims();
    let probs = ProbabilityMap::unclipped(Grid::from_vec(w, h, clipped)?);
    let report = final_loss(&probs, mask, weights, lambda)?;
    let d_prob = gradient_values(probs.as_slice(), mask.as_slice());
    let mut grad = [0.0; FEATURE_COUNT];
    for ((f, &p), &dp) in features.as_slice().iter().zip(&raw).zip(&d_prob) {
        // the clip is flat outside its range
        if p <= CLIP_EPS || p >= 1.0 - CLIP_EPS {
            continue;
        }
        let dz = dp * p * (1.0 - p);
        for k in 0..FEATURE_COUNT {
            grad[k] += dz * f[k];
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    Ok((grad, report))
}

/// One AdamW step on a single image; the returned loss is measured before
/// the update.
pub fn train_step(
    model: &mut ToyModel,
    image: &ImageGrid,
    mask: &BinaryMask,
    prompt: &BoundingBox,
    lambda: f64,
    lr: f64,
) -> Result<LossReport> {
    let features = featurize(image, prompt)?;
    let (grad, report) = weight_gradient(&model.weights, &features, mask, lambda)?;
    model.optimizer.update(&mut model.weights, &grad, lr, lambda);
    Ok(report)
}

fn mean_val_loss(model: &ToyModel, val: &[SyntheticSample]) -> Result<f64> {
    let mut total = 0.0;
    for s in val {
        let b = box_from_mask(&s.mask)?;
        let probs = super::model::predict(model, &s.image, &b)?;
        total += combined_loss(&probs, &s.mask)?.combined;
    }
    Ok(total / val.len() as f64)
}

pub fn train(dataset: &DatasetSplit, config: &TrainConfig) -> Result<TrainOutcome> {
    train_on(&dataset.train, &dataset.val, config)
}

/// Batch size one: every step sees one image whose ground-truth box has been
/// redrawn through the configured perturber for this epoch.
pub fn train_on(train: &[SyntheticSample], val: &[SyntheticSample], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset("train"));
    }
    if val.is_empty() {
        return Err(Error::EmptyDataset("val"));
    }
    let perturber = config.perturber();
    let boxes: Vec<BoundingBox> = train.iter().map(|s| box_from_mask(&s.mask)).collect::<Result<_>>()?;

    let mut model = ToyModel::default();
    let mut scheduler =
        PlateauScheduler::new(config.lr, config.scheduler_factor, config.scheduler_patience, config.scheduler_min_lr);
    let initial_val_loss = mean_val_loss(&model, val)?;
    let mut history = Vec::with_capacity(config.epochs as usize);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut stream(config.seed, Domain::Train, epoch as u64));
        let lr = scheduler.lr;
        let mut train_total = 0.0;
        for &i in &order {
            let s = &train[i];
            let mut rng = stream(config.seed, Domain::Perturb, ((epoch as u64) << 32) | s.index as u64);
            let prompt = perturber.perturb(&boxes[i], s.image.width(), s.image.height(), &mut rng)?.bbox;
            train_total += train_step(&mut model, &s.image, &s.mask, &prompt, config.lambda, lr)?.combined;
        }
        let val_loss = mean_val_loss(&model, val)?;
        history.push(EpochRecord { epoch, train_loss: train_total / train.len() as f64, val_loss, lr });
        scheduler.step(val_loss);
    }
    Ok(TrainOutcome { model, initial_val_loss, history })
}
