use serde::{Deserialize, Serialize};

use super::features::FEATURE_COUNT;
use super::model::exact;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// AdamW moments with decoupled weight decay.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdamWState {
    #[serde(serialize_with = "exact::serialize_array")]
    pub first_moment: [f64; FEATURE_COUNT],
    #[serde(serialize_with = "exact::serialize_array")]
    pub second_moment: [f64; FEATURE_COUNT],
    pub step: u64,
}

impl AdamWState {
    /// One update; decay is applied as `w *= 1 - lr * lambda` before the
    /// adaptive step.
    pub fn update(&mut self, weights: &mut [f64; FEATURE_COUNT], grad: &[f64; FEATURE_COUNT], lr: f64, lambda: f64) {
        self.step += 1;
        let bc1 = 1.0 - BETA1.powi(self.step as i32);
        let bc2 = 1.0 - BETA2.powi(self.step as i32);
        let decay = 1.0 - lr * lambda;
        for i in 0..FEATURE_COUNT {
            self.first_moment[i] = BETA1 * self.first_moment[i] + (1.0 - BETA1) * grad[i];
            self.second_moment[i] = BETA2 * self.second_moment[i] + (1.0 - BETA2) * grad[i] * grad[i];
            let m_hat = self.first_moment[i] / bc1;
            let v_hat = self.second_moment[i] / bc2;
            weights[i] *= decay;
            weights[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

/// Multiplies the rate by `factor` once the monitored loss has failed to
/// improve for `patience` consecutive epochs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauScheduler {
    pub lr: f64,
    pub factor: f64,
    pub patience: u32,
    pub min_lr: f64,
    best: f64,
    bad_epochs: u32,
}

impl PlateauScheduler {
    pub fn new(lr: f64, factor: f64, patience: u32, min_lr: f64) -> Self {
        Self { lr, factor, patience, min_lr, best: f64::INFINITY, bad_epochs: 0 }
    }

    /// Feed one epoch's loss; returns the rate for the next epoch.
    pub fn step(&mut self, loss: f64) -> f64 {
        if loss < self.best {
            self.best = loss;
            self.bad_epochs = 0;
        } else {
            self.bad_epochs += 1;
            if self.bad_epochs >= self.patience {
                self.lr = (self.lr * self.factor).max(self.min_lr);
                self.bad_epochs = 0;
            }
        }
        self.lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_without_decay_is_identity() {
        let mut w = [0.3, -1.2, 4.0, 0.0, 2.5, -0.1];
        let before = w;
        let mut s = AdamWState::default();
        s.update(&mut w, &[0.0; 6], 0.01, 0.0);
        assert_eq!(w, before);
    }

    #[test]
    fn zero_gradient_decay_shrinks_exactly() {
        let mut w = [0.3, -1.2, 4.0, 0.0, 2.5, -0.1];
        let before = w;
        let mut s = AdamWState::default();
        let (lr, lambda) = (0.01, 0.5);
        s.update(&mut w, &[0.0; 6], lr, lambda);
        for i in 0..6 {
            assert_eq!(w[i], before[i] * (1.0 - lr * lambda));
        }
    }

    #[test]
    fn first_step_moves_by_lr() {
        // bias-corrected first step is lr * g / (|g| + eps)
        let mut w = [0.0; 6];
        let mut s = AdamWState::default();
        s.update(&mut w, &[2.0, -3.0, 0.0, 0.0, 0.0, 0.0], 0.1, 0.0);
        assert!((w[0] + 0.1).abs() < 1e-8);
        assert!((w[1] - 0.1).abs() < 1e-8);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn plateau_reduces_after_patience() {
        let mut s = PlateauScheduler::new(0.01, 0.5, 3, 1e-6);
        assert_eq!(s.step(1.0), 0.01);
        assert_eq!(s.step(0.9), 0.01);
        assert_eq!(s.step(0.95), 0.01);
        assert_eq!(s.step(0.9), 0.01);
        assert_eq!(s.step(0.91), 0.005);
        assert_eq!(s.step(0.92), 0.005);
        assert_eq!(s.step(0.5), 0.005);
    }

    #[test]
    fn plateau_respects_floor() {
        let mut s = PlateauScheduler::new(1e-6, 0.5, 1, 1e-6);
        s.step(1.0);
        assert_eq!(s.step(1.0), 1e-6);
    }
}
