//! Run configuration read from `key = value` text files.
//!
//! Blank lines and lines starting with `#` or `;` are ignored. Unknown keys
//! and repeated keys are errors; missing keys keep their defaults.
//!
//! | key | default |
//! |-----|---------|
//! | `eps_shrink` | -20 |
//! | `delta_expand` | 20 |
//! | `eps_shrink_min` | -20 |
//! | `delta_expand_max` | 20 |
//! | `theta_floor` | 0.01 |
//! | `min_box_size` | 1 |
//! | `max_resample` | 10 |
//! | `baseline_max_shift` | 20 |
//! | `tau` | 2 |
//! | `lambda` | 1e-4 |
//! | `lr` | 0.01 |
//! | `epochs` | 20 |
//! | `scheduler_factor` | 0.5 |
//! | `scheduler_patience` | 3 |
//! | `scheduler_min_lr` | 1e-6 |
//! | `seed` | 0 |
//! | `perturber` | adaptive |
//! | `suite` | standard |
//! | `prompt_fraction` | 0.1 |
//! | `error_dsc_threshold` | 0.5 |

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::ablation::{AblationOptions, DEFAULT_PROMPT_FRACTION};
use crate::data::Suite;
use crate::toyseg::eval::MAX_PROMPT_FRACTION;
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_TAU;
use crate::perturb::PerturbationConfig;
use crate::toyseg::{TrainConfig, DEFAULT_ERROR_DSC_THRESHOLD};

pub const KEYS: [&str; 20] = [
    "eps_shrink",
    "delta_expand",
    "eps_shrink_min",
    "delta_expand_max",
    "theta_floor",
    "min_box_size",
    "max_resample",
    "baseline_max_shift",
    "tau",
    "lambda",
    "lr",
    "epochs",
    "scheduler_factor",
    "scheduler_patience",
    "scheduler_min_lr",
    "seed",
    "perturber",
    "suite",
    "prompt_fraction",
    "error_dsc_threshold",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub tau: f64,
    pub suite: Suite,
    pub prompt_fraction: f64,
    pub error_dsc_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            tau: DEFAULT_TAU,
            suite: Suite::Standard,
            prompt_fraction: DEFAULT_PROMPT_FRACTION,
            error_dsc_threshold: DEFAULT_ERROR_DSC_THRESHOLD,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("line {line}: invalid value '{raw}' for '{key}'")))
}

impl RunConfig {
    pub fn perturbation(&self) -> &PerturbationConfig {
        &self.train.perturbation
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (i, raw_line) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {n}: expected 'key = value'")))?;
            let (key, raw) = (key.trim(), raw.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {n}: unknown key '{key}'")));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {n}: duplicate key '{key}'")));
            }
            cfg.set(key, raw, n)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, raw: &str, n: usize) -> Result<()> {
        let t = &mut self.train;
        let p = &mut t.perturbation;
        match key {
            "eps_shrink" => p.eps_shrink = value(key, raw, n)?,
            "delta_expand" => p.delta_expand = value(key, raw, n)?,
            "eps_shrink_min" => p.eps_shrink_min = value(key, raw, n)?,
            "delta_expand_max" => p.delta_expand_max = value(key, raw, n)?,
            "theta_floor" => p.theta_floor = value(key, raw, n)?,
            "min_box_size" => p.min_box_size = value(key, raw, n)?,
            "max_resample" => p.max_resample = value(key, raw, n)?,
            "baseline_max_shift" => t.baseline_max_shift = value(key, raw, n)?,
            "tau" => self.tau = value(key, raw, n)?,
            "lambda" => t.lambda = value(key, raw, n)?,
            "lr" => t.lr = value(key, raw, n)?,
            "epochs" => t.epochs = value(key, raw, n)?,
            "scheduler_factor" => t.scheduler_factor = value(key, raw, n)?,
            "scheduler_patience" => t.scheduler_patience = value(key, raw, n)?,
            "scheduler_min_lr" => t.scheduler_min_lr = value(key, raw, n)?,
            "seed" => t.seed = value(key, raw, n)?,
            "perturber" => t.perturber = raw.parse().map_err(|_| Error::Config(format!("line {n}: unknown perturber '{raw}'")))?,
            "suite" => self.suite = raw.parse().map_err(|_| Error::Config(format!("line {n}: unknown suite '{raw}'")))?,
            "prompt_fraction" => self.prompt_fraction = value(key, raw, n)?,
            "error_dsc_threshold" => self.error_dsc_threshold = value(key, raw, n)?,
            _ => unreachable!("key list and setter disagree"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau {} must be >= 0", self.tau)));
        }
        if !(0.0..=MAX_PROMPT_FRACTION).contains(&self.prompt_fraction) {
            return Err(Error::Config(format!("prompt_fraction {} outside [0, {MAX_PROMPT_FRACTION}]", self.prompt_fraction)));
        }
        if !(0.0..=1.0).contains(&self.error_dsc_threshold) {
            return Err(Error::Config(format!("error_dsc_threshold {} outside [0, 1]", self.error_dsc_threshold)));
        }
        Ok(())
    }

    /// Every key with its resolved value, in documented order.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        let p = &t.perturbation;
        let vals = [
            p.eps_shrink.to_string(),
            p.delta_expand.to_string(),
            p.eps_shrink_min.to_string(),
            p.delta_expand_max.to_string(),
            p.theta_floor.to_string(),
            p.min_box_size.to_string(),
            p.max_resample.to_string(),
            t.baseline_max_shift.to_string(),
            self.tau.to_string(),
            t.lambda.to_string(),
            t.lr.to_string(),
            t.epochs.to_string(),
            t.scheduler_factor.to_string(),
            t.scheduler_patience.to_string(),
            t.scheduler_min_lr.to_string(),
            t.seed.to_string(),
            t.perturber.to_string(),
            self.suite.to_string(),
            self.prompt_fraction.to_string(),
            self.error_dsc_threshold.to_string(),
        ];
        KEYS.into_iter().zip(vals).collect()
    }

    /// The resolved config in file syntax; `parse` reads it back unchanged.
    pub fn to_text(&self) -> String {
        self.resolved().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map = self.resolved().into_iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v))).collect();
        serde_json::Value::Object(map)
    }

    pub fn ablation_options(&self) -> AblationOptions {
        AblationOptions {
            tau: self.tau,
            prompt_fraction: self.prompt_fraction,
            error_dsc_threshold: self.error_dsc_threshold,
            ..AblationOptions::default()
        }
    }
}
