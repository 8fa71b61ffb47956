use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{featurize, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use super::optim::AdamWState;
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Grid, ImageGrid};
use crate::loss::{clip, ProbabilityMap};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ToyModel {
    pub weights: [f64; FEATURE_COUNT],
    pub optimizer: AdamWState,
}

#[inline]
pub(crate) fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[inline]
pub(crate) fn dot(w: &[f64; FEATURE_COUNT], f: &FeatureVector) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

impl ToyModel {
    pub fn with_weights(weights: [f64; FEATURE_COUNT]) -> Self {
        Self { weights, optimizer: AdamWState::default() }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    pub fn predict_features(&self, features: &Grid<FeatureVector>) -> ProbabilityMap {
        ProbabilityMap::new(features.map(|f| logistic(dot(&self.weights, f))))
    }

    pub fn to_json<C: Serialize>(&self, train_config: &C) -> Result<String> {
        if !self.is_finite() {
            return Err(Error::Model("refusing to serialize non-finite weights".into()));
        }
        let doc = ModelDocument {
            schema_version: MODEL_SCHEMA_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            weights: self.weights,
            optimizer_state: self.optimizer.clone(),
            train_config_echo: serde_json::to_value(train_config)?,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parse a model document; returns the model and the echoed config.
    pub fn from_json(text: &str) -> Result<(Self, serde_json::Value)> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Model(format!("unsupported schema_version {}", doc.schema_version)));
        }
        if doc.feature_names != FEATURE_NAMES {
            return Err(Error::Model(format!("unexpected feature names {:?}", doc.feature_names)));
        }
        Ok((Self { weights: doc.weights, optimizer: doc.optimizer_state }, doc.train_config_echo))
    }

    pub fn save<C: Serialize>(&self, path: impl AsRef<Path>, train_config: &C) -> Result<()> {
        fs::write(path, self.to_json(train_config)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, serde_json::Value)> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// `p_i = logistic(w . f_i)`, clipped.
pub fn predict(model: &ToyModel, image: &ImageGrid, prompt: &BoundingBox) -> Result<ProbabilityMap> {
    Ok(model.predict_features(&featurize(image, prompt)?))
}

/// Unclipped probabilities and whether each one sits inside the clip range.
pub(crate) fn forward(weights: &[f64; FEATURE_COUNT], features: &Grid<FeatureVector>) -> (Vec<f64>, Vec<f64>) {
    let raw: Vec<f64> = features.as_slice().iter().map(|f| logistic(dot(weights, f))).collect();
    let clipped = raw.iter().map(|&p| clip(p)).collect();
    (raw, clipped)
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    schema_version: u32,
    feature_names: Vec<String>,
    #[serde(serialize_with = "exact::serialize_array")]
    weights: [f64; FEATURE_COUNT],
    optimizer_state: AdamWState,
    train_config_echo: serde_json::Value,
}

/// Floats written with 17 significant digits.
pub(crate) mod exact {
    use serde::ser::{Error as _, SerializeSeq};
    use serde::Serializer;
    use serde_json::value::RawValue;

    pub fn format(v: f64) -> String {
        format!("{v:.16e}")
    }

    pub fn serialize_array<S: Serializer, const N: usize>(values: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(N))?;
        for &v in values {
            if !v.is_finite() {
                return Err(S::Error::custom("non-finite value"));
            }
            let raw = RawValue::from_string(format(v)).map_err(S::Error::custom)?;
            seq.serialize_element(&raw)?;
        }
        seq.end()
    }
}
