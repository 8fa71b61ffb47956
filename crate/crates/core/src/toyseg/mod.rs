//! Prompt-conditioned per-pixel logistic segmenter.
//!
//! Small enough to train in seconds on the CPU, yet sensitive to the prompt
//! box in the same way a promptable segmenter is: pixels are scored from their
//! intensity and their position relative to the box.

pub mod eval;
pub mod features;
pub mod model;
pub mod optim;
pub mod train;

pub use eval::{evaluate, prompt_box, EvalSummary, PromptMode, PromptSegmenter, DEFAULT_ERROR_DSC_THRESHOLD};
pub use features::{featurize, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use model::{predict, ToyModel, MODEL_SCHEMA_VERSION};
pub use optim::{AdamWState, PlateauScheduler};
pub use train::{train, train_step, EpochRecord, TrainConfig, TrainOutcome};
