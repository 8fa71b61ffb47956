pub mod ablation;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod geometry;
pub mod loss;
pub mod metrics;
pub mod perturb;
pub mod rng;
pub mod toyseg;

pub use error::{Error, Result};
