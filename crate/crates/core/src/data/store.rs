//! On-disk dataset layout: numbered `NNNN.f32g` image and `NNNN.pgm` mask
//! pairs next to a `manifest.json` that records the split.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::f32grid::{read_f32_grid, write_f32_grid, F32Grid};
use super::pgm::{read_mask_pgm, write_mask_pgm};
use super::synth::{DatasetSplit, Suite, SyntheticSample};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub image: String,
    pub mask: String,
    pub distractor_count: usize,
    pub target_area_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub suite: Suite,
    pub grid: usize,
    pub seed: u64,
    pub n: usize,
    pub train: Vec<ManifestEntry>,
    pub val: Vec<ManifestEntry>,
    pub test: Vec<ManifestEntry>,
}

fn entry(s: &SyntheticSample) -> ManifestEntry {
    ManifestEntry {
        index: s.index,
        image: format!("{:04}.f32g", s.index),
        mask: format!("{:04}.pgm", s.index),
        distractor_count: s.distractor_count,
        target_area_fraction: s.target_area_fraction,
    }
}

impl Manifest {
    pub fn for_split(d: &DatasetSplit) -> Self {
        Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            suite: d.suite,
            grid: d.grid,
            seed: d.seed,
            n: d.len(),
            train: d.train.iter().map(entry).collect(),
            val: d.val.iter().map(entry).collect(),
            test: d.test.iter().map(entry).collect(),
        }
    }
}

/// Writes every sample and the manifest; returns the paths created, manifest
/// last.
pub fn write_dataset_dir(d: &DatasetSplit, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let manifest = Manifest::for_split(d);
    let mut written = Vec::with_capacity(2 * d.len() + 1);
    for (s, e) in d.train.iter().chain(&d.val).chain(&d.test).zip(manifest.train.iter().chain(&manifest.val).chain(&manifest.test)) {
        let image = dir.join(&e.image);
        written.push(image.clone());
        write_f32_grid(&image, &s.image.map(|&v| v as f32))?;
        let mask = dir.join(&e.mask);
        written.push(mask.clone());
        write_mask_pgm(&mask, &s.mask)?;
    }
    let path = dir.join(MANIFEST_FILE);
    written.push(path.clone());
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(written)
}

fn load_entry(dir: &Path, e: &ManifestEntry, grid: usize) -> Result<SyntheticSample> {
    let raw: F32Grid = read_f32_grid(dir.join(&e.image))?;
    let mask = read_mask_pgm(dir.join(&e.mask))?;
    if raw.dims() != mask.dims() {
        return Err(Error::DimensionMismatch { left: raw.dims(), right: mask.dims() });
    }
    if raw.dims() != (grid, grid) {
        return Err(Error::SizeMismatch { declared: grid * grid, actual: raw.len() });
    }
    Ok(SyntheticSample {
        index: e.index,
        image: raw.map(|&v| v as f64),
        mask,
        distractor_count: e.distractor_count,
        target_area_fraction: e.target_area_fraction,
    })
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    let text = fs::read_to_string(dir.as_ref().join(MANIFEST_FILE))?;
    let m: Manifest = serde_json::from_str(&text)?;
    if m.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported manifest schema_version {}", m.schema_version)));
    }
    Ok(m)
}

pub fn read_dataset_dir(dir: impl AsRef<Path>) -> Result<DatasetSplit> {
    let dir = dir.as_ref();
    let m = read_manifest(dir)?;
    let load = |es: &[ManifestEntry]| es.iter().map(|e| load_entry(dir, e, m.grid)).collect::<Result<Vec<_>>>();
    Ok(DatasetSplit { suite: m.suite, grid: m.grid, seed: m.seed, train: load(&m.train)?, val: load(&m.val)?, test: load(&m.test)? })
}
