//! Synthetic datasets, CT-style preprocessing and on-disk formats.

pub mod f32grid;
pub mod pgm;
pub mod preprocess;
pub mod store;
pub mod synth;

pub use f32grid::{decode_f32_grid, encode_f32_grid, read_f32_grid, write_f32_grid, F32Grid};
pub use pgm::{decode_mask_pgm, encode_mask_pgm, read_mask_pgm, write_mask_pgm};
pub use preprocess::{ABDOMEN_WINDOW, LUNG_WINDOW, resample_bilinear, resample_nearest, window_normalize};
pub use store::{read_dataset_dir, read_manifest, write_dataset_dir, Manifest, ManifestEntry, MANIFEST_FILE};
pub use synth::{gen_synthetic, gen_synthetic_split, DatasetSplit, SplitSpec, Suite, SyntheticSample};
