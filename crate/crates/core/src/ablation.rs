//! Ablation harness: one trainer configuration per row, evaluated under the
//! standard, expanded and shrunk prompt regimes, plus the small-target
//! error rate.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DatasetSplit;
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_TAU;
use crate::perturb::PerturberKind;
use crate::toyseg::{evaluate, train, PromptMode, TrainConfig, TrainOutcome, DEFAULT_ERROR_DSC_THRESHOLD};

pub const DEFAULT_PROMPT_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationRow {
    /// Fixed-range expand-only perturbation.
    Baseline,
    /// Size/aspect-scaled expansion, no shrinkage.
    ThetaXi,
    /// Unscaled shrink and expand factors.
    Bidirectional,
    /// Scaled shrink and expand factors.
    Full,
}

impl AblationRow {
    pub const ALL: [AblationRow; 4] = [AblationRow::Baseline, AblationRow::ThetaXi, AblationRow::Bidirectional, AblationRow::Full];

    pub fn perturber(&self) -> PerturberKind {
        match self {
            AblationRow::Baseline => PerturberKind::Baseline,
            AblationRow::ThetaXi => PerturberKind::AdaptiveScaledOnly,
            AblationRow::Bidirectional => PerturberKind::BidirectionalOnly,
            AblationRow::Full => PerturberKind::Adaptive,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationRow::Baseline => "baseline",
            AblationRow::ThetaXi => "+theta_xi",
            AblationRow::Bidirectional => "+bidirectional",
            AblationRow::Full => "full",
        }
    }
}

impl fmt::Display for AblationRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationRow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AblationRow::ALL
            .into_iter()
            .find(|r| r.as_str() == s || r.as_str().trim_start_matches('+') == s)
            .ok_or_else(|| Error::Config(format!("unknown ablation row '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationOptions {
    pub rows: Vec<AblationRow>,
    pub tau: f64,
    pub prompt_fraction: f64,
    pub error_dsc_threshold: f64,
}

impl Default for AblationOptions {
    fn default() -> Self {
        Self {
            rows: AblationRow::ALL.to_vec(),
            tau: DEFAULT_TAU,
            prompt_fraction: DEFAULT_PROMPT_FRACTION,
            error_dsc_threshold: DEFAULT_ERROR_DSC_THRESHOLD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeScores {
    pub dsc: f64,
    pub nsd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRecord {
    pub row: AblationRow,
    pub standard: RegimeScores,
    pub expand: RegimeScores,
    pub shrink: RegimeScores,
    /// Standard-suite test images evaluated.
    pub n: usize,
    /// Fraction of tiny-suite test images with DSC below the threshold.
    pub error_rate: f64,
    pub n_tiny: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationTable {
    pub options: AblationOptions,
    pub records: Vec<AblationRecord>,
}

impl AblationTable {
    pub fn get(&self, row: AblationRow) -> Option<&AblationRecord> {
        self.records.iter().find(|r| r.row == row)
    }

    pub const CSV_HEADER: [&'static str; 10] = [
        "row",
        "dsc_standard",
        "nsd_standard",
        "dsc_expand",
        "nsd_expand",
        "dsc_shrink",
        "nsd_shrink",
        "error_rate",
        "n",
        "n_tiny",
    ];

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    r.row.to_string(),
                    r.standard.dsc.to_string(),
                    r.standard.nsd.to_string(),
                    r.expand.dsc.to_string(),
                    r.expand.nsd.to_string(),
                    r.shrink.dsc.to_string(),
                    r.shrink.nsd.to_string(),
                    r.error_rate.to_string(),
                    r.n.to_string(),
                    r.n_tiny.to_string(),
                ]
            })
            .collect()
    }
}

fn row_config(base: &TrainConfig, row: AblationRow) -> TrainConfig {
    TrainConfig { perturber: row.perturber(), ..base.clone() }
}

/// Models trained for one row: one per suite.
pub struct RowModels {
    pub standard: TrainOutcome,
    pub tiny: TrainOutcome,
}

pub fn train_row(standard: &DatasetSplit, tiny: &DatasetSplit, base: &TrainConfig, row: AblationRow) -> Result<RowModels> {
    let cfg = row_config(base, row);
    Ok(RowModels { standard: train(standard, &cfg)?, tiny: train(tiny, &cfg)? })
}

/// Every row trains from the same data and seeds, so rows differ only in
/// the perturber.
pub fn run_ablation(
    standard: &DatasetSplit,
    tiny: &DatasetSplit,
    base: &TrainConfig,
    options: &AblationOptions,
) -> Result<AblationTable> {
    if options.rows.is_empty() {
        return Err(Error::Config("no ablation rows requested".into()));
    }
    for (name, d) in [("standard", standard), ("tiny", tiny)] {
        d.check()?;
        if d.test.is_empty() {
            return Err(Error::EmptyDataset(if name == "standard" { "standard test" } else { "tiny test" }));
        }
    }
    let f = options.prompt_fraction;
    let records = options
        .rows
        .par_iter()
        .map(|&row| {
            let models = train_row(standard, tiny, base, row)?;
            let score = |mode| -> Result<RegimeScores> {
                let e = evaluate(&models.standard.model, &standard.test, mode, options.tau)?;
                Ok(RegimeScores { dsc: e.dsc_mean, nsd: e.nsd_mean })
            };
            let tiny_eval = evaluate(&models.tiny.model, &tiny.test, PromptMode::Standard, options.tau)?;
            Ok(AblationRecord {
                row,
                standard: score(PromptMode::Standard)?,
                expand: score(PromptMode::Expand(f))?,
                shrink: score(PromptMode::Shrink(f))?,
                n: standard.test.len(),
                error_rate: tiny_eval.error_rate(options.error_dsc_threshold),
                n_tiny: tiny_eval.n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationTable { options: options.clone(), records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, Suite};

    #[test]
    fn row_names() {
        for r in AblationRow::ALL {
            assert_eq!(r.as_str().parse::<AblationRow>().unwrap(), r);
        }
        assert_eq!("theta_xi".parse::<AblationRow>().unwrap(), AblationRow::ThetaXi);
        assert!("everything".parse::<AblationRow>().is_err());
    }

    #[test]
    fn small_table_has_requested_rows() {
        let s = gen_synthetic(20, Suite::Standard, 48, 1).unwrap();
        let t = gen_synthetic(20, Suite::Tiny, 64, 1).unwrap();
        let base = TrainConfig { epochs: 2, ..Default::default() };
        let opts = AblationOptions { rows: vec![AblationRow::Full, AblationRow::Baseline], ..Default::default() };
        let table = run_ablation(&s, &t, &base, &opts).unwrap();
        assert_eq!(table.records.iter().map(|r| r.row).collect::<Vec<_>>(), opts.rows);
        for r in &table.records {
            for v in [r.standard.dsc, r.standard.nsd, r.expand.dsc, r.shrink.nsd, r.error_rate] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
        assert_eq!(table.csv_rows().len(), 2);
    }
}
