//! Ablation table on the standard and tiny synthetic suites.

use boxperturb::ablation::{run_ablation, AblationOptions};
use boxperturb::data::{gen_synthetic_split, SplitSpec, Suite};
use boxperturb::toyseg::TrainConfig;

fn main() -> boxperturb::Result<()> {
    let split = SplitSpec::Counts { train: 200, val: 25, test: 50 };
    let standard = gen_synthetic_split(275, Suite::Standard, 128, 2024, split)?;
    let tiny = gen_synthetic_split(275, Suite::Tiny, 128, 2024, split)?;
    let table = run_ablation(&standard, &tiny, &TrainConfig { seed: 7, ..Default::default() }, &AblationOptions::default())?;
    println!("{:<16}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>8}", "row", "dsc_std", "nsd_std", "dsc_exp", "nsd_exp", "dsc_shr", "nsd_shr", "err");
    for r in &table.records {
        println!(
            "{:<16}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>8.3}",
            r.row.to_string(), r.standard.dsc, r.standard.nsd, r.expand.dsc, r.expand.nsd, r.shrink.dsc, r.shrink.nsd, r.error_rate
        );
    }
    println!("error rate: fraction of tiny-suite test images with DSC < {}", table.options.error_dsc_threshold);
    Ok(())
}
