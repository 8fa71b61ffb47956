use boxperturb::data::{gen_synthetic, Suite};
use boxperturb::perturb::PerturberKind;
use boxperturb::toyseg::{evaluate, train, PromptMode, TrainConfig};

fn main() -> boxperturb::Result<()> {
    let data = gen_synthetic(150, Suite::Standard, 96, 21)?;
    let modes = [PromptMode::Standard, PromptMode::Expand(0.1), PromptMode::Expand(0.2), PromptMode::Shrink(0.1), PromptMode::Shrink(0.2)];
    print!("{:<22}", "trained with");
    for m in &modes {
        print!("{:>14}", m.to_string());
    }
    println!();
    for kind in [PerturberKind::None, PerturberKind::Baseline, PerturberKind::Adaptive] {
        let model = train(&data, &TrainConfig { epochs: 8, perturber: kind, seed: 3, ..Default::default() })?.model;
        print!("{:<22}", kind.as_str());
        for &m in &modes {
            let e = evaluate(&model, &data.test, m, 2.0)?;
            print!("{:>14}", format!("{:.3}/{:.3}", e.dsc_mean, e.nsd_mean));
        }
        println!();
    }
    println!("cells are mean DSC / NSD at tau 2");
    Ok(())
}
