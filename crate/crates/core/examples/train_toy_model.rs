//! Train the toy segmenter with adaptive box perturbation and save it.

use boxperturb::data::{gen_synthetic, Suite};
use boxperturb::toyseg::{evaluate, train, PromptMode, ToyModel, TrainConfig, FEATURE_NAMES};

fn main() -> boxperturb::Result<()> {
    let data = gen_synthetic(120, Suite::Standard, 96, 5)?;
    let cfg = TrainConfig { epochs: 10, seed: 1, ..Default::default() };
    let out = train(&data, &cfg)?;

    println!("initial val loss {:.4}", out.initial_val_loss);
    for r in &out.history {
        println!("epoch {:>2}  train {:.4}  val {:.4}  lr {:.2e}", r.epoch, r.train_loss, r.val_loss, r.lr);
    }
    for (name, w) in FEATURE_NAMES.iter().zip(out.model.weights) {
        println!("{name:<22} {w:+.4}");
    }
    let e = evaluate(&out.model, &data.test, PromptMode::Standard, 2.0)?;
    println!("test: dsc {:.4} nsd {:.4} over {} images", e.dsc_mean, e.nsd_mean, e.n);

    let path = std::env::temp_dir().join("boxperturb_toy_model.json");
    out.model.save(&path, &cfg)?;
    let (back, _) = ToyModel::load(&path)?;
    assert_eq!(back.weights, out.model.weights);
    println!("saved to {}", path.display());
    Ok(())
}
