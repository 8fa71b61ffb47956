//! Loss components and their analytic gradient against a finite difference.

use boxperturb::geometry::{BinaryMask, Grid};
use boxperturb::loss::{combined_loss, final_loss, loss_gradient, ProbabilityMap};

fn main() -> boxperturb::Result<()> {
    let target = BinaryMask::from_fn(4, 4, |r, c| r >= 1 && c >= 1 && r <= 2 && c <= 2)?;
    let probs = ProbabilityMap::new(Grid::from_fn(4, 4, |r, c| if *target.get(r, c) { 0.8 } else { 0.1 + 0.05 * c as f64 })?);

    let report = final_loss(&probs, &target, &[0.5, -1.0, 2.0], 1e-2)?;
    println!("bce {:.6}  dice {:.6}  combined {:.6}", report.bce, report.dice, report.combined);
    println!("penalty {:.6}  final {:.6}", report.wd_penalty, report.final_loss);

    let grad = loss_gradient(&probs, &target)?;
    let h = 1e-6;
    println!("\npixel   analytic      central difference");
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 3)] {
        let nudge = |delta: f64| -> boxperturb::Result<f64> {
            let mut g = probs.grid().clone();
            g.set(r, c, g.get(r, c) + delta);
            Ok(combined_loss(&ProbabilityMap::new(g), &target)?.combined)
        };
        let fd = (nudge(h)? - nudge(-h)?) / (2.0 * h);
        println!("({r},{c})  {:+.8}  {:+.8}", grad.get(r, c), fd);
    }
    Ok(())
}
