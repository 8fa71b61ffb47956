//! Every perturber kind applied to the same small and large boxes.

use boxperturb::geometry::BoundingBox;
use boxperturb::perturb::{PerturbationConfig, Perturber, PerturberKind, StatsAccumulator};
use boxperturb::rng::{stream, Domain};

fn main() -> boxperturb::Result<()> {
    let (w, h) = (256, 256);
    let small = BoundingBox::new(120.0, 120.0, 130.0, 126.0)?;
    let large = BoundingBox::new(40.0, 60.0, 200.0, 180.0)?;
    println!("{:<24}{:>22}{:>22}", "perturber", "small 10x6", "large 160x120");
    for kind in PerturberKind::ALL {
        let p = Perturber::new(kind, PerturbationConfig::default());
        let mut cells = Vec::new();
        for b in [small, large] {
            let mut rng = stream(3, Domain::Perturb, 0);
            let mut acc = StatsAccumulator::default();
            for _ in 0..5000 {
                acc.push(&b, &p.perturb(&b, w, h, &mut rng)?);
            }
            let s = acc.finish();
            cells.push(format!("{:.1}x{:.1} ({:.0}% up)", s.mean_width, s.mean_height, 100.0 * s.expand_fraction));
        }
        println!("{:<24}{:>22}{:>22}", kind.as_str(), cells[0], cells[1]);
    }
    Ok(())
}
