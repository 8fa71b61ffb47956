use boxperturb::data::{gen_synthetic, Suite};
use boxperturb::geometry::box_from_mask;

fn main() -> boxperturb::Result<()> {
    for suite in [Suite::Standard, Suite::Tiny] {
        let d = gen_synthetic(40, suite, 128, 11)?;
        let areas: Vec<f64> = d.train.iter().map(|s| s.target_area_fraction).collect();
        let distractors: usize = d.train.iter().map(|s| s.distractor_count).sum();
        println!(
            "{suite}: {} train / {} val / {} test, target area {:.2}%..{:.2}%, {:.1} distractors per image",
            d.train.len(),
            d.val.len(),
            d.test.len(),
            100.0 * areas.iter().cloned().fold(f64::INFINITY, f64::min),
            100.0 * areas.iter().cloned().fold(0.0, f64::max),
            distractors as f64 / d.train.len() as f64
        );
        let s = &d.train[0];
        let b = box_from_mask(&s.mask)?;
        println!("  sample {}: box {}x{} at ({}, {})", s.index, b.width(), b.height(), b.x_min, b.y_min);
        for row in (0..128).step_by(8) {
            let line: String = (0..128)
                .step_by(4)
                .map(|c| if *s.mask.get(row, c) { '#' } else if *s.image.get(row, c) > 0.5 { '+' } else { '.' })
                .collect();
            println!("  {line}");
        }
    }
    Ok(())
}
