//! Offsets and a handful of draws for boxes of different sizes and shapes.

use boxperturb::geometry::{BoundingBox, Coefficients};
use boxperturb::perturb::{compute_offsets, perturbation_stats, sample_perturbed_box, PerturbationConfig};
use boxperturb::rng::{stream, Domain};

fn main() -> boxperturb::Result<()> {
    let (w, h) = (512, 512);
    let cfg = PerturbationConfig::default();
    let boxes = [
        ("small square", BoundingBox::new(250.0, 250.0, 262.0, 262.0)?),
        ("wide", BoundingBox::new(100.0, 200.0, 300.0, 250.0)?),
        ("tall", BoundingBox::new(200.0, 50.0, 240.0, 450.0)?),
        ("large", BoundingBox::new(20.0, 20.0, 480.0, 480.0)?),
    ];
    for (name, b) in boxes {
        let c = Coefficients::for_box(&b, w, h, cfg.theta_floor)?;
        let o = compute_offsets(&cfg, &c);
        println!("{name}: {}x{} theta={:.4} xi={:.3}", b.width(), b.height(), c.theta_omega, c.xi);
        println!("  eps1={:.3} eps2={:.3} delta1={:.3} delta2={:.3}", o.eps1, o.eps2, o.delta1, o.delta2);

        let mut rng = stream(1, Domain::Perturb, 0);
        for _ in 0..3 {
            let p = sample_perturbed_box(&b, &o, w, h, &cfg, &mut rng)?;
            let q = p.bbox;
            println!("  draw [{:.1}, {:.1}, {:.1}, {:.1}] resamples={}", q.x_min, q.y_min, q.x_max, q.y_max, p.resample_count);
        }
        let s = perturbation_stats(&b, &cfg, &c, w, h, 10_000, &mut rng)?;
        println!(
            "  10k draws: mean size {:.2}x{:.2} aspect {:.3} (box {:.3}), expand fraction {:.2}",
            s.mean_width,
            s.mean_height,
            s.mean_width / s.mean_height,
            c.xi,
            s.expand_fraction
        );
    }
    Ok(())
}
