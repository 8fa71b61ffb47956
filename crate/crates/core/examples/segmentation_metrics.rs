use boxperturb::geometry::BinaryMask;
use boxperturb::metrics::{boundary, evaluate_masks};

fn disk(n: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
    BinaryMask::from_fn(n, n, |row, col| {
        let (dx, dy) = (col as f64 + 0.5 - cx, row as f64 + 0.5 - cy);
        dx * dx + dy * dy <= r * r
    })
    .unwrap()
}

fn main() -> boxperturb::Result<()> {
    let gt = disk(64, 32.0, 32.0, 12.0);
    println!("reference: {} pixels, {} on the boundary", gt.count(), boundary(&gt).count());
    let cases = [
        ("identical", disk(64, 32.0, 32.0, 12.0)),
        ("shifted 1px", disk(64, 33.0, 32.0, 12.0)),
        ("shifted 3px", disk(64, 35.0, 32.0, 12.0)),
        ("radius 10", disk(64, 32.0, 32.0, 10.0)),
        ("radius 16", disk(64, 32.0, 32.0, 16.0)),
        ("empty", BinaryMask::filled(64, 64, false)?),
    ];
    println!("{:<14}{:>8}{:>10}{:>10}{:>10}", "prediction", "dsc", "nsd@1", "nsd@2", "nsd@5");
    for (name, pred) in cases {
        let nsd: Vec<f64> = [1.0, 2.0, 5.0].iter().map(|&t| evaluate_masks(&gt, &pred, t).map(|r| r.nsd)).collect::<Result<_, _>>()?;
        let r = evaluate_masks(&gt, &pred, 2.0)?;
        println!("{name:<14}{:>8.4}{:>10.4}{:>10.4}{:>10.4}", r.dsc, nsd[0], nsd[1], nsd[2]);
    }
    Ok(())
}
