use boxperturb::data::{resample_bilinear, window_normalize, ABDOMEN_WINDOW, LUNG_WINDOW};
use boxperturb::geometry::Grid;

fn main() -> boxperturb::Result<()> {
    // A row of Hounsfield units from air through soft tissue to bone.
    let hu = Grid::from_vec(7, 1, vec![-1000.0f32, -500.0, -360.0, 0.0, 40.0, 440.0, 1200.0])?;
    for (name, (lo, hi)) in [("abdomen", ABDOMEN_WINDOW), ("lung", LUNG_WINDOW)] {
        let w = window_normalize(&hu, lo, hi)?;
        let vals: Vec<String> = w.as_slice().iter().map(|v| format!("{v:.3}")).collect();
        println!("{name:<8} [{lo}, {hi}]: {}", vals.join(" "));
    }

    let ramp = window_normalize(&Grid::from_vec(2, 2, vec![-360.0f32, 440.0, -360.0, 440.0])?, -360.0, 440.0)?;
    let up = resample_bilinear(&ramp, 4, 2)?;
    println!("2x2 -> 4x2 bilinear: {:?}", &up.as_slice()[..4]);
    Ok(())
}
