use boxperturb::metrics::{distance_transform_of, squared_distance_transform};
use boxperturb::geometry::BinaryMask;

fn main() -> boxperturb::Result<()> {
    let d = distance_transform_of(&[(1, 1), (6, 9)], 12, 8)?;
    for row in 0..8 {
        let line: Vec<String> = (0..12).map(|c| format!("{:4.1}", d.get(row, c))).collect();
        println!("{}", line.join(" "));
    }

    let mut src = BinaryMask::filled(5, 5, false)?;
    src.set(2, 2, true);
    let d2 = squared_distance_transform(&src)?;
    println!("\nsquared distances to the centre of a 5x5 grid:");
    for row in 0..5 {
        println!("{:?}", (0..5).map(|c| *d2.get(row, c)).collect::<Vec<_>>());
    }
    Ok(())
}
