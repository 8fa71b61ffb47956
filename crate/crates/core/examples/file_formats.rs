use boxperturb::data::{decode_f32_grid, decode_mask_pgm, encode_f32_grid, encode_mask_pgm, F32Grid};
use boxperturb::geometry::{BinaryMask, Grid};

fn main() -> boxperturb::Result<()> {
    let grid: F32Grid = Grid::from_vec(3, 2, vec![-360.0, 0.0, 440.0, f32::NAN, f32::INFINITY, 1.5e-40])?;
    let bytes = encode_f32_grid(&grid);
    println!("F32G: {} bytes, header {:02x?}", bytes.len(), &bytes[..16]);
    let back = decode_f32_grid(&bytes)?;
    let same = grid.as_slice().iter().zip(back.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
    println!("bit-exact round trip: {same}");

    let mask = BinaryMask::from_fn(6, 3, |r, c| (r + c) % 2 == 0)?;
    let pgm = encode_mask_pgm(&mask);
    println!("PGM: {} bytes, header {:?}", pgm.len(), String::from_utf8_lossy(&pgm[..pgm.len() - 18]));
    println!("round trip: {}", decode_mask_pgm(&pgm)? == mask);

    let ascii = b"P2\n# plain\n3 2\n1\n0 1 0\n1 1 0\n";
    let m = decode_mask_pgm(ascii)?;
    println!("ascii P2 mask with {} foreground pixels", m.count());
    Ok(())
}
