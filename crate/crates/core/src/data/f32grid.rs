//! `F32G` container: `b"F32G"`, then little-endian `u32` width, height and a
//! reserved zero word, then `width * height` little-endian `f32` values in
//! row-major order. Values are stored as raw bits, NaN payloads included.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Grid;

pub type F32Grid = Grid<f32>;

const MAGIC: &[u8; 4] = b"F32G";
const HEADER_LEN: usize = 16;

pub fn encode_f32_grid(grid: &F32Grid) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.width() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.height() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in grid.as_slice() {
        out.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

pub fn decode_f32_grid(bytes: &[u8]) -> Result<F32Grid> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::SizeMismatch { declared: 0, actual: bytes.len().saturating_sub(4) });
    }
    let width = u32_at(bytes, 4) as usize;
    let height = u32_at(bytes, 8) as usize;
    let payload = &bytes[HEADER_LEN..];
    let declared = width * height;
    if payload.len() != declared * 4 {
        return Err(Error::SizeMismatch { declared, actual: payload.len() });
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_bits(u32::from_le_bytes(c.try_into().expect("4-byte chunk"))))
        .collect();
    Grid::from_vec(width, height, values)
}

pub fn read_f32_grid(path: impl AsRef<Path>) -> Result<F32Grid> {
    decode_f32_grid(&fs::read(path)?)
}

pub fn write_f32_grid(path: impl AsRef<Path>, grid: &F32Grid) -> Result<()> {
    fs::write(path, encode_f32_grid(grid))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_value_layout() {
        let g = F32Grid::from_vec(1, 1, vec![-360.0]).unwrap();
        let bytes = encode_f32_grid(&g);
        assert_eq!(bytes.len(), 20);
        assert_eq!(&bytes[..4], b"F32G");
        assert_eq!(&bytes[4..16], &[1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&bytes[16..], &(-360.0f32).to_le_bytes());
        assert_eq!(decode_f32_grid(&bytes).unwrap(), g);
    }

    #[test]
    fn errors() {
        assert!(matches!(decode_f32_grid(b"F32X\0\0\0\0"), Err(Error::BadMagic)));
        assert!(matches!(decode_f32_grid(b""), Err(Error::BadMagic)));
        let mut bytes = encode_f32_grid(&F32Grid::from_vec(2, 2, vec![1.0; 4]).unwrap());
        bytes.pop();
        assert!(matches!(decode_f32_grid(&bytes), Err(Error::SizeMismatch { declared: 4, actual: 15 })));
        bytes.truncate(10);
        assert!(matches!(decode_f32_grid(&bytes), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn nan_payload_preserved() {
        let odd_nan = f32::from_bits(0x7fc0_1234);
        let neg_nan = f32::from_bits(0xffa0_0001);
        let g = F32Grid::from_vec(3, 1, vec![odd_nan, neg_nan, f32::NEG_INFINITY]).unwrap();
        let back = decode_f32_grid(&encode_f32_grid(&g)).unwrap();
        let bits = |g: &F32Grid| g.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&g));
    }

    proptest! {
        #[test]
        fn round_trip_bits(w in 1usize..16, h in 1usize..16, seed in any::<u32>()) {
            let vals: Vec<f32> = (0..w * h).map(|i| f32::from_bits(seed.wrapping_mul(2654435761).wrapping_add(i as u32 * 40503))).collect();
            let g = F32Grid::from_vec(w, h, vals).unwrap();
            let back = decode_f32_grid(&encode_f32_grid(&g)).unwrap();
            prop_assert_eq!(back.dims(), g.dims());
            for (a, b) in back.as_slice().iter().zip(g.as_slice()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
