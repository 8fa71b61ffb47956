//! Binary masks as PGM. Reads P2 (ASCII) and P5 (binary) with maxval up to
//! 255; any value above zero is foreground. Writes P5, maxval 255, with
//! foreground stored as 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BinaryMask;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() && self.bytes[self.pos] != b'#' {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            std::str::from_utf8(&self.bytes[start..self.pos]).ok()
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self.token().ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        tok.parse().map_err(|_| Error::MalformedHeader(format!("bad {what} '{tok}'")))
    }
}

pub fn decode_mask_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token().ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    let ascii = match magic {
        "P2" => true,
        "P5" => false,
        other => return Err(Error::MalformedHeader(format!("unsupported magic '{other}'"))),
    };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero-sized image {width}x{height}")));
    }
    let expected = width * height;
    let bits: Vec<bool> = if ascii {
        let mut bits = Vec::with_capacity(expected);
        while bits.len() < expected {
            match cur.token() {
                Some(tok) => {
                    let v: u32 = tok.parse().map_err(|_| Error::MalformedHeader(format!("bad sample '{tok}'")))?;
                    bits.push(v > 0);
                }
                None => return Err(Error::TruncatedPayload { expected, found: bits.len() }),
            }
        }
        bits
    } else {
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        let payload = bytes.get(start..).unwrap_or(&[]);
        if payload.len() < expected {
            return Err(Error::TruncatedPayload { expected, found: payload.len() });
        }
        payload[..expected].iter().map(|&v| v > 0).collect()
    };
    BinaryMask::from_vec(width, height, bits)
}

pub fn encode_mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.as_slice().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn read_mask_pgm(path: impl AsRef<Path>) -> Result<BinaryMask> {
    decode_mask_pgm(&fs::read(path)?)
}

pub fn write_mask_pgm(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    fs::write(path, encode_mask_pgm(mask))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_example() {
        let m = decode_mask_pgm(b"P2 2 1 255\n0 255\n").unwrap();
        assert_eq!(m.as_slice(), &[false, true]);
    }

    #[test]
    fn ascii_with_comments_and_low_maxval() {
        let m = decode_mask_pgm(b"P2\n# mask\n3 1\n# comment\n1\n1 0 1").unwrap();
        assert_eq!(m.as_slice(), &[true, false, true]);
    }

    #[test]
    fn binary_layout() {
        let m = BinaryMask::from_vec(3, 2, vec![true, false, false, true, true, false]).unwrap();
        let bytes = encode_mask_pgm(&m);
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(&bytes[bytes.len() - 6..], &[255, 0, 0, 255, 255, 0]);
    }

    #[test]
    fn binary_payload_may_start_with_whitespace_byte() {
        let mut bytes = b"P5 2 1 255\n".to_vec();
        bytes.extend_from_slice(&[b'\n', 0]);
        assert_eq!(decode_mask_pgm(&bytes).unwrap().as_slice(), &[true, false]);
    }

    #[test]
    fn errors() {
        assert!(matches!(decode_mask_pgm(b"P2 2 1 65535\n0 1"), Err(Error::UnsupportedMaxval(65535))));
        assert!(matches!(decode_mask_pgm(b"P2 2 1 0\n0 1"), Err(Error::UnsupportedMaxval(0))));
        assert!(matches!(decode_mask_pgm(b"P6 2 1 255\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_mask_pgm(b"P5 2 x 255\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_mask_pgm(b"P2 2 2 255\n0 1 1"), Err(Error::TruncatedPayload { expected: 4, found: 3 })));
        assert!(matches!(decode_mask_pgm(b"P5 2 2 255\n\x00\x01"), Err(Error::TruncatedPayload { expected: 4, found: 2 })));
        assert!(matches!(decode_mask_pgm(b""), Err(Error::MalformedHeader(_))));
    }

    proptest! {
        #[test]
        fn round_trip(w in 1usize..40, h in 1usize..40, bits in proptest::collection::vec(any::<bool>(), 1600)) {
            let m = BinaryMask::from_vec(w, h, bits[..w * h].to_vec()).unwrap();
            prop_assert_eq!(decode_mask_pgm(&encode_mask_pgm(&m)).unwrap(), m);
        }
    }
}
