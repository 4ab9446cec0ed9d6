//! Netpbm PGM (P2/P5) reading and writing.
//!
//! Loaded pixels are scaled to `[0, 1]` by the file's maxval. Writing
//! min-max rescales to the output maxval with round-half-to-even, so a
//! save/load round trip reproduces min-max normalized intensities within
//! half a quantization step.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Image;

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    parse_pgm(&bytes)
}

/// Parses PGM data from memory. Comments (`#` to end of line) are allowed
/// anywhere whitespace is.
pub fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    let mut cursor = Cursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    let binary = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(Error::Parse(format!(
                "unsupported magic {:?}, expected P2 or P5",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = cursor.unsigned("width")?;
    let height = cursor.unsigned("height")?;
    let maxval = cursor.unsigned("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse("image dimensions must be positive".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("maxval {maxval} out of range 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse("dimension overflow".into()))?;

    let raw: Vec<u32> = if binary {
        // A single whitespace byte separates the header from the payload.
        cursor.skip_single_whitespace()?;
        let wide = maxval > 255;
        let needed = count * if wide { 2 } else { 1 };
        let payload = cursor.rest();
        if payload.len() < needed {
            return Err(Error::Parse(format!(
                "truncated payload: need {needed} bytes, have {}",
                payload.len()
            )));
        }
        if wide {
            payload[..needed]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                .collect()
        } else {
            payload[..needed].iter().map(|&b| b as u32).collect()
        }
    } else {
        (0..count)
            .map(|_| {
                cursor.unsigned("sample").and_then(|v| {
                    u32::try_from(v).map_err(|_| Error::Parse(format!("sample {v} out of range")))
                })
            })
            .collect::<Result<_>>()?
    };

    for &v in &raw {
        if v as usize > maxval {
            return Err(Error::Parse(format!("sample {v} exceeds maxval {maxval}")));
        }
    }
    let scale = 1.0 / maxval as f64;
    let pixels = raw.into_iter().map(|v| v as f64 * scale).collect();
    Image::new(width, height, pixels)
}

/// Writes the image as binary P5, min-max rescaled to `[0, maxval]` with
/// round-half-to-even. A constant image maps to all zeros.
pub fn save_pgm(image: &Image, path: impl AsRef<Path>, maxval: u16) -> Result<()> {
    if maxval == 0 {
        return Err(Error::Domain("maxval must be positive".into()));
    }
    let bytes = encode_pgm(image, maxval)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_pgm(image: &Image, maxval: u16) -> Result<Vec<u8>> {
    let lo = image.pixels().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = image.pixels().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let quantize = |p: f64| -> u16 {
        if span <= 0.0 {
            0
        } else {
            (((p - lo) / span) * maxval as f64).round_ties_even() as u16
        }
    };
    let mut out = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval).into_bytes();
    if maxval > 255 {
        for &p in image.pixels() {
            out.extend_from_slice(&quantize(p).to_be_bytes());
        }
    } else {
        out.extend(image.pixels().iter().map(|&p| quantize(p) as u8));
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<Vec<u8>> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("unexpected end of header".into()));
        }
        Ok(self.bytes[start..self.pos].to_vec())
    }

    fn unsigned(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        let s = std::str::from_utf8(&tok)
            .map_err(|_| Error::Parse(format!("non-ASCII {what} field")))?;
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("invalid {what} value {s:?}")))
    }

    fn skip_single_whitespace(&mut self) -> Result<()> {
        if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse("missing whitespace before binary payload".into()))
        }
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_p5() {
        let data = b"P5\n2 2\n255\n\x00\xff\xff\x00";
        let img = parse_pgm(data).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn parse_p2_ascii() {
        let img = parse_pgm(b"P2 1 1 100 \n 50").unwrap();
        assert_eq!(img.pixels(), &[0.5]);
    }

    #[test]
    fn parse_comments() {
        let img = parse_pgm(b"P2 # comment\n1 1\n# another\n10\n5").unwrap();
        assert_eq!(img.pixels(), &[0.5]);
    }

    #[test]
    fn reject_bad_magic() {
        assert!(matches!(parse_pgm(b"P7\n1 1\n255\n\x00"), Err(Error::Parse(_))));
    }

    #[test]
    fn reject_truncated_payload() {
        assert!(matches!(parse_pgm(b"P5\n2 2\n255\n\x00\xff"), Err(Error::Parse(_))));
    }

    #[test]
    fn reject_bad_dims() {
        assert!(parse_pgm(b"P2 -3 2 255 0").is_err());
        assert!(parse_pgm(b"P2 0 2 255").is_err());
    }

    #[test]
    fn parse_16bit_p5() {
        let data = b"P5\n1 2\n65535\n\x00\x00\xff\xff";
        let img = parse_pgm(data).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn encode_linear_scale_round_half_even() {
        let img = Image::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        let bytes = encode_pgm(&img, 255).unwrap();
        let payload = &bytes[bytes.len() - 3..];
        assert_eq!(payload, &[0, 128, 255]);
    }

    #[test]
    fn encode_constant_image_is_all_zero() {
        let img = Image::new(2, 2, vec![0.7; 4]).unwrap();
        let bytes = encode_pgm(&img, 255).unwrap();
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 0, 0, 0]);
    }

    #[test]
    fn round_trip_within_quantization() {
        let img = Image::new(4, 1, vec![0.05, 0.2, 0.77, 0.93]).unwrap();
        let bytes = encode_pgm(&img, 255).unwrap();
        let back = parse_pgm(&bytes).unwrap();
        // Compare after min-max normalization of the original.
        let lo = 0.05;
        let span = 0.93 - 0.05;
        for (orig, loaded) in img.pixels().iter().zip(back.pixels()) {
            let expected = (orig - lo) / span;
            assert!((expected - loaded).abs() <= 1.0 / (2.0 * 255.0) + 1e-12);
        }
    }
}
