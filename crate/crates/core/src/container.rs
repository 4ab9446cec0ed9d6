//! Binary grid container for sinograms, transport fields and RCDT
//! representations.
//!
//! Layout: magic `"RCDT"`, version byte `0x01`, kind byte (`0x01` sinogram,
//! `0x02` transport, `0x03` representation), `u32` LE `K`, `u32` LE `M`,
//! `K*M` little-endian `f64` values with `t` varying fastest, then an 8-byte
//! template hash (zero for sinograms and transport fields). Round trips are
//! bit-exact.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{RcdtRepresentation, Sinogram, TransportField};

pub const MAGIC: [u8; 4] = *b"RCDT";
pub const VERSION: u8 = 0x01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Sinogram = 0x01,
    Transport = 0x02,
    Representation = 0x03,
}

impl GridKind {
    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0x01 => Ok(GridKind::Sinogram),
            0x02 => Ok(GridKind::Transport),
            0x03 => Ok(GridKind::Representation),
            other => Err(Error::Parse(format!("unknown grid kind byte {other:#04x}"))),
        }
    }
}

/// Decoded container contents, prior to type-specific validation.
#[derive(Debug, Clone)]
pub struct GridFile {
    pub kind: GridKind,
    pub t_count: usize,
    pub num_angles: usize,
    pub values: Vec<f64>,
    pub template_hash: u64,
}

// Grids larger than this are certainly corrupt headers, not data.
const MAX_CELLS: u64 = 1 << 28;

pub fn encode_grid(
    kind: GridKind,
    t_count: usize,
    num_angles: usize,
    values: &[f64],
    template_hash: u64,
) -> Result<Vec<u8>> {
    if t_count == 0 || num_angles == 0 || values.len() != t_count * num_angles {
        return Err(Error::Domain("inconsistent grid dimensions".into()));
    }
    if t_count > u32::MAX as usize || num_angles > u32::MAX as usize {
        return Err(Error::Domain("grid dimensions exceed u32".into()));
    }
    let mut out = Vec::with_capacity(14 + values.len() * 8 + 8);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(kind as u8);
    out.extend_from_slice(&(t_count as u32).to_le_bytes());
    out.extend_from_slice(&(num_angles as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&template_hash.to_le_bytes());
    Ok(out)
}

pub fn decode_grid(bytes: &[u8]) -> Result<GridFile> {
    if bytes.len() < 14 {
        return Err(Error::Parse("container too short for header".into()));
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::Parse("bad magic, expected RCDT".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Parse(format!("unsupported version {:#04x}", bytes[4])));
    }
    let kind = GridKind::from_byte(bytes[5])?;
    let t_count = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as u64;
    let num_angles = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as u64;
    if t_count == 0 || num_angles == 0 {
        return Err(Error::Parse("zero grid dimension".into()));
    }
    let cells = t_count
        .checked_mul(num_angles)
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| Error::Parse("grid dimension overflow".into()))?;
    let expected = 14 + cells as usize * 8 + 8;
    if bytes.len() < expected {
        return Err(Error::Parse(format!(
            "truncated payload: need {expected} bytes, have {}",
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(cells as usize);
    let mut off = 14;
    for _ in 0..cells {
        values.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
        off += 8;
    }
    let template_hash = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    Ok(GridFile {
        kind,
        t_count: t_count as usize,
        num_angles: num_angles as usize,
        values,
        template_hash,
    })
}

pub fn write_grid(
    path: impl AsRef<Path>,
    kind: GridKind,
    t_count: usize,
    num_angles: usize,
    values: &[f64],
    template_hash: u64,
) -> Result<()> {
    let bytes = encode_grid(kind, t_count, num_angles, values, template_hash)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridFile> {
    decode_grid(&std::fs::read(path)?)
}

pub fn save_sinogram(s: &Sinogram, path: impl AsRef<Path>) -> Result<()> {
    write_grid(path, GridKind::Sinogram, s.t_count(), s.num_angles(), s.values(), 0)
}

pub fn load_sinogram(path: impl AsRef<Path>) -> Result<Sinogram> {
    let g = read_grid(path)?;
    if g.kind != GridKind::Sinogram {
        return Err(Error::Parse(format!("expected sinogram container, found {:?}", g.kind)));
    }
    Sinogram::new(g.t_count, g.num_angles, g.values)
}

pub fn save_transport(f: &TransportField, path: impl AsRef<Path>) -> Result<()> {
    write_grid(path, GridKind::Transport, f.t_count(), f.num_angles(), f.values(), 0)
}

pub fn load_transport(path: impl AsRef<Path>) -> Result<TransportField> {
    let g = read_grid(path)?;
    if g.kind != GridKind::Transport {
        return Err(Error::Parse(format!("expected transport container, found {:?}", g.kind)));
    }
    TransportField::new(g.t_count, g.num_angles, g.values)
}

pub fn save_representation(r: &RcdtRepresentation, path: impl AsRef<Path>) -> Result<()> {
    write_grid(
        path,
        GridKind::Representation,
        r.t_count(),
        r.num_angles(),
        r.values(),
        r.template_hash(),
    )
}

pub fn load_representation(path: impl AsRef<Path>) -> Result<RcdtRepresentation> {
    let g = read_grid(path)?;
    if g.kind != GridKind::Representation {
        return Err(Error::Parse(format!(
            "expected representation container, found {:?}",
            g.kind
        )));
    }
    RcdtRepresentation::new(g.t_count, g.num_angles, g.values, g.template_hash)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let values = vec![0.1, -2.5, 3.25, f64::MIN_POSITIVE, 1e300, -0.0];
        let bytes = encode_grid(GridKind::Representation, 3, 2, &values, 0xdeadbeef).unwrap();
        let g = decode_grid(&bytes).unwrap();
        assert_eq!(g.kind, GridKind::Representation);
        assert_eq!((g.t_count, g.num_angles), (3, 2));
        assert_eq!(g.template_hash, 0xdeadbeef);
        for (a, b) in values.iter().zip(&g.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn reject_wrong_magic() {
        let mut bytes = encode_grid(GridKind::Sinogram, 3, 2, &[0.0; 6], 0).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode_grid(&bytes), Err(Error::Parse(_))));
    }

    #[test]
    fn reject_zero_k_header() {
        let mut bytes = encode_grid(GridKind::Sinogram, 3, 2, &[0.0; 6], 0).unwrap();
        bytes[6..10].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(decode_grid(&bytes), Err(Error::Parse(_))));
    }

    #[test]
    fn reject_truncated_payload() {
        let bytes = encode_grid(GridKind::Sinogram, 3, 2, &[0.0; 6], 0).unwrap();
        assert!(matches!(decode_grid(&bytes[..bytes.len() - 4]), Err(Error::Parse(_))));
    }

    #[test]
    fn reject_dimension_overflow() {
        let mut bytes = encode_grid(GridKind::Sinogram, 3, 2, &[0.0; 6], 0).unwrap();
        bytes[6..10].copy_from_slice(&u32::MAX.to_le_bytes());
        bytes[10..14].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode_grid(&bytes), Err(Error::Parse(_))));
    }
}
