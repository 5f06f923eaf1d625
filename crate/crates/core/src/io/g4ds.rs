use std::fs;
use std::path::Path;

use super::reader::Cursor;
use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, GaussianFrame, GaussianSequence, GAUSSIAN_PARAMS};

pub const G4DS_MAGIC: [u8; 4] = *b"G4DS";
pub const G4DS_VERSION: u32 = 1;

/// Serialises a sequence: magic, version, frame count, Gaussians per frame,
/// fps, then `T * N` records of 14 little-endian `f32`.
pub fn encode_sequence(seq: &GaussianSequence) -> Result<Vec<u8>> {
    seq.validate_structure()?;
    if seq.frames.is_empty() {
        return Err(Error::invalid("cannot write a sequence without frames"));
    }
    let n = seq
        .gaussians_per_frame()
        .ok_or_else(|| Error::invalid("all frames must hold the same number of Gaussians"))?;
    if n == 0 {
        return Err(Error::invalid("cannot write empty frames"));
    }
    let t = seq.frames.len();
    let mut out = Vec::with_capacity(20 + t * n * GAUSSIAN_PARAMS * 4);
    out.extend_from_slice(&G4DS_MAGIC);
    out.extend_from_slice(&G4DS_VERSION.to_le_bytes());
    out.extend_from_slice(&(t as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&seq.fps.to_le_bytes());
    for frame in &seq.frames {
        for g in &frame.gaussians {
            for v in g.to_array() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Parses a G4DS payload. Frames are numbered `0..T`.
pub fn decode_sequence(bytes: &[u8]) -> Result<GaussianSequence> {
    let mut cur = Cursor::new(bytes, "G4DS");
    let magic = cur.magic()?;
    if magic != G4DS_MAGIC {
        return Err(Error::BadMagic {
            expected: G4DS_MAGIC,
            found: magic,
        });
    }
    let version = cur.u32()?;
    if version != G4DS_VERSION {
        return Err(Error::VersionMismatch {
            expected: G4DS_VERSION,
            found: version,
        });
    }
    let t = cur.u32()? as usize;
    let n = cur.u32()? as usize;
    let fps = cur.f32()?;
    let need = t
        .checked_mul(n)
        .and_then(|x| x.checked_mul(GAUSSIAN_PARAMS * 4))
        .ok_or_else(|| Error::Malformed("G4DS header counts overflow".into()))?;
    if cur.remaining() < need {
        return Err(Error::Truncated(format!(
            "G4DS: header announces {t} frames x {n} Gaussians ({need} bytes), payload has {}",
            cur.remaining()
        )));
    }
    let mut frames = Vec::with_capacity(t);
    for ti in 0..t {
        let mut gaussians = Vec::with_capacity(n);
        for _ in 0..n {
            let mut rec = [0f32; GAUSSIAN_PARAMS];
            for v in rec.iter_mut() {
                *v = cur.f32()?;
            }
            gaussians.push(Gaussian::from_array(&rec));
        }
        frames.push(GaussianFrame::new(ti as u32, gaussians));
    }
    if cur.remaining() != 0 {
        return Err(Error::Malformed(format!("G4DS: {} trailing bytes", cur.remaining())));
    }
    Ok(GaussianSequence { fps, frames })
}

pub fn write_sequence(seq: &GaussianSequence, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_sequence(seq)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<GaussianSequence> {
    decode_sequence(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GaussianSequence {
        let g = |k: f32| {
            Gaussian::new([k, -k, 0.5 * k], [0.1, 0.2, 0.05], [1.0, k, 0.0, 0.3], 0.7, [0.1, 0.5, 0.9])
                .unwrap()
        };
        GaussianSequence::new(
            8.0,
            vec![
                GaussianFrame::new(0, vec![g(0.1), g(0.2)]),
                GaussianFrame::new(1, vec![g(0.3), g(-0.4)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let s = sample();
        let bytes = encode_sequence(&s).unwrap();
        assert_eq!(bytes.len(), 20 + 2 * 2 * 14 * 4);
        let back = decode_sequence(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(encode_sequence(&back).unwrap(), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = encode_sequence(&sample()).unwrap();
        assert_eq!(&bytes[0..4], b"G4DS");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(f32::from_le_bytes(bytes[16..20].try_into().unwrap()), 8.0);
    }

    #[test]
    fn distinct_errors() {
        let mut bytes = encode_sequence(&sample()).unwrap();
        let mut bad = bytes.clone();
        bad[3] = b'X';
        assert!(matches!(decode_sequence(&bad), Err(Error::BadMagic { .. })));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(decode_sequence(&bad), Err(Error::VersionMismatch { found: 2, .. })));
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(decode_sequence(&bytes), Err(Error::Truncated(_))));
        assert!(matches!(decode_sequence(b"G4"), Err(Error::Truncated(_))));
    }

    #[test]
    fn empty_frames_rejected() {
        let s = GaussianSequence::new(8.0, vec![GaussianFrame::new(0, vec![])]).unwrap();
        assert!(encode_sequence(&s).is_err());
        let s = GaussianSequence::new(8.0, vec![]).unwrap();
        assert!(encode_sequence(&s).is_err());
    }
}
