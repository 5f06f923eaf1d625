//! Checkpoint container: magic `G4CK`, version, the model config as
//! key=value text, a free-form metadata text block, then named tensors each
//! with a dtype tag and shape header followed by little-endian `f32` data.

use std::fs;
use std::path::Path;

use gauss4d_core::io::reader::Cursor;
use gauss4d_core::{Error, Result};

use crate::config::ModelConfig;
use crate::params::{ModelParams, ParamTensor};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"G4CK";
pub const CHECKPOINT_VERSION: u32 = 1;
const DTYPE_F32: u32 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    /// Free-form `key=value` lines (training stage, step, seed).
    pub meta: String,
    pub params: ModelParams,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn get_str(cur: &mut Cursor<'_>) -> Result<String> {
    let n = cur.u32()? as usize;
    let bytes = cur.take(n)?;
    String::from_utf8(bytes.to_vec()).map_err(|_| Error::Malformed("checkpoint string is not UTF-8".into()))
}

pub fn write_checkpoint(ck: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + ck.params.numel() * 4);
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION);
    put_str(&mut out, &ck.config.to_text());
    put_str(&mut out, &ck.meta);
    put_u32(&mut out, ck.params.tensors.len() as u32);
    for t in &ck.params.tensors {
        put_str(&mut out, &t.name);
        put_u32(&mut out, DTYPE_F32);
        put_u32(&mut out, t.shape.len() as u32);
        for &d in &t.shape {
            put_u32(&mut out, d as u32);
        }
        for v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut cur = Cursor::new(bytes, "checkpoint");
    let magic = cur.magic()?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            expected: CHECKPOINT_MAGIC,
            found: magic,
        });
    }
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            expected: CHECKPOINT_VERSION,
            found: version,
        });
    }
    let config = ModelConfig::from_text(&get_str(&mut cur)?)?;
    let meta = get_str(&mut cur)?;
    let count = cur.u32()? as usize;
    let mut tensors = Vec::with_capacity(count.min(4096));
    for _ in 0..count {
        let name = get_str(&mut cur)?;
        let dtype = cur.u32()?;
        if dtype != DTYPE_F32 {
            return Err(Error::Malformed(format!("tensor {name}: unknown dtype tag {dtype}")));
        }
        let ndim = cur.u32()? as usize;
        if ndim > 8 {
            return Err(Error::Malformed(format!("tensor {name}: {ndim} dimensions")));
        }
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(cur.u32()? as usize);
        }
        let numel = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        let numel = match numel {
            Some(n) if n.checked_mul(4).is_some_and(|b| b <= cur.remaining()) => n,
            _ => return Err(Error::Truncated(format!("tensor {name}: data shorter than shape {shape:?}"))),
        };
        let raw = cur.take(numel * 4)?;
        let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
        tensors.push(ParamTensor { name, shape, data });
    }
    if cur.remaining() != 0 {
        return Err(Error::Malformed(format!("{} trailing bytes after checkpoint", cur.remaining())));
    }
    Ok(Checkpoint {
        config,
        meta,
        params: ModelParams::from_tensors(tensors)?,
    })
}

pub fn save_checkpoint(ck: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_checkpoint(ck))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    read_checkpoint(&fs::read(path)?)
}
