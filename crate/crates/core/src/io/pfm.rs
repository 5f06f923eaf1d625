//! Portable float map: `PF`/`Pf` header, little-endian scale (negative),
//! rows stored bottom-to-top. Four-channel images use a non-standard `P4`
//! tag so RGBA renders fit in one lossless file.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

pub fn encode_pfm(img: &Image) -> Result<Vec<u8>> {
    let tag = match img.channels {
        1 => "Pf",
        3 => "PF",
        4 => "P4",
        c => return Err(Error::invalid(format!("PFM supports 1, 3 or 4 channels, got {c}"))),
    };
    let mut out = format!("{tag}\n{} {}\n-1.0\n", img.width, img.height).into_bytes();
    let row = img.width * img.channels;
    for y in (0..img.height).rev() {
        for v in &img.data[y * row..(y + 1) * row] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_pfm(bytes: &[u8]) -> Result<Image> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Truncated("PFM header".into()));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::Malformed("PFM header".into()))?);
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let channels = match fields[0] {
        "Pf" => 1,
        "PF" => 3,
        "P4" => 4,
        other => return Err(Error::Malformed(format!("unknown PFM tag {other:?}"))),
    };
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Malformed(format!("PFM size {s:?}")));
    let (w, h) = (parse(fields[1])?, parse(fields[2])?);
    let scale: f32 = fields[3].parse().map_err(|_| Error::Malformed("PFM scale".into()))?;
    let little = scale < 0.0;
    let need = w * h * channels * 4;
    if bytes.len() < pos || bytes.len() - pos < need {
        return Err(Error::Truncated(format!("PFM payload: need {need} bytes")));
    }
    let mut img = Image::new(w, h, channels);
    let row = w * channels;
    for (k, chunk) in bytes[pos..pos + need].chunks_exact(4).enumerate() {
        let raw: [u8; 4] = chunk.try_into().unwrap();
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (file_row, off) = (k / row, k % row);
        img.data[(h - 1 - file_row) * row + off] = v;
    }
    Ok(img)
}

pub fn write_pfm(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pfm(img)?)?;
    Ok(())
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Image> {
    decode_pfm(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_channel_counts() {
        for c in [1, 3, 4] {
            let data = (0..5 * 3 * c).map(|i| i as f32 * 0.37 - 1.0).collect();
            let img = Image::from_data(5, 3, c, data).unwrap();
            let back = decode_pfm(&encode_pfm(&img).unwrap()).unwrap();
            assert_eq!(back, img);
        }
    }

    #[test]
    fn rejects_truncated() {
        let img = Image::filled(4, 4, 3, 0.5f32);
        let mut bytes = encode_pfm(&img).unwrap();
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(decode_pfm(&bytes), Err(Error::Truncated(_))));
    }
}
