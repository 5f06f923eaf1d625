use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Writes an 8-bit PNG (channels 1, 3 or 4), clamping values to `[0, 1]`.
pub fn write_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = img
        .data
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let color = match img.channels {
        1 => image::ExtendedColorType::L8,
        3 => image::ExtendedColorType::Rgb8,
        4 => image::ExtendedColorType::Rgba8,
        c => return Err(Error::invalid(format!("PNG supports 1, 3 or 4 channels, got {c}"))),
    };
    image::save_buffer(path, &bytes, img.width as u32, img.height as u32, color)
        .map_err(|e| Error::Image(e.to_string()))
}

/// Reads a PNG as RGBA float in `[0, 1]`.
pub fn read_png(path: impl AsRef<Path>) -> Result<Image> {
    let dynimg = image::open(path).map_err(|e| Error::Image(e.to_string()))?;
    let rgba = dynimg.to_rgba8();
    let (w, h) = rgba.dimensions();
    let data = rgba.into_raw().into_iter().map(|b| b as f32 / 255.0).collect();
    Image::from_data(w as usize, h as usize, 4, data)
}
