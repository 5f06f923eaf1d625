use std::path::PathBuf;

use gauss4d_core::io::{read_pfm, read_png};
use gauss4d_core::render::render_rgba;
use gauss4d_core::{CameraPose, Error, GaussianFrame, Image, RenderConfig, Result};

/// Relative azimuths of the multiview conditioning set.
pub const VIEW_OFFSETS: [f64; 4] = [0.0, 90.0, 180.0, 270.0];

/// The input camera followed by the three orthogonal poses around it.
pub fn orthogonal_poses(reference: &CameraPose) -> Vec<CameraPose> {
    VIEW_OFFSETS
        .iter()
        .map(|d| reference.clone().with_azimuth((reference.azimuth + d).rem_euclid(360.0)))
        .collect()
}

pub fn render_views(frame: &GaussianFrame, poses: &[CameraPose], cfg: &RenderConfig) -> Vec<Image> {
    gauss4d_core::par::map_slice(poses, |p| render_rgba(frame, p, cfg))
}

/// Source of the four orthogonal views that bootstrap the first chunk.
#[derive(Debug, Clone)]
pub enum ViewProvider {
    /// Renders the ground-truth first frame around the input camera.
    GroundTruth { frame: GaussianFrame, render: RenderConfig },
    /// Four images on disk (PNG or PFM), in offset order 0/90/180/270 deg.
    External { paths: Vec<PathBuf> },
}

impl ViewProvider {
    /// Views and their poses relative to `reference` (the video camera).
    pub fn views(&self, reference: &CameraPose) -> Result<(Vec<Image>, Vec<CameraPose>)> {
        let poses = orthogonal_poses(reference);
        let views = match self {
            ViewProvider::GroundTruth { frame, render } => render_views(frame, &poses, render),
            ViewProvider::External { paths } => {
                if paths.len() != VIEW_OFFSETS.len() {
                    return Err(Error::shape("provider views", VIEW_OFFSETS.len(), paths.len()));
                }
                paths.iter().map(|p| load_rgba(p)).collect::<Result<Vec<_>>>()?
            }
        };
        for v in &views {
            if v.width != reference.width || v.height != reference.height {
                return Err(Error::shape("provider view size", reference.width * reference.height, v.width * v.height));
            }
        }
        Ok((views, poses))
    }
}

/// Loads an image as RGBA (RGB inputs get alpha 1).
pub fn load_rgba(path: &std::path::Path) -> Result<Image> {
    let img = match path.extension().and_then(|e| e.to_str()) {
        Some("pfm") => read_pfm(path)?,
        Some("png") => read_png(path)?,
        _ => return Err(Error::invalid(format!("unsupported image {}", path.display()))),
    };
    match img.channels {
        4 => Ok(img),
        3 => {
            let mut out = Image::filled(img.width, img.height, 4, 1.0);
            for (o, i) in out.data.chunks_exact_mut(4).zip(img.data.chunks_exact(3)) {
                o[..3].copy_from_slice(i);
            }
            Ok(out)
        }
        1 => {
            let mut out = Image::filled(img.width, img.height, 4, 1.0);
            for (o, i) in out.data.chunks_exact_mut(4).zip(&img.data) {
                o[..3].fill(*i);
            }
            Ok(out)
        }
        c => Err(Error::shape("image channels", 4, c)),
    }
}
