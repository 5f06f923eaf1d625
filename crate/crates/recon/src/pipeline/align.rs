use gauss4d_core::render::render;
use gauss4d_core::{CameraPose, Error, GaussianFrame, Image, RenderConfig, Result};

use super::provider::{orthogonal_poses, render_views};

/// Residuals within this fraction of the reference image energy of the
/// minimum count as ties. Renders of an exactly symmetric scene differ only
/// by f32 rounding, so the comparison cannot be relative to the residual.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Degrees in `[−180, 180)`.
    pub theta: f64,
    pub residual: f64,
    /// `(θ, ‖render(θ) − I₁‖²)` over the whole grid, ascending in θ.
    pub curve: Vec<(f64, f64)>,
}

/// The azimuth grid `−180, −180 + step, …` up to but excluding 180.
pub fn azimuth_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 360.0) {
        return Err(Error::invalid(format!("azimuth step {step} must lie in (0, 360]")));
    }
    let n = (360.0 / step - 1e-9).ceil() as usize;
    Ok((0..n).map(|k| -180.0 + k as f64 * step).collect())
}

/// Exhaustive search for the 0-deg-elevation azimuth whose RGB render of
/// `frame` best matches `i1` in squared error. `pose` supplies radius,
/// field of view and resolution. Ties go to the smallest θ.
pub fn align_azimuth(frame: &GaussianFrame, i1: &Image, step: f64, pose: &CameraPose, cfg: &RenderConfig) -> Result<Alignment> {
    if frame.is_empty() {
        return Err(Error::invalid("cannot align an empty frame"));
    }
    if i1.width != pose.width || i1.height != pose.height {
        return Err(Error::shape("reference image size", pose.width * pose.height, i1.width * i1.height));
    }
    if i1.channels < 3 {
        return Err(Error::shape("reference image channels", 3, i1.channels));
    }
    let grid = azimuth_grid(step)?;
    let base = CameraPose { elevation: 0.0, ..pose.clone() };
    let residuals = gauss4d_core::par::map_slice(&grid, |&theta| {
        let p = base.clone().with_azimuth(theta);
        let out = render(&frame.gaussians, &p, cfg);
        let mut r = 0.0f64;
        for (px, q) in out.rgb.data.chunks_exact(3).zip(i1.data.chunks_exact(i1.channels)) {
            for c in 0..3 {
                let d = (px[c] - q[c]) as f64;
                r += d * d;
            }
        }
        r
    });
    let energy: f64 = i1.data.chunks_exact(i1.channels).flat_map(|q| &q[..3]).map(|&v| (v as f64) * (v as f64)).sum();
    let min = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let best = residuals.iter().position(|&r| r <= min + TIE_TOLERANCE * energy).unwrap_or(0);
    Ok(Alignment {
        theta: grid[best],
        residual: residuals[best],
        curve: grid.into_iter().zip(residuals).collect(),
    })
}

/// Renders of `frame` at `θ + {0, 90, 180, 270}` deg and their poses.
pub fn bootstrap_views(frame: &GaussianFrame, theta: f64, pose: &CameraPose, cfg: &RenderConfig) -> (Vec<Image>, Vec<CameraPose>) {
    let reference = CameraPose { elevation: 0.0, ..pose.clone() }.with_azimuth(theta.rem_euclid(360.0));
    let poses = orthogonal_poses(&reference);
    (render_views(frame, &poses, cfg), poses)
}
