//! Differentiable Gaussian splat rendering.
//!
//! Each Gaussian is projected with the EWA approximation
//! (`Σ2D = J W Σ Wᵀ Jᵀ + 0.3 I`), all splats are sorted front to back by
//! camera depth (ties by index) and composited per pixel:
//!
//! ```text
//! C = Σ_i c_i α_i T_i + bg · T_N,   T_i = Π_{j<i} (1 - α_j)
//! α_i = opacity_i · exp(-½ Δᵀ Σ2D⁻¹ Δ)      (skipped when below alpha_cutoff)
//! ```
//!
//! [`render`] bins splats into screen tiles; [`oracle_render`] loops over
//! every splat for every pixel and is the semantic reference.

mod backward;
mod forward;
mod oracle;
mod project;

pub use backward::{render_backward, RenderGradients};
pub use forward::render;
pub use oracle::oracle_render;

use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::gaussian::GaussianFrame;
use crate::image::Image;
use crate::math::Real;

/// Gaussians closer to the camera than this (camera-space depth) are clipped.
pub const NEAR_PLANE: f64 = 0.01;
/// Screen-space low-pass added to the 2D covariance diagonal, px².
pub const COV2D_BLUR: f64 = 0.3;
/// 2D covariance determinants below this are treated as degenerate.
pub const MIN_DET: f64 = 1e-12;
/// Compositing stops once transmittance drops below this.
pub const MIN_TRANSMITTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub background: [f32; 3],
    pub tile_size: usize,
    /// Per-splat contributions with `α < alpha_cutoff` are skipped.
    pub alpha_cutoff: f32,
    /// Splats are binned out to at least this many standard deviations.
    pub gaussian_extent: f32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            background: [0.0; 3],
            tile_size: 4,
            alpha_cutoff: 1.0 / 255.0,
            gaussian_extent: 3.0,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tile_size == 0 {
            return Err(Error::invalid("tile_size must be >= 1"));
        }
        if !(0.0..=0.01).contains(&self.alpha_cutoff) {
            return Err(Error::invalid("alpha_cutoff must lie in [0, 0.01]"));
        }
        if !(self.gaussian_extent >= 1.0) {
            return Err(Error::invalid("gaussian_extent must be >= 1"));
        }
        if !self.background.iter().all(|c| (0.0..=1.0).contains(c)) {
            return Err(Error::invalid("background must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn with_background(mut self, bg: [f32; 3]) -> Self {
        self.background = bg;
        self
    }

    /// No contribution cutoff and a wide extent: the composited image is a
    /// smooth function of the parameters (used for gradient verification).
    pub fn smooth() -> Self {
        RenderConfig {
            alpha_cutoff: 0.0,
            gaussian_extent: 8.0,
            ..Default::default()
        }
    }
}

/// Per-render diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderStats {
    pub visible: usize,
    pub near_clipped: usize,
    /// Splats whose 2D covariance was degenerate or non-finite.
    pub degenerate: usize,
}

impl std::fmt::Display for RenderStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "visible={} near_clipped={} skipped_degenerate={}",
            self.visible, self.near_clipped, self.degenerate
        )
    }
}

#[derive(Debug, Clone)]
pub struct RenderOutput<T = f32> {
    pub rgb: Image<T>,
    pub alpha: Image<T>,
    pub stats: RenderStats,
}

impl<T: Real> RenderOutput<T> {
    /// RGB and alpha packed as a 4-channel image.
    pub fn rgba(&self) -> Image<T> {
        Image::concat_channels(&[&self.rgb, &self.alpha]).expect("same size")
    }
}

/// `f(P, O)`: the RGB image of a frame seen from `pose`.
pub fn render_rgb(frame: &GaussianFrame, pose: &CameraPose, cfg: &RenderConfig) -> Image {
    render(&frame.gaussians, pose, cfg).rgb
}

/// `g(P, O)`: accumulated opacity `1 - Π(1 - α)` of a frame seen from `pose`.
pub fn render_alpha(frame: &GaussianFrame, pose: &CameraPose, cfg: &RenderConfig) -> Image {
    render(&frame.gaussians, pose, cfg).alpha
}

/// RGBA render of a frame (RGB + accumulated alpha).
pub fn render_rgba(frame: &GaussianFrame, pose: &CameraPose, cfg: &RenderConfig) -> Image {
    render(&frame.gaussians, pose, cfg).rgba()
}
