//! Central finite-difference verification helpers.

use crate::error::Result;
use crate::gaussian::{Gaussian, GAUSSIAN_PARAMS};
use crate::losses::{frame_loss, LossConfig, SupervisionView};

/// Relative error with an absolute floor, so coordinates whose true partial
/// is ~0 are judged against the gradient's overall scale.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradCheck {
    pub pairs: Vec<(f64, f64)>,
}

impl GradCheck {
    pub fn push(&mut self, analytic: f64, numeric: f64) {
        self.pairs.push((analytic, numeric));
    }

    pub fn extend(&mut self, other: GradCheck) {
        self.pairs.extend(other.pairs);
    }

    /// `floor_scale · max |numeric|`, or a tiny constant for an all-zero check.
    pub fn floor(&self, floor_scale: f64) -> f64 {
        let m = self.pairs.iter().map(|p| p.0.abs().max(p.1.abs())).fold(0.0, f64::max);
        (floor_scale * m).max(1e-12)
    }

    pub fn errors(&self, floor_scale: f64) -> Vec<f64> {
        let f = self.floor(floor_scale);
        self.pairs.iter().map(|&(a, n)| relative_error(a, n, f)).collect()
    }

    /// Fraction of coordinates within `tol`, and the worst error.
    pub fn summary(&self, tol: f64, floor_scale: f64) -> (f64, f64) {
        let e = self.errors(floor_scale);
        if e.is_empty() {
            return (1.0, 0.0);
        }
        let ok = e.iter().filter(|v| **v <= tol).count();
        (ok as f64 / e.len() as f64, e.iter().cloned().fold(0.0, f64::max))
    }
}

/// Checks every parameter of every Gaussian against central differences of
/// the multiview loss (step `h` on the raw parameter).
pub fn check_gaussian_gradients(
    gaussians: &[Gaussian<f64>],
    views: &[SupervisionView<'_, f64>],
    cfg: &LossConfig,
    h: f64,
) -> Result<GradCheck> {
    let loss = |gs: &[Gaussian<f64>]| -> Result<f64> {
        let (l, _) = frame_loss(gs, views, cfg, 1.0, false)?;
        Ok(l.iter().map(|v| v.rgb_mse + cfg.lambda_perceptual * v.perceptual + v.mask_mse).sum())
    };
    let (_, grads) = frame_loss(gaussians, views, cfg, 1.0, true)?;
    let grads = grads.expect("requested");
    let mut out = GradCheck::default();
    let mut work = gaussians.to_vec();
    for (i, g) in gaussians.iter().enumerate() {
        let base = g.to_array();
        for k in 0..GAUSSIAN_PARAMS {
            let mut p = base;
            p[k] += h;
            work[i] = Gaussian::from_array(&p);
            let up = loss(&work)?;
            p[k] = base[k] - h;
            work[i] = Gaussian::from_array(&p);
            let down = loss(&work)?;
            work[i] = *g;
            out.push(grads.grads[i][k], (up - down) / (2.0 * h));
        }
    }
    Ok(out)
}
