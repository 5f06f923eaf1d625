//! Multiview reconstruction objective: RGB MSE, a perceptual pyramid term and
//! mask MSE, averaged over every supervised (frame, pose) cell.

use std::fmt;
use std::str::FromStr;

use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, GaussianSequence};
use crate::image::{Image, ImageGrid};
use crate::math::Real;
use crate::par;
use crate::render::{render, render_backward, RenderConfig, RenderGradients};

pub const PYRAMID_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerceptualMode {
    Off,
    PyramidL1,
}

impl FromStr for PerceptualMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(PerceptualMode::Off),
            "pyramid_l1" => Ok(PerceptualMode::PyramidL1),
            _ => Err(Error::invalid(format!("unknown perceptual mode {s:?}"))),
        }
    }
}

impl fmt::Display for PerceptualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerceptualMode::Off => "off",
            PerceptualMode::PyramidL1 => "pyramid_l1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub lambda_perceptual: f64,
    pub perceptual_mode: PerceptualMode,
    /// Side of the square supervision renders.
    pub supervision_resolution: usize,
    pub render: RenderConfig,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_perceptual: 1.0,
            perceptual_mode: PerceptualMode::PyramidL1,
            supervision_resolution: 128,
            render: RenderConfig::default(),
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_perceptual >= 0.0) {
            return Err(Error::invalid("lambda_perceptual must be >= 0"));
        }
        self.render.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ViewLoss {
    pub frame: usize,
    pub view: usize,
    pub rgb_mse: f64,
    pub perceptual: f64,
    pub mask_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossReport {
    pub total: f64,
    pub rgb_mse: f64,
    pub perceptual: f64,
    pub mask_mse: f64,
    pub per_view: Vec<ViewLoss>,
}

impl LossReport {
    /// Averages per-cell terms; `total = rgb + λ·perceptual + mask`.
    pub fn from_views(per_view: Vec<ViewLoss>, lambda: f64) -> Self {
        let n = per_view.len().max(1) as f64;
        let rgb_mse = per_view.iter().map(|v| v.rgb_mse).sum::<f64>() / n;
        let perceptual = per_view.iter().map(|v| v.perceptual).sum::<f64>() / n;
        let mask_mse = per_view.iter().map(|v| v.mask_mse).sum::<f64>() / n;
        LossReport {
            total: rgb_mse + lambda * perceptual + mask_mse,
            rgb_mse,
            perceptual,
            mask_mse,
            per_view,
        }
    }

    /// One training-log line.
    pub fn log_line(&self, step: usize) -> String {
        format!(
            "step={step} total={:.6e} rgb={:.6e} perceptual={:.6e} mask={:.6e}",
            self.total, self.rgb_mse, self.perceptual, self.mask_mse
        )
    }
}

/// 2x box downsample; odd edges average only the pixels that exist.
pub fn box_downsample<T: Real>(img: &Image<T>) -> Image<T> {
    let (w, h) = (img.width.div_ceil(2), img.height.div_ceil(2));
    let mut out = Image::new(w, h, img.channels);
    for y in 0..h {
        for x in 0..w {
            let xs = 2 * x..(2 * x + 2).min(img.width);
            let ys = 2 * y..(2 * y + 2).min(img.height);
            let n = T::of((xs.len() * ys.len()) as f64);
            for c in 0..img.channels {
                let mut s = T::zero();
                for yy in ys.clone() {
                    for xx in xs.clone() {
                        s += img.get(xx, yy, c);
                    }
                }
                out.set(x, y, c, s / n);
            }
        }
    }
    out
}

/// Adjoint of [`box_downsample`]: spreads `grad` (at the coarse size) back
/// onto a `width x height` image.
fn box_downsample_adjoint<T: Real>(grad: &Image<T>, width: usize, height: usize) -> Image<T> {
    let mut out = Image::new(width, height, grad.channels);
    for y in 0..height {
        for x in 0..width {
            let (cx, cy) = (x / 2, y / 2);
            let nx = (2 * cx + 2).min(width) - 2 * cx;
            let ny = (2 * cy + 2).min(height) - 2 * cy;
            let n = T::of((nx * ny) as f64);
            for c in 0..grad.channels {
                out.set(x, y, c, grad.get(cx, cy, c) / n);
            }
        }
    }
    out
}

/// Mean absolute difference averaged over a 3-level box pyramid (full
/// resolution, then two 2x downsamples).
pub fn perceptual_pyramid_l1<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    Ok(pyramid_l1(a, b, false)?.0)
}

fn pyramid_l1<T: Real>(a: &Image<T>, b: &Image<T>, want_grad: bool) -> Result<(f64, Option<Image<T>>)> {
    a.check_same_shape(b)?;
    let mut levels = vec![(a.clone(), b.clone())];
    for _ in 1..PYRAMID_LEVELS {
        let (pa, pb) = levels.last().unwrap();
        let next = (box_downsample(pa), box_downsample(pb));
        levels.push(next);
    }
    let nl = PYRAMID_LEVELS as f64;
    let mut value = 0.0;
    for (pa, pb) in &levels {
        let n = pa.data.len().max(1) as f64;
        value += pa.data.iter().zip(&pb.data).map(|(x, y)| (*x - *y).abs().f64()).sum::<f64>() / n;
    }
    value /= nl;
    if !want_grad {
        return Ok((value, None));
    }
    // back-propagate level by level, coarsest first
    let mut grad: Option<Image<T>> = None;
    for l in (0..PYRAMID_LEVELS).rev() {
        let (pa, pb) = &levels[l];
        let scale = T::of(1.0 / (nl * pa.data.len().max(1) as f64));
        let mut g = Image::new(pa.width, pa.height, pa.channels);
        for ((gv, x), y) in g.data.iter_mut().zip(&pa.data).zip(&pb.data) {
            let d = *x - *y;
            *gv = if d > T::zero() {
                scale
            } else if d < T::zero() {
                -scale
            } else {
                T::zero()
            };
        }
        if let Some(coarse) = grad.take() {
            let up = box_downsample_adjoint(&coarse, pa.width, pa.height);
            for (gv, u) in g.data.iter_mut().zip(&up.data) {
                *gv += *u;
            }
        }
        grad = Some(g);
    }
    Ok((value, grad))
}

/// One supervised view: target RGB (3 channels) and alpha (1 channel) with
/// their pose.
#[derive(Debug, Clone)]
pub struct SupervisionView<'a, T = f32> {
    pub rgb: &'a Image<T>,
    pub alpha: &'a Image<T>,
    pub pose: &'a CameraPose,
}

/// Loss terms of one rendered view against its target, plus the gradients
/// with respect to the rendered RGB and alpha (scaled by `weight`).
pub fn image_loss<T: Real>(
    rgb: &Image<T>,
    alpha: &Image<T>,
    target: &SupervisionView<'_, T>,
    cfg: &LossConfig,
    weight: f64,
    want_grad: bool,
) -> Result<(ViewLoss, Option<(Image<T>, Image<T>)>)> {
    rgb.check_same_shape(target.rgb)?;
    alpha.check_same_shape(target.alpha)?;
    let n_rgb = rgb.data.len().max(1) as f64;
    let n_a = alpha.data.len().max(1) as f64;
    let rgb_mse = rgb.data.iter().zip(&target.rgb.data).map(|(x, y)| (*x - *y).f64().powi(2)).sum::<f64>() / n_rgb;
    let mask_mse = alpha.data.iter().zip(&target.alpha.data).map(|(x, y)| (*x - *y).f64().powi(2)).sum::<f64>() / n_a;
    let use_p = cfg.perceptual_mode == PerceptualMode::PyramidL1;
    let (perceptual, p_grad) = if use_p {
        pyramid_l1(rgb, target.rgb, want_grad && cfg.lambda_perceptual != 0.0)?
    } else {
        (0.0, None)
    };
    let loss = ViewLoss {
        rgb_mse,
        perceptual,
        mask_mse,
        ..Default::default()
    };
    if !want_grad {
        return Ok((loss, None));
    }
    let kr = T::of(2.0 * weight / n_rgb);
    let ka = T::of(2.0 * weight / n_a);
    let mut d_rgb = Image::new(rgb.width, rgb.height, 3);
    for ((g, x), y) in d_rgb.data.iter_mut().zip(&rgb.data).zip(&target.rgb.data) {
        *g = kr * (*x - *y);
    }
    if let Some(pg) = p_grad {
        let kp = T::of(weight * cfg.lambda_perceptual);
        for (g, p) in d_rgb.data.iter_mut().zip(&pg.data) {
            *g += kp * *p;
        }
    }
    let mut d_alpha = Image::new(alpha.width, alpha.height, 1);
    for ((g, x), y) in d_alpha.data.iter_mut().zip(&alpha.data).zip(&target.alpha.data) {
        *g = ka * (*x - *y);
    }
    Ok((loss, Some((d_rgb, d_alpha))))
}

/// Loss of one Gaussian set against several views. `weight` scales every
/// view's contribution (callers pass `1 / total cells`). With `want_grad`
/// the per-Gaussian gradients of `weight · Σ_views loss` are returned.
pub fn frame_loss<T: Real>(
    gaussians: &[Gaussian<T>],
    views: &[SupervisionView<'_, T>],
    cfg: &LossConfig,
    weight: f64,
    want_grad: bool,
) -> Result<(Vec<ViewLoss>, Option<RenderGradients<T>>)> {
    let results = par::map_slice(views, |view| -> Result<_> {
        let out = render(gaussians, view.pose, &cfg.render);
        let (loss, upstream) = image_loss(&out.rgb, &out.alpha, view, cfg, weight, want_grad)?;
        let grads = match upstream {
            Some((d_rgb, d_alpha)) => Some(render_backward(gaussians, view.pose, &cfg.render, &d_rgb, &d_alpha)?),
            None => None,
        };
        Ok((loss, grads))
    });
    let mut losses = Vec::with_capacity(views.len());
    let mut total = want_grad.then(|| RenderGradients::zeros(gaussians.len()));
    for (v, r) in results.into_iter().enumerate() {
        let (mut loss, g) = r?;
        loss.view = v;
        losses.push(loss);
        if let (Some(t), Some(g)) = (total.as_mut(), g) {
            t.add_assign(&g);
        }
    }
    Ok((losses, total))
}

fn check_targets(seq: &GaussianSequence, targets: &ImageGrid, cfg: &LossConfig) -> Result<()> {
    if seq.len() != targets.frames {
        return Err(Error::shape("frames", targets.frames, seq.len()));
    }
    if targets.width != cfg.supervision_resolution || targets.height != cfg.supervision_resolution {
        return Err(Error::shape(
            "supervision resolution",
            cfg.supervision_resolution,
            targets.width,
        ));
    }
    if targets.views == 0 {
        return Err(Error::invalid("no supervision views"));
    }
    Ok(())
}

/// Loss of a sequence against a `(T, V)` target grid (RGB and alpha
/// channels), with optional per-frame gradients.
pub fn loss_and_grad(
    seq: &GaussianSequence,
    targets: &ImageGrid,
    cfg: &LossConfig,
    want_grad: bool,
) -> Result<(LossReport, Option<Vec<RenderGradients>>)> {
    cfg.validate()?;
    check_targets(seq, targets, cfg)?;
    let weight = 1.0 / (targets.frames * targets.views) as f64;
    let mut per_view = Vec::new();
    let mut grads = Vec::new();
    for t in 0..targets.frames {
        let rgbs: Vec<Image> = (0..targets.views).map(|v| targets.rgb(t, v)).collect();
        let alphas: Vec<Image> = (0..targets.views).map(|v| targets.alpha(t, v)).collect();
        let views: Vec<SupervisionView> = (0..targets.views)
            .map(|v| SupervisionView {
                rgb: &rgbs[v],
                alpha: &alphas[v],
                pose: targets.pose(t, v),
            })
            .collect();
        let (losses, g) = frame_loss(&seq.frames[t].gaussians, &views, cfg, weight, want_grad)?;
        per_view.extend(losses.into_iter().map(|mut l| {
            l.frame = t;
            l
        }));
        if let Some(g) = g {
            grads.push(g);
        }
    }
    let report = LossReport::from_views(per_view, cfg.lambda_perceptual);
    if !report.total.is_finite() {
        return Err(Error::NonFinite("loss".into()));
    }
    Ok((report, want_grad.then_some(grads)))
}

/// `L_RGB + L_Mask` of a sequence against a target grid.
pub fn loss_total(seq: &GaussianSequence, targets: &ImageGrid, cfg: &LossConfig) -> Result<LossReport> {
    Ok(loss_and_grad(seq, targets, cfg, false)?.0)
}
