use super::forward::Tiles;
use super::project::{depth_order, project_all, project_backward, SplatGrad};
use super::{RenderConfig, MIN_TRANSMITTANCE};
use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, GAUSSIAN_PARAMS};
use crate::image::Image;
use crate::math::Real;
use crate::par;

/// Per-Gaussian partials of a scalar loss, in [`Gaussian::to_array`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderGradients<T = f32> {
    pub grads: Vec<[T; GAUSSIAN_PARAMS]>,
}

impl<T: Real> RenderGradients<T> {
    pub fn zeros(n: usize) -> Self {
        RenderGradients {
            grads: vec![[T::zero(); GAUSSIAN_PARAMS]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn add_assign(&mut self, other: &RenderGradients<T>) {
        assert_eq!(self.grads.len(), other.grads.len());
        for (a, b) in self.grads.iter_mut().zip(&other.grads) {
            for k in 0..GAUSSIAN_PARAMS {
                a[k] += b[k];
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().all(|g| g.iter().all(|v| v.is_finite()))
    }
}

struct Contribution<T> {
    slot: usize,
    alpha: T,
    gauss: T,
    trans: T,
    dx: T,
    dy: T,
}

/// Analytic gradient of a scalar loss with respect to every Gaussian
/// parameter, given the loss gradient with respect to each rendered RGB and
/// alpha pixel. The forward pass is recomputed per pixel.
pub fn render_backward<T: Real>(
    gaussians: &[Gaussian<T>],
    pose: &CameraPose,
    cfg: &RenderConfig,
    d_rgb: &Image<T>,
    d_alpha: &Image<T>,
) -> Result<RenderGradients<T>> {
    let cam = pose.camera::<T>();
    let (w, h) = (cam.width, cam.height);
    if d_rgb.width != w || d_rgb.height != h || d_rgb.channels != 3 {
        return Err(Error::shape("upstream rgb gradient", w * h * 3, d_rgb.data.len()));
    }
    if d_alpha.width != w || d_alpha.height != h || d_alpha.channels != 1 {
        return Err(Error::shape("upstream alpha gradient", w * h, d_alpha.data.len()));
    }
    if !d_rgb.is_finite() || !d_alpha.is_finite() {
        return Err(Error::NonFinite("upstream render gradient".into()));
    }
    let (proj, _) = project_all(gaussians, &cam, cfg);
    let order = depth_order(&proj);
    let tiles = Tiles::build(&proj, &order, w, h, cfg);
    let bg = cfg.background.map(|v| T::of(v as f64));
    let cutoff = T::of(cfg.alpha_cutoff as f64);
    let t_min = T::of(MIN_TRANSMITTANCE);

    // Per tile, gradients aligned with positions in the tile's splat list.
    let per_tile = par::map_range(tiles.lists.len(), |tile| {
        let list = &tiles.splats[tile];
        let mut acc = vec![SplatGrad::<T>::zero(); list.len()];
        if list.is_empty() {
            return acc;
        }
        let (x0, x1, y0, y1) = tiles.pixel_range(tile, w, h);
        let mut contrib: Vec<Contribution<T>> = Vec::new();
        for y in y0..y1 {
            for x in x0..x1 {
                let pix = y * w + x;
                let g_rgb = [d_rgb.data[3 * pix], d_rgb.data[3 * pix + 1], d_rgb.data[3 * pix + 2]];
                let g_a = d_alpha.data[pix];
                if g_rgb.iter().all(|v| *v == T::zero()) && g_a == T::zero() {
                    continue;
                }
                let px = T::of(x as f64 + 0.5);
                let py = T::of(y as f64 + 0.5);
                contrib.clear();
                let mut trans = T::one();
                for (slot, p) in list.iter().enumerate() {
                    if !p.covers(x, y) {
                        continue;
                    }
                    let Some((alpha, gauss, dx, dy)) = p.alpha_at(px, py) else {
                        continue;
                    };
                    if alpha < cutoff {
                        continue;
                    }
                    contrib.push(Contribution {
                        slot,
                        alpha,
                        gauss,
                        trans,
                        dx,
                        dy,
                    });
                    trans *= T::one() - alpha;
                    if trans < t_min {
                        break;
                    }
                }
                // Colour (and alpha, as colour 1 over background 0) composited
                // behind the current splat, normalised by its transmittance.
                let mut behind = bg;
                let mut behind_a = T::zero();
                for c in contrib.iter().rev() {
                    let p = &list[c.slot];
                    let wgt = c.alpha * c.trans;
                    let mut d_alpha_i = g_a * (T::one() - behind_a);
                    for k in 0..3 {
                        d_alpha_i += g_rgb[k] * (p.color[k] - behind[k]);
                    }
                    d_alpha_i *= c.trans;
                    let a = &mut acc[c.slot];
                    for k in 0..3 {
                        a.color[k] += g_rgb[k] * wgt;
                    }
                    // α = o · exp(power)
                    a.opacity += d_alpha_i * c.gauss;
                    let d_power = d_alpha_i * c.alpha;
                    let [ca, cb, cc] = p.conic;
                    a.mean[0] += d_power * (ca * c.dx + cb * c.dy);
                    a.mean[1] += d_power * (cb * c.dx + cc * c.dy);
                    let half = T::of(0.5);
                    a.conic[0] += -half * d_power * c.dx * c.dx;
                    a.conic[1] += -d_power * c.dx * c.dy;
                    a.conic[2] += -half * d_power * c.dy * c.dy;
                    for k in 0..3 {
                        behind[k] = p.color[k] * c.alpha + (T::one() - c.alpha) * behind[k];
                    }
                    behind_a = c.alpha + (T::one() - c.alpha) * behind_a;
                }
            }
        }
        acc
    });

    let mut screen = vec![SplatGrad::<T>::zero(); gaussians.len()];
    for (tile, acc) in per_tile.iter().enumerate() {
        for (slot, g) in acc.iter().enumerate() {
            screen[tiles.lists[tile][slot] as usize].add(g);
        }
    }
    let grads = par::map_range(gaussians.len(), |i| match &proj[i] {
        Some(p) => project_backward(&gaussians[i], p, &cam, &screen[i]),
        None => [T::zero(); GAUSSIAN_PARAMS],
    });
    Ok(RenderGradients { grads })
}
