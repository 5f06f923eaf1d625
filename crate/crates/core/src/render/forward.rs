use super::project::{depth_order, project_all, Projected};
use super::{RenderConfig, RenderOutput, MIN_TRANSMITTANCE};
use crate::camera::CameraPose;
use crate::gaussian::Gaussian;
use crate::image::Image;
use crate::math::Real;
use crate::par;

/// Compact per-tile copy of what the pixel loops read.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Splat<T> {
    pub mean: [T; 2],
    pub conic: [T; 3],
    pub opacity: T,
    pub color: [T; 3],
    /// `[x0, x1, y0, y1)`
    pub bbox: [u32; 4],
    /// Exponents below this give `α` well under the cutoff.
    pub min_power: T,
}

impl<T: Real> Splat<T> {
    fn new(p: &Projected<T>, cutoff: T) -> Self {
        // conservative margin so the exact `α < cutoff` test still decides
        // every borderline pixel
        let min_power = if cutoff > T::zero() && p.opacity > T::zero() {
            (cutoff / p.opacity).ln() - T::of(1e-2)
        } else {
            T::neg_infinity()
        };
        Splat {
            mean: p.mean,
            conic: p.conic,
            opacity: p.opacity,
            color: p.color,
            bbox: p.bbox.map(|v| v as u32),
            min_power,
        }
    }

    #[inline]
    pub fn covers(&self, x: usize, y: usize) -> bool {
        let (x, y) = (x as u32, y as u32);
        x >= self.bbox[0] && x < self.bbox[1] && y >= self.bbox[2] && y < self.bbox[3]
    }

    /// `(α, exp(power), dx, dy)` at a pixel centre; `None` when `α` is
    /// certainly below the cutoff.
    #[inline]
    pub fn alpha_at(&self, px: T, py: T) -> Option<(T, T, T, T)> {
        let dx = px - self.mean[0];
        let dy = py - self.mean[1];
        let [a, b, c] = self.conic;
        let power = -T::of(0.5) * (a * dx * dx + c * dy * dy) - b * dx * dy;
        if power < self.min_power {
            return None;
        }
        let g = power.exp();
        Some((self.opacity * g, g, dx, dy))
    }
}

/// Screen tiling with per-tile splat lists in front-to-back order.
pub(crate) struct Tiles<T> {
    pub size: usize,
    pub nx: usize,
    /// Gaussian indices per tile.
    pub lists: Vec<Vec<u32>>,
    pub splats: Vec<Vec<Splat<T>>>,
}

impl<T: Real> Tiles<T> {
    pub fn build(proj: &[Option<Projected<T>>], order: &[u32], width: usize, height: usize, cfg: &RenderConfig) -> Tiles<T> {
        let size = cfg.tile_size.max(1);
        let cutoff = T::of(cfg.alpha_cutoff as f64);
        let nx = width.div_ceil(size);
        let ny = height.div_ceil(size);
        let mut lists = vec![Vec::new(); nx * ny];
        let mut splats = vec![Vec::new(); nx * ny];
        for &gi in order {
            let p = proj[gi as usize].as_ref().unwrap();
            let [x0, x1, y0, y1] = p.bbox;
            if x0 >= x1 || y0 >= y1 {
                continue;
            }
            let s = Splat::new(p, cutoff);
            for ty in y0 / size..=(y1 - 1) / size {
                for tx in x0 / size..=(x1 - 1) / size {
                    lists[ty * nx + tx].push(gi);
                    splats[ty * nx + tx].push(s);
                }
            }
        }
        Tiles { size, nx, lists, splats }
    }

    pub fn pixel_range(&self, tile: usize, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let (tx, ty) = (tile % self.nx, tile / self.nx);
        (
            tx * self.size,
            ((tx + 1) * self.size).min(width),
            ty * self.size,
            ((ty + 1) * self.size).min(height),
        )
    }
}

/// Tiled forward render of a Gaussian set.
pub fn render<T: Real>(gaussians: &[Gaussian<T>], pose: &CameraPose, cfg: &RenderConfig) -> RenderOutput<T> {
    let cam = pose.camera::<T>();
    let (w, h) = (cam.width, cam.height);
    let (proj, stats) = project_all(gaussians, &cam, cfg);
    let order = depth_order(&proj);
    let tiles = Tiles::build(&proj, &order, w, h, cfg);
    let bg = cfg.background.map(|v| T::of(v as f64));
    let cutoff = T::of(cfg.alpha_cutoff as f64);
    let t_min = T::of(MIN_TRANSMITTANCE);

    let tile_pixels = par::map_range(tiles.lists.len(), |tile| {
        let (x0, x1, y0, y1) = tiles.pixel_range(tile, w, h);
        let list = &tiles.splats[tile];
        let mut out = Vec::with_capacity((x1 - x0) * (y1 - y0));
        for y in y0..y1 {
            for x in x0..x1 {
                let px = T::of(x as f64 + 0.5);
                let py = T::of(y as f64 + 0.5);
                let mut trans = T::one();
                let mut col = [T::zero(); 3];
                for p in list {
                    if !p.covers(x, y) {
                        continue;
                    }
                    let Some((alpha, _, _, _)) = p.alpha_at(px, py) else {
                        continue;
                    };
                    if alpha < cutoff {
                        continue;
                    }
                    let wgt = alpha * trans;
                    for k in 0..3 {
                        col[k] += p.color[k] * wgt;
                    }
                    trans *= T::one() - alpha;
                    if trans < t_min {
                        break;
                    }
                }
                for k in 0..3 {
                    col[k] += bg[k] * trans;
                }
                out.push((col, T::one() - trans));
            }
        }
        out
    });

    let mut rgb = Image::new(w, h, 3);
    let mut alpha = Image::new(w, h, 1);
    for (tile, pixels) in tile_pixels.into_iter().enumerate() {
        let (x0, x1, y0, _) = tiles.pixel_range(tile, w, h);
        let tw = x1 - x0;
        for (k, (col, a)) in pixels.into_iter().enumerate() {
            let (x, y) = (x0 + k % tw, y0 + k / tw);
            let i = y * w + x;
            rgb.data[3 * i..3 * i + 3].copy_from_slice(&col);
            alpha.data[i] = a;
        }
    }
    RenderOutput { rgb, alpha, stats }
}
