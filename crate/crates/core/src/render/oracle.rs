use super::project::{depth_order, project_all};
use super::{RenderConfig, RenderOutput};
use crate::camera::CameraPose;
use crate::gaussian::Gaussian;
use crate::image::Image;
use crate::math::Real;

/// Brute-force reference renderer: every pixel visits every projected splat
/// in depth order, with no tiling, no extent culling and no early exit.
pub fn oracle_render<T: Real>(
    gaussians: &[Gaussian<T>],
    pose: &CameraPose,
    cfg: &RenderConfig,
) -> RenderOutput<T> {
    let cam = pose.camera::<T>();
    let (proj, stats) = project_all(gaussians, &cam, cfg);
    let order = depth_order(&proj);
    let cutoff = T::of(cfg.alpha_cutoff as f64);
    let half = T::of(0.5);
    let mut rgb = Image::new(cam.width, cam.height, 3);
    let mut alpha = Image::new(cam.width, cam.height, 1);
    for y in 0..cam.height {
        for x in 0..cam.width {
            let px = T::of(x as f64) + half;
            let py = T::of(y as f64) + half;
            let mut trans = T::one();
            let mut col = [T::zero(); 3];
            for &gi in &order {
                let p = proj[gi as usize].as_ref().unwrap();
                let dx = px - p.mean[0];
                let dy = py - p.mean[1];
                let [a, b, c] = p.conic;
                let q = a * dx * dx + T::of(2.0) * b * dx * dy + c * dy * dy;
                let al = p.opacity * (-half * q).exp();
                if al < cutoff {
                    continue;
                }
                for k in 0..3 {
                    col[k] += p.color[k] * al * trans;
                }
                trans *= T::one() - al;
            }
            for k in 0..3 {
                rgb.set(x, y, k, col[k] + T::of(cfg.background[k] as f64) * trans);
            }
            alpha.set(x, y, 0, T::one() - trans);
        }
    }
    RenderOutput { rgb, alpha, stats }
}
