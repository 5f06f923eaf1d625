use gauss4d_core::Image;
use rand::Rng;

/// Control points per side of the distortion grid.
pub const DISTORT_GRID: usize = 8;

/// Random smooth warp: an 8x8 grid of displacements uniform in
/// `±magnitude` pixels, bilinearly interpolated over the image, then
/// bilinear resampling with border clamping. All channels share the warp.
pub fn grid_distort<R: Rng + ?Sized>(img: &Image, magnitude: f32, rng: &mut R) -> Image {
    if magnitude <= 0.0 {
        return img.clone();
    }
    let n = DISTORT_GRID;
    let field: Vec<[f32; 2]> = (0..n * n)
        .map(|_| {
            [
                rng.random_range(-magnitude..=magnitude),
                rng.random_range(-magnitude..=magnitude),
            ]
        })
        .collect();
    let mut out = Image::new(img.width, img.height, img.channels);
    let span_x = (img.width.max(2) - 1) as f32;
    let span_y = (img.height.max(2) - 1) as f32;
    for y in 0..img.height {
        let gy = y as f32 / span_y * (n - 1) as f32;
        let y0 = (gy.floor() as usize).min(n - 2);
        let ty = gy - y0 as f32;
        for x in 0..img.width {
            let gx = x as f32 / span_x * (n - 1) as f32;
            let x0 = (gx.floor() as usize).min(n - 2);
            let tx = gx - x0 as f32;
            let mut d = [0.0f32; 2];
            for (k, dk) in d.iter_mut().enumerate() {
                let a = field[y0 * n + x0][k] * (1.0 - tx) + field[y0 * n + x0 + 1][k] * tx;
                let b = field[(y0 + 1) * n + x0][k] * (1.0 - tx) + field[(y0 + 1) * n + x0 + 1][k] * tx;
                *dk = a * (1.0 - ty) + b * ty;
            }
            let sx = x as f32 + 0.5 + d[0];
            let sy = y as f32 + 0.5 + d[1];
            for c in 0..img.channels {
                out.set(x, y, c, img.sample_bilinear(sx, sy, c));
            }
        }
    }
    out
}
