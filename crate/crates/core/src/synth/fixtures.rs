//! Random Gaussian sets and poses for tests and benchmarks.

use rand::Rng;

use crate::camera::CameraPose;
use crate::gaussian::Gaussian;
use crate::math::{quat_normalize, Real};

/// `n` random anisotropic Gaussians inside a sphere of radius 0.6, with
/// opacities in `[0.15, 0.95]` and scales in `[0.02, 0.15]`.
pub fn random_gaussians<T: Real, R: Rng>(rng: &mut R, n: usize) -> Vec<Gaussian<T>> {
    (0..n)
        .map(|_| {
            let center = loop {
                let c: [f64; 3] = [
                    rng.random_range(-0.6..0.6),
                    rng.random_range(-0.6..0.6),
                    rng.random_range(-0.6..0.6),
                ];
                if c.iter().map(|v| v * v).sum::<f64>() <= 0.36 {
                    break c;
                }
            };
            let scale: [f64; 3] = [
                rng.random_range(0.02..0.15),
                rng.random_range(0.02..0.15),
                rng.random_range(0.02..0.15),
            ];
            let q = quat_normalize([
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]);
            let t = |v: f64| T::of(v);
            Gaussian {
                center: center.map(t),
                scale: scale.map(t),
                rotation: q.map(t),
                opacity: t(rng.random_range(0.15..0.95)),
                color: [
                    t(rng.random_range(0.0..1.0)),
                    t(rng.random_range(0.0..1.0)),
                    t(rng.random_range(0.0..1.0)),
                ],
            }
        })
        .collect()
}

/// Random rig-style pose: radius 1.5, fov 49.1, azimuth in `[0, 360)` and
/// elevation in `[-5, 60]`.
pub fn random_pose<R: Rng>(rng: &mut R, resolution: usize) -> CameraPose {
    CameraPose::orbit(
        rng.random_range(0.0..360.0),
        rng.random_range(-5.0..60.0),
        resolution,
    )
}
