//! Mapping from the 14 raw output channels of each pixel to a Gaussian.

use gauss4d_core::gaussian::GAUSSIAN_PARAMS;
use gauss4d_core::math::{normalize4_backward, sigmoid};
use gauss4d_core::{Error, Gaussian, GaussianFrame, GaussianSequence, Real, Result};

use crate::tensor::Tensor;

pub const RAW_CHANNELS: usize = 14;

/// Activation constants: `center = c_box·tanh(r)`,
/// `scale = s_max·sigmoid(r) + s_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub c_box: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            c_box: 1.0,
            s_min: 1e-3,
            s_max: 0.2,
        }
    }
}

fn quat_or_identity<T: Real>(r: &[T]) -> ([T; 4], Option<T>) {
    let n = (r[6] * r[6] + r[7] * r[7] + r[8] * r[8] + r[9] * r[9]).sqrt();
    if n > T::of(1e-20) && n.is_finite() {
        ([r[6] / n, r[7] / n, r[8] / n, r[9] / n], Some(n))
    } else {
        ([T::one(), T::zero(), T::zero(), T::zero()], None)
    }
}

pub fn decode_one<T: Real>(r: &[T], cfg: &DecodeConfig) -> Gaussian<T> {
    let (cb, smin, smax) = (T::of(cfg.c_box), T::of(cfg.s_min), T::of(cfg.s_max));
    let (rotation, _) = quat_or_identity(r);
    Gaussian {
        center: [cb * r[0].tanh(), cb * r[1].tanh(), cb * r[2].tanh()],
        scale: [
            smax * sigmoid(r[3]) + smin,
            smax * sigmoid(r[4]) + smin,
            smax * sigmoid(r[5]) + smin,
        ],
        rotation,
        opacity: sigmoid(r[10]),
        color: [sigmoid(r[11]), sigmoid(r[12]), sigmoid(r[13])],
    }
}

/// Gradient with respect to the raw channels given the gradient with respect
/// to the decoded parameters.
pub fn decode_one_backward<T: Real>(r: &[T], d: &[T; GAUSSIAN_PARAMS], cfg: &DecodeConfig) -> [T; RAW_CHANNELS] {
    let (cb, smax) = (T::of(cfg.c_box), T::of(cfg.s_max));
    let mut out = [T::zero(); RAW_CHANNELS];
    for k in 0..3 {
        let t = r[k].tanh();
        out[k] = d[k] * cb * (T::one() - t * t);
        let s = sigmoid(r[3 + k]);
        out[3 + k] = d[3 + k] * smax * s * (T::one() - s);
    }
    if let (_, Some(_)) = quat_or_identity(r) {
        let dq = normalize4_backward([r[6], r[7], r[8], r[9]], [d[6], d[7], d[8], d[9]]);
        out[6..10].copy_from_slice(&dq);
    }
    for k in 10..14 {
        let s = sigmoid(r[k]);
        out[k] = d[k] * s * (T::one() - s);
    }
    out
}

/// Splits `(T·V, H_out, W_out, 14)` features into `T` Gaussian sets, each the
/// concatenation over views of the row-major pixel maps.
pub fn decode_frames<T: Real>(features: &Tensor<T>, frames: usize, cfg: &DecodeConfig) -> Result<Vec<Vec<Gaussian<T>>>> {
    if features.c != RAW_CHANNELS {
        return Err(Error::shape("raw channels", RAW_CHANNELS, features.c));
    }
    if frames == 0 || features.n % frames != 0 {
        return Err(Error::shape("frames", frames, features.n));
    }
    let per_frame = features.data.len() / frames;
    Ok(features
        .data
        .chunks_exact(per_frame)
        .map(|f| f.chunks_exact(RAW_CHANNELS).map(|r| decode_one(r, cfg)).collect())
        .collect())
}

pub fn decode_gaussians(features: &Tensor, frames: usize, fps: f32, cfg: &DecodeConfig) -> Result<GaussianSequence> {
    let sets = decode_frames(features, frames, cfg)?;
    let frames = sets
        .into_iter()
        .enumerate()
        .map(|(t, g)| GaussianFrame::new(t as u32, g))
        .collect();
    GaussianSequence::new(fps, frames)
}

/// Chains per-frame Gaussian gradients back onto the raw feature tensor.
pub fn decode_backward<T: Real>(
    features: &Tensor<T>,
    grads: &[&[[T; GAUSSIAN_PARAMS]]],
    cfg: &DecodeConfig,
) -> Result<Tensor<T>> {
    let total: usize = grads.iter().map(|g| g.len()).sum();
    if total * RAW_CHANNELS != features.data.len() {
        return Err(Error::shape("gaussian gradients", features.data.len() / RAW_CHANNELS, total));
    }
    let mut out = Tensor::zeros(features.n, features.h, features.w, features.c);
    let rows = grads.iter().flat_map(|g| g.iter());
    for ((dst, r), d) in out.data.chunks_exact_mut(RAW_CHANNELS).zip(features.data.chunks_exact(RAW_CHANNELS)).zip(rows) {
        dst.copy_from_slice(&decode_one_backward(r, d, cfg));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_vector_decodes_to_neutral_gaussian() {
        let g = decode_one(&[0.0f64; 14], &DecodeConfig::default());
        assert_eq!(g.center, [0.0; 3]);
        assert_eq!(g.opacity, 0.5);
        assert_eq!(g.color, [0.5; 3]);
        assert_eq!(g.rotation, [1.0, 0.0, 0.0, 0.0]);
        assert!((g.scale[0] - 0.101).abs() < 1e-15);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let cfg = DecodeConfig::default();
        let r: Vec<f64> = (0..14).map(|i| ((i * 7 % 11) as f64 - 5.0) * 0.31).collect();
        let d: [f64; 14] = std::array::from_fn(|i| 0.1 * i as f64 - 0.6);
        let a = decode_one_backward(&r, &d, &cfg);
        let f = |r: &[f64]| {
            let g = decode_one(r, &cfg).to_array();
            g.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>()
        };
        for k in 0..14 {
            let (mut p, mut m) = (r.clone(), r.clone());
            p[k] += 1e-6;
            m[k] -= 1e-6;
            let fd = (f(&p) - f(&m)) / 2e-6;
            assert!((fd - a[k]).abs() < 1e-7, "{k}: {fd} vs {}", a[k]);
        }
    }

    proptest! {
        #[test]
        fn decoded_gaussians_are_valid(r in prop::collection::vec(-30.0f32..30.0, 14)) {
            let g = decode_one(&r, &DecodeConfig::default());
            prop_assert!(g.validate().is_ok(), "{:?}", g);
        }
    }
}
