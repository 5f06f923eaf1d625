//! Central finite differences of the multiview loss with respect to network
//! parameters, run in `f64`.

use gauss4d_core::gradcheck::GradCheck;
use gauss4d_core::image::MODEL_INPUT_CHANNELS;
use gauss4d_core::losses::{frame_loss, LossConfig, SupervisionView};
use gauss4d_core::plucker::plucker_embed;
use gauss4d_core::render::render;
use gauss4d_core::synth::fixtures::random_gaussians;
use gauss4d_core::{CameraPose, Error, Gaussian, Image, RenderConfig, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::params::ModelParams;
use crate::tensor::Tensor;
use crate::unet::Model;

/// Loss of the decoded Gaussians against per-frame supervision views, and
/// optionally its parameter gradient.
pub fn model_loss(
    model: &Model,
    params: &ModelParams<f64>,
    x: &Tensor<f64>,
    frames: usize,
    targets: &[Vec<SupervisionView<'_, f64>>],
    cfg: &LossConfig,
    want_grad: bool,
) -> Result<(f64, Option<ModelParams<f64>>)> {
    if targets.len() != frames {
        return Err(Error::shape("target frames", frames, targets.len()));
    }
    let cache = model.forward_raw(params, x.clone(), frames)?;
    let sets = model.gaussians(&cache)?;
    let mut total = 0.0;
    let mut upstream = Vec::with_capacity(frames);
    for (gs, views) in sets.iter().zip(targets) {
        let (losses, g) = frame_loss(gs, views, cfg, 1.0, want_grad)?;
        total += losses
            .iter()
            .map(|v| v.rgb_mse + cfg.lambda_perceptual * v.perceptual + v.mask_mse)
            .sum::<f64>();
        upstream.extend(g);
    }
    if !want_grad {
        return Ok((total, None));
    }
    let grads = model.backward(params, &cache, &upstream)?;
    Ok((total, Some(grads)))
}

/// Compares analytic and numeric partials at the given `(tensor, element)`
/// coordinates.
pub fn check_param_gradients(
    model: &Model,
    params: &ModelParams<f64>,
    x: &Tensor<f64>,
    frames: usize,
    targets: &[Vec<SupervisionView<'_, f64>>],
    cfg: &LossConfig,
    h: f64,
    coords: &[(usize, usize)],
) -> Result<GradCheck> {
    let (_, grads) = model_loss(model, params, x, frames, targets, cfg, true)?;
    let grads = grads.expect("requested");
    let mut work = params.clone();
    let mut out = GradCheck::default();
    for &(t, i) in coords {
        let base = params.tensors[t].data[i];
        work.tensors[t].data[i] = base + h;
        let (up, _) = model_loss(model, &work, x, frames, targets, cfg, false)?;
        work.tensors[t].data[i] = base - h;
        let (down, _) = model_loss(model, &work, x, frames, targets, cfg, false)?;
        work.tensors[t].data[i] = base;
        out.push(grads.tensors[t].data[i], (up - down) / (2.0 * h));
    }
    Ok(out)
}

/// A small double-precision setup for parameter gradient checks: an 8x8,
/// two-view, two-frame network with every weight perturbed away from its
/// initial value (so zero-initialised branches carry gradient too), random
/// Plücker-consistent inputs and rendered targets.
pub struct GradFixture {
    pub model: Model,
    pub params: ModelParams<f64>,
    pub input: Tensor<f64>,
    pub frames: usize,
    pub cfg: LossConfig,
    rgb: Vec<Vec<Image<f64>>>,
    alpha: Vec<Vec<Image<f64>>>,
    poses: Vec<CameraPose>,
}

impl GradFixture {
    pub fn micro_config() -> ModelConfig {
        ModelConfig {
            input_resolution: 8,
            channel_widths: vec![4, 8],
            attention_levels: vec![1],
            heads: 2,
            frames: 2,
            views: 2,
            output_resolution: 4,
            groups: 2,
            ..ModelConfig::default()
        }
    }

    pub fn new(seed: u64) -> Result<Self> {
        let mcfg = Self::micro_config();
        let model = Model::new(&mcfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params: ModelParams<f64> = model.init_params(seed).cast();
        for t in params.tensors.iter_mut() {
            for v in t.data.iter_mut() {
                *v += rng.random_range(-0.2..0.2);
            }
        }
        let frames = mcfg.frames;
        let res = mcfg.input_resolution;
        let az0 = rng.random_range(0.0..360.0);
        let poses: Vec<CameraPose> = (0..mcfg.views)
            .map(|v| CameraPose::orbit(az0 + 90.0 * v as f64, rng.random_range(-5.0..30.0), res))
            .collect();
        let mut data = Vec::new();
        for _ in 0..frames {
            for pose in &poses {
                let pl: Image<f64> = plucker_embed(pose);
                for px in pl.data.chunks_exact(6) {
                    data.extend((0..3).map(|_| rng.random_range(0.0..1.0)));
                    data.extend_from_slice(px);
                }
            }
        }
        let input = Tensor::from_data(frames * mcfg.views, res, res, MODEL_INPUT_CHANNELS, data)?;
        let cfg = LossConfig {
            supervision_resolution: res,
            render: RenderConfig::smooth(),
            ..LossConfig::default()
        };
        let mut rgb = Vec::new();
        let mut alpha = Vec::new();
        for _ in 0..frames {
            let target: Vec<Gaussian<f64>> = random_gaussians(&mut rng, 12);
            let outs: Vec<_> = poses.iter().map(|p| render(&target, p, &cfg.render)).collect();
            rgb.push(outs.iter().map(|o| o.rgb.clone()).collect());
            alpha.push(outs.into_iter().map(|o| o.alpha).collect());
        }
        Ok(GradFixture {
            model,
            params,
            input,
            frames,
            cfg,
            rgb,
            alpha,
            poses,
        })
    }

    pub fn views(&self) -> Vec<Vec<SupervisionView<'_, f64>>> {
        (0..self.frames)
            .map(|t| {
                self.poses
                    .iter()
                    .enumerate()
                    .map(|(v, pose)| SupervisionView {
                        rgb: &self.rgb[t][v],
                        alpha: &self.alpha[t][v],
                        pose,
                    })
                    .collect()
            })
            .collect()
    }

    /// `count` coordinates drawn uniformly over all parameters.
    pub fn sample_coords(&self, count: usize, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = self.params.numel();
        (0..count)
            .map(|_| {
                let mut k = rng.random_range(0..total);
                let mut t = 0;
                while k >= self.params.tensors[t].data.len() {
                    k -= self.params.tensors[t].data.len();
                    t += 1;
                }
                (t, k)
            })
            .collect()
    }

    pub fn check(&self, coords: &[(usize, usize)], h: f64) -> Result<GradCheck> {
        let views = self.views();
        check_param_gradients(&self.model, &self.params, &self.input, self.frames, &views, &self.cfg, h, coords)
    }
}
