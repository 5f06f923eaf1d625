use gauss4d_core::{CameraPose, Error, GaussianFrame, GaussianSequence, RenderConfig, Result};
use gauss4d_model::{Model, ModelParams};

use super::provider::render_views;
use crate::grid::{interpolation_grid, INTERP_FRAMES};

#[derive(Debug, Clone)]
pub struct InterpOptions {
    /// Poses the endpoint renders are taken from (four orthogonal views).
    pub poses: Vec<CameraPose>,
    pub render: RenderConfig,
    /// Emit the input frames themselves at the endpoints instead of the
    /// model's re-reconstruction of them.
    pub keep_endpoints: bool,
}

/// Inserts two frames between every consecutive pair, tripling the frame
/// rate: `N` frames in, `3(N − 1) + 1` out.
pub fn interpolate_sequence(model: &Model, params: &ModelParams, seq: &GaussianSequence, opts: &InterpOptions) -> Result<GaussianSequence> {
    if seq.len() < 2 {
        return Err(Error::shape("frames", 2, seq.len()));
    }
    model
        .check_params(params)
        .map_err(|e| Error::invalid(format!("interpolation parameters do not fit the model: {e}")))?;
    if opts.poses.len() != model.cfg.views {
        return Err(Error::shape("views", model.cfg.views, opts.poses.len()));
    }
    let fps = seq.fps * 3.0;
    let renders = gauss4d_core::par::map_slice(&seq.frames, |f| render_views(f, &opts.poses, &opts.render));
    let pairs: Vec<usize> = (0..seq.len() - 1).collect();
    let outputs = gauss4d_core::par::map_slice(&pairs, |&i| -> Result<Vec<GaussianFrame>> {
        let grid = interpolation_grid(&renders[i], &renders[i + 1], &opts.poses)?;
        let mut out = model.forward(params, &grid, fps)?.frames;
        if opts.keep_endpoints {
            out[0] = seq.frames[i].clone();
            out[INTERP_FRAMES - 1] = seq.frames[i + 1].clone();
        }
        Ok(out)
    });
    let mut frames = Vec::with_capacity(3 * (seq.len() - 1) + 1);
    for (i, out) in outputs.into_iter().enumerate() {
        let out = out?;
        let skip = if i == 0 { 0 } else { 1 };
        frames.extend(out.into_iter().skip(skip));
    }
    for (k, f) in frames.iter_mut().enumerate() {
        f.index = k as u32;
    }
    GaussianSequence::new(fps, frames)
}
