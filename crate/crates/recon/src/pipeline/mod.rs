//! Inference: chunked and autoregressive reconstruction of long videos,
//! azimuth alignment of a bootstrap frame, and 3x interpolation.

pub mod align;
pub mod chunks;
pub mod interp;
pub mod provider;

use gauss4d_core::{CameraPose, Error, GaussianFrame, GaussianSequence, Image, RenderConfig, Result};
use gauss4d_model::{Model, ModelParams};

pub use align::{align_azimuth, azimuth_grid, bootstrap_views, Alignment};
pub use chunks::{plan_chunks, Chunk, ChunkPlan};
pub use interp::{interpolate_sequence, InterpOptions};
pub use provider::{load_rgba, orthogonal_poses, render_views, ViewProvider, VIEW_OFFSETS};

use crate::grid::replicated_grid;

/// Reconstructs one chunk: column 0 of the grid is the video, columns
/// `1..V` repeat the conditioning views (the video camera is static).
pub fn reconstruct_chunk(
    model: &Model,
    params: &ModelParams,
    video: &[Image],
    views: &[Image],
    poses: &[CameraPose],
    fps: f32,
) -> Result<GaussianSequence> {
    if views.len() != model.cfg.views {
        return Err(Error::shape("views", model.cfg.views, views.len()));
    }
    if poses.len() != views.len() {
        return Err(Error::shape("poses", views.len(), poses.len()));
    }
    let grid = replicated_grid(video, views, poses)?;
    model.forward(params, &grid, fps)
}

#[derive(Debug, Clone)]
pub struct LongReconstruction {
    pub sequence: GaussianSequence,
    pub plan: ChunkPlan,
    pub forward_passes: usize,
}

/// Autoregressive reconstruction of `L ≥ T` frames seen from `camera`. The
/// first chunk is conditioned on the provider's views; each later chunk on
/// renders of the already reconstructed frame at its first input frame.
/// Frames covered twice are taken from the later chunk.
pub fn reconstruct_long(
    model: &Model,
    params: &ModelParams,
    video: &[Image],
    camera: &CameraPose,
    provider: &ViewProvider,
    chunk_len: usize,
    fps: f32,
    render: &RenderConfig,
) -> Result<LongReconstruction> {
    if video.len() < chunk_len {
        return Err(Error::shape("video frames", chunk_len, video.len()));
    }
    let plan = plan_chunks(video.len(), chunk_len)?;
    let mut frames: Vec<Option<GaussianFrame>> = vec![None; video.len()];
    let mut passes = 0;
    for (k, chunk) in plan.chunks.iter().enumerate() {
        let (views, poses) = if k == 0 {
            provider.views(camera)?
        } else {
            let first = frames[chunk.input.start].as_ref().expect("overlap frame reconstructed by an earlier chunk");
            let poses = orthogonal_poses(camera);
            (render_views(first, &poses, render), poses)
        };
        let out = reconstruct_chunk(model, params, &video[chunk.input.clone()], &views, &poses, fps)?;
        passes += 1;
        for (f, frame) in chunk.input.clone().zip(out.frames) {
            frames[f] = Some(frame);
        }
    }
    let frames = frames
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut f = f.expect("plan covers every frame");
            f.index = i as u32;
            f
        })
        .collect();
    Ok(LongReconstruction {
        sequence: GaussianSequence::new(fps, frames)?,
        plan,
        forward_passes: passes,
    })
}
