//! Construction of the `(T, V)` model-input grids shared by training and
//! inference.

use gauss4d_core::{CameraPose, Error, Image, ImageGrid, Result};

/// Blend weights of the two inner timesteps of an interpolation grid.
pub const INTERP_WEIGHTS: [(f32, f32); 2] = [(2.0 / 3.0, 1.0 / 3.0), (1.0 / 3.0, 2.0 / 3.0)];
/// Timesteps per interpolation grid (two endpoints, two inserted frames).
pub const INTERP_FRAMES: usize = 4;

/// Column 0 holds the video frames; columns `1..V` repeat `views[v]` at
/// every timestep (`views[0]` is ignored, the video supplies that column).
pub fn replicated_grid(video: &[Image], views: &[Image], poses: &[CameraPose]) -> Result<ImageGrid> {
    if video.is_empty() {
        return Err(Error::shape("frames", 1, 0));
    }
    if views.len() != poses.len() {
        return Err(Error::shape("views", poses.len(), views.len()));
    }
    let t = video.len();
    let v = poses.len();
    let mut cells = Vec::with_capacity(t * v);
    let mut cell_poses = Vec::with_capacity(t * v);
    for frame in video {
        cells.push(frame.clone());
        cells.extend(views[1..].iter().cloned());
        cell_poses.extend(poses.iter().cloned());
    }
    ImageGrid::from_cells(t, v, &cells, &cell_poses)
}

/// Pixelwise blends `x + w·(y − x)`: equal inputs give back `x` exactly.
pub fn blend_views(x: &[Image], y: &[Image], w: f32) -> Result<Vec<Image>> {
    if x.len() != y.len() {
        return Err(Error::shape("views", x.len(), y.len()));
    }
    x.iter()
        .zip(y)
        .map(|(p, q)| {
            p.check_same_shape(q)?;
            let data = p.data.iter().zip(&q.data).map(|(&a, &b)| a + w * (b - a)).collect();
            Image::from_data(p.width, p.height, p.channels, data)
        })
        .collect()
}

/// The 4-step interpolation grid: `start`, two blends, `end`.
pub fn interpolation_grid(start: &[Image], end: &[Image], poses: &[CameraPose]) -> Result<ImageGrid> {
    if start.len() != poses.len() {
        return Err(Error::shape("views", poses.len(), start.len()));
    }
    let mut cells: Vec<Image> = start.to_vec();
    for (_, w) in INTERP_WEIGHTS {
        cells.extend(blend_views(start, end, w)?);
    }
    cells.extend(end.iter().cloned());
    if cells.len() != INTERP_FRAMES * poses.len() {
        return Err(Error::shape("views", start.len(), end.len()));
    }
    let cell_poses: Vec<CameraPose> = (0..INTERP_FRAMES).flat_map(|_| poses.iter().cloned()).collect();
    ImageGrid::from_cells(INTERP_FRAMES, poses.len(), &cells, &cell_poses)
}
