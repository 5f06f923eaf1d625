use gauss4d_core::synth::{orthogonal_fixed, ClipRecord, ClipSource, FIXED_CAMERAS};
use gauss4d_core::{CameraPose, Error, Image, ImageGrid, Result};
use rand::seq::index;
use rand::Rng;

use super::augment::grid_distort;
use super::config::{Stage, TrainConfig};
use crate::grid::{interpolation_grid, replicated_grid, INTERP_FRAMES};

/// Camera choice for one batch, as global rig indices (fixed cameras first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoseDraw {
    /// Reference camera followed by the +90/+180/+270 deg fixed cameras.
    pub inputs: Vec<usize>,
    /// Random-rig cameras, offset by the fixed-camera count.
    pub supervision: Vec<usize>,
}

impl PoseDraw {
    pub fn all(&self) -> impl Iterator<Item = usize> + '_ {
        self.inputs.iter().chain(&self.supervision).copied()
    }
}

pub fn draw_poses<R: Rng + ?Sized>(cfg: &TrainConfig, random_cameras: usize, rng: &mut R) -> PoseDraw {
    let reference = rng.random_range(0..FIXED_CAMERAS);
    let inputs = orthogonal_fixed(reference)[..cfg.input_cameras].to_vec();
    let supervision = index::sample(rng, random_cameras, cfg.supervision_cameras.min(random_cameras))
        .into_iter()
        .map(|k| FIXED_CAMERAS + k)
        .collect();
    PoseDraw { inputs, supervision }
}

/// One training example.
#[derive(Debug, Clone)]
pub struct Batch {
    /// Index into the manifest's clip list.
    pub clip: usize,
    /// Clip-local index of the first frame.
    pub start: usize,
    pub poses: PoseDraw,
    /// `(T, input cameras)` model input.
    pub inputs: ImageGrid,
    /// `(T, input + supervision cameras)` targets; the first columns are the
    /// input cameras.
    pub targets: ImageGrid,
}

impl Batch {
    pub fn input_views(&self) -> usize {
        self.poses.inputs.len()
    }
}

fn pose(source: &dyn ClipSource, k: usize) -> Result<CameraPose> {
    source
        .manifest()
        .rig
        .get(k)
        .cloned()
        .ok_or_else(|| Error::invalid(format!("camera {k} not in rig")))
}

fn target_grid(source: &dyn ClipSource, clip: &ClipRecord, frames: std::ops::Range<usize>, cams: &[usize]) -> Result<ImageGrid> {
    let t = frames.len();
    let mut cells = Vec::with_capacity(t * cams.len());
    let mut poses = Vec::with_capacity(t * cams.len());
    for f in frames {
        for &k in cams {
            cells.push(source.view(clip, k, f)?);
            poses.push(pose(source, k)?);
        }
    }
    ImageGrid::from_cells(t, cams.len(), &cells, &poses)
}

/// Samples a clip from `clips` (manifest indices), a frame window for the
/// stage, the input / supervision cameras, and assembles the grids. Random
/// grid distortion is applied to the non-reference input views only.
pub fn sample_batch<R: Rng + ?Sized>(
    source: &dyn ClipSource,
    clips: &[usize],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Batch> {
    if clips.is_empty() {
        return Err(Error::invalid("no kept clips to sample from"));
    }
    let manifest = source.manifest();
    let clip_index = clips[rng.random_range(0..clips.len())];
    let clip = &manifest.clips[clip_index];
    let t = cfg.grid_frames();
    let span = match cfg.stage {
        Stage::Interp => INTERP_FRAMES,
        _ => t,
    };
    if cfg.stage == Stage::Interp && clip.fps != manifest.render.base_fps {
        return Err(Error::invalid(format!(
            "interpolation needs full-rate renders: clip {} is at {} fps, base rate {}",
            clip.scene_id, clip.fps, manifest.render.base_fps
        )));
    }
    if clip.frames < span {
        return Err(Error::shape("clip frames", span, clip.frames));
    }
    let start = rng.random_range(0..=clip.frames - span);
    let poses = draw_poses(cfg, manifest.rig.random.len(), rng);
    let input_poses: Vec<CameraPose> = poses.inputs.iter().map(|&k| pose(source, k)).collect::<Result<_>>()?;
    let inputs = match cfg.stage {
        Stage::Interp => {
            let first: Vec<Image> = poses.inputs.iter().map(|&k| source.view(clip, k, start)).collect::<Result<_>>()?;
            let last: Vec<Image> = poses
                .inputs
                .iter()
                .map(|&k| source.view(clip, k, start + INTERP_FRAMES - 1))
                .collect::<Result<_>>()?;
            interpolation_grid(&first, &last, &input_poses)?
        }
        _ => {
            let video: Vec<Image> = (start..start + t).map(|f| source.view(clip, poses.inputs[0], f)).collect::<Result<_>>()?;
            let mut views = vec![video[0].clone()];
            for &k in &poses.inputs[1..] {
                let img = source.view(clip, k, start)?;
                views.push(grid_distort(&img, cfg.distortion, rng));
            }
            replicated_grid(&video, &views, &input_poses)?
        }
    };
    let cams: Vec<usize> = poses.all().collect();
    let targets = target_grid(source, clip, start..start + span, &cams)?;
    Ok(Batch {
        clip: clip_index,
        start,
        poses,
        inputs,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gauss4d_core::synth::{DatasetOptions, MemoryDataset, RANDOM_ELEVATION};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data() -> MemoryDataset {
        MemoryDataset::generate(&DatasetOptions {
            scenes: 2,
            duration: 1.0,
            resolution: 16,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn draws_are_orthogonal_fixed_and_in_range() {
        let cfg = TrainConfig::default();
        let rig = gauss4d_core::synth::build_rig(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let d = draw_poses(&cfg, 32, &mut rng);
            assert_eq!(d.inputs.len(), 4);
            let az: Vec<f64> = d.inputs.iter().map(|&k| rig.get(k).unwrap().azimuth).collect();
            for (j, a) in az.iter().enumerate() {
                assert!(d.inputs[j] < FIXED_CAMERAS);
                let rel = (a - az[0]).rem_euclid(360.0);
                assert!((rel - 90.0 * j as f64).abs() < 1e-9);
            }
            assert_eq!(d.supervision.len(), 4);
            for &k in &d.supervision {
                let el = rig.get(k).unwrap().elevation;
                assert!(k >= FIXED_CAMERAS && (RANDOM_ELEVATION.0..=RANDOM_ELEVATION.1).contains(&el));
            }
        }
    }

    #[test]
    fn same_seed_same_batch() {
        let ds = data();
        let cfg = TrainConfig::default();
        let clips: Vec<usize> = (0..ds.manifest().clips.len()).collect();
        let a = sample_batch(&ds, &clips, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = sample_batch(&ds, &clips, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a.inputs, b.inputs);
        assert_eq!(a.targets, b.targets);
        assert_eq!(a.poses, b.poses);
    }

    #[test]
    fn batch_layout() {
        let ds = data();
        let cfg = TrainConfig {
            distortion: 2.0,
            ..Default::default()
        };
        let clips = vec![1];
        let b = sample_batch(&ds, &clips, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let clip = &ds.manifest().clips[1];
        assert_eq!((b.inputs.frames, b.inputs.views), (8, 4));
        assert_eq!((b.targets.frames, b.targets.views), (8, 8));
        for t in 0..8 {
            let direct = ds.view(clip, b.poses.inputs[0], b.start + t).unwrap();
            assert_eq!(b.inputs.rgb(t, 0), direct.channels_range(0, 3));
            assert_eq!(b.targets.rgb(t, 0), direct.channels_range(0, 3));
            for v in 1..4 {
                assert_eq!(b.inputs.rgb(t, v), b.inputs.rgb(0, v));
                let raw = ds.view(clip, b.poses.inputs[v], b.start + t).unwrap();
                assert_eq!(b.targets.rgb(t, v), raw.channels_range(0, 3));
            }
        }
    }

    #[test]
    fn interp_requires_full_rate() {
        let ds = data();
        let cfg = TrainConfig {
            stage: Stage::Interp,
            ..Default::default()
        };
        assert!(sample_batch(&ds, &[0], &cfg, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn empty_clip_list_rejected() {
        let ds = data();
        assert!(sample_batch(&ds, &[], &TrainConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
