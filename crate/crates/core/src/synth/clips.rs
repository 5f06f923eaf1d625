//! Multiview clip rendering, the motion filter and the dataset manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rig::{build_rig_at, orthogonal_fixed};
use super::scene::{generate_scene, SceneSpec, TEMPLATE_COUNT};
use crate::camera::CameraRig;
use crate::error::{Error, Result};
use crate::gaussian::GaussianSequence;
use crate::image::Image;
use crate::io::{read_pfm, write_pfm, write_png, write_sequence};
use crate::math::Real;
use crate::par;
use crate::render::{render, RenderConfig};

/// Keep clips whose motion score is strictly larger than this.
pub const MOTION_THRESHOLD: f64 = 0.15;
/// Frame rate the motion filter samples at.
pub const MOTION_FPS: f32 = 2.0;
pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// All rig views of one scene at the output frame rate: `views[camera][frame]`
/// (RGBA), cameras in rig order (fixed, then random).
#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub fps: f32,
    pub views: Vec<Vec<Image>>,
}

impl RenderedScene {
    pub fn frames(&self) -> usize {
        self.views.first().map_or(0, |v| v.len())
    }

    /// Frame ranges `[start, end)` of the consecutive 1-second clips.
    pub fn clip_ranges(&self) -> Vec<(usize, usize)> {
        let per = self.fps.round() as usize;
        (0..self.frames() / per).map(|k| (k * per, (k + 1) * per)).collect()
    }
}

fn frame_stride(base: f32, out: f32) -> Result<usize> {
    let ratio = base as f64 / out as f64;
    if !(out > 0.0) || (ratio - ratio.round()).abs() > 1e-6 || ratio < 1.0 {
        return Err(Error::invalid(format!("output fps {out} must divide base fps {base}")));
    }
    Ok(ratio.round() as usize)
}

/// Renders every rig camera at `fps_out` (every `base/fps_out`-th frame).
pub fn render_clips(
    seq: &GaussianSequence,
    rig: &CameraRig,
    fps_out: f32,
    cfg: &RenderConfig,
) -> Result<RenderedScene> {
    let stride = frame_stride(seq.fps, fps_out)?;
    let frames: Vec<_> = seq.frames.iter().step_by(stride).collect();
    let poses: Vec<_> = rig.all().cloned().collect();
    let views = par::map_slice(&poses, |pose| {
        frames.iter().map(|f| render(&f.gaussians, pose, cfg).rgba()).collect()
    });
    Ok(RenderedScene { fps: fps_out, views })
}

/// Opacity-weighted mean pixel displacement of projected Gaussian centres
/// between consecutive 2-fps frames, averaged over the four orthogonal
/// 0-deg fixed cameras.
pub fn motion_score(seq: &GaussianSequence, rig: &CameraRig) -> Result<f64> {
    let stride = ((seq.fps / MOTION_FPS).round() as usize).max(1);
    let frames: Vec<_> = seq.frames.iter().step_by(stride).collect();
    if frames.len() < 2 {
        return Err(Error::invalid("motion score needs at least two frames at 2 fps"));
    }
    if rig.fixed.len() < 16 {
        return Err(Error::invalid("motion score needs the 16-camera fixed ring"));
    }
    let mut total = 0.0;
    let cams = orthogonal_fixed(0);
    for &ci in &cams {
        let cam = rig.fixed[ci].camera::<f64>();
        let mut acc = 0.0;
        for pair in frames.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.len() != b.len() {
                return Err(Error::shape("gaussians per frame", a.len(), b.len()));
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for (ga, gb) in a.gaussians.iter().zip(&b.gaussians) {
                let pa = cam.project(ga.center.map(|v| v as f64));
                let pb = cam.project(gb.center.map(|v| v as f64));
                if let (Some(pa), Some(pb)) = (pa, pb) {
                    let w = ga.opacity as f64;
                    num += w * ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
                    den += w;
                }
            }
            if den > 0.0 {
                acc += num / den;
            }
        }
        total += acc / (frames.len() - 1) as f64;
    }
    Ok(total / cams.len() as f64)
}

/// One 1-second clip. Field order is the on-disk record order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub scene_id: String,
    pub template: usize,
    pub scene_seed: u64,
    pub clip_index: usize,
    pub start_time: f64,
    /// Frame rate of the stored renders.
    pub fps: f32,
    /// First stored frame of the clip (scene-global, at `fps`).
    pub start_frame: usize,
    pub frames: usize,
    pub motion_score: f64,
    pub kept: bool,
    /// Scene directory relative to the dataset root.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSettings {
    pub resolution: usize,
    pub base_fps: f32,
    pub fps: f32,
    pub duration: f64,
    pub background: [f32; 3],
}

impl RenderSettings {
    /// Renderer settings for supervising against these clips.
    pub fn render_config(&self) -> RenderConfig {
        RenderConfig::default().with_background(self.background)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestHeader {
    format: String,
    version: u32,
    rig: CameraRig,
    render: RenderSettings,
    threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub version: u32,
    pub rig: CameraRig,
    pub render: RenderSettings,
    pub threshold: f64,
    pub clips: Vec<ClipRecord>,
}

impl DatasetManifest {
    pub fn kept(&self) -> impl Iterator<Item = &ClipRecord> {
        self.clips.iter().filter(|c| c.kept)
    }

    pub fn kept_count(&self) -> usize {
        self.kept().count()
    }

    /// Header line followed by one JSON record per clip.
    pub fn to_text(&self) -> String {
        let header = ManifestHeader {
            format: "gauss4d-manifest".into(),
            version: self.version,
            rig: self.rig.clone(),
            render: self.render.clone(),
            threshold: self.threshold,
        };
        let mut out = serde_json::to_string(&header).expect("serialisable") + "\n";
        for c in &self.clips {
            out += &serde_json::to_string(c).expect("serialisable");
            out.push('\n');
        }
        out
    }

    pub fn from_reader(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::Truncated("manifest header".into()))??;
        let header: ManifestHeader =
            serde_json::from_str(&first).map_err(|e| Error::Malformed(format!("manifest header: {e}")))?;
        if header.version != MANIFEST_VERSION {
            return Err(Error::VersionMismatch {
                expected: MANIFEST_VERSION,
                found: header.version,
            });
        }
        let mut clips = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            clips.push(
                serde_json::from_str(&line)
                    .map_err(|e| Error::Malformed(format!("manifest record {}: {e}", k + 1)))?,
            );
        }
        Ok(DatasetManifest {
            version: header.version,
            rig: header.rig,
            render: header.render,
            threshold: header.threshold,
            clips,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(BufReader::new(fs::File::open(path)?))
    }
}

/// Recomputes `kept = motion_score > threshold`; returns `(kept, total)`.
pub fn filter_manifest(manifest: &mut DatasetManifest, threshold: f64) -> (usize, usize) {
    manifest.threshold = threshold;
    for c in manifest.clips.iter_mut() {
        c.kept = c.motion_score > threshold;
    }
    (manifest.kept_count(), manifest.clips.len())
}

/// Read access to rendered clips, on disk or in memory.
pub trait ClipSource: Sync {
    fn manifest(&self) -> &DatasetManifest;
    /// RGBA render of rig camera `camera` at clip-local frame `frame`.
    fn view(&self, clip: &ClipRecord, camera: usize, frame: usize) -> Result<Image>;
    /// Ground-truth Gaussian sequence of a scene at the base frame rate.
    fn ground_truth(&self, scene_id: &str) -> Result<GaussianSequence>;
}

#[derive(Debug, Clone)]
pub struct DatasetOptions {
    pub scenes: usize,
    pub seed: u64,
    pub base_fps: f32,
    pub fps: f32,
    /// Seconds per scene; each second becomes one clip.
    pub duration: f64,
    pub resolution: usize,
    pub render: RenderConfig,
    /// Restrict to these template indices (cycled); all templates if empty.
    pub templates: Vec<usize>,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            scenes: 4,
            seed: 0,
            base_fps: 24.0,
            fps: 8.0,
            duration: 2.0,
            resolution: super::rig::DEFAULT_RESOLUTION,
            render: RenderConfig::default(),
            templates: Vec::new(),
        }
    }
}

impl DatasetOptions {
    fn scene(&self, i: usize) -> (usize, u64, SceneSpec) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xD1B5_4A32_D192_ED03);
        let mut scene_seed = 0;
        for _ in 0..=i {
            scene_seed = rng.random::<u64>();
        }
        let template = if self.templates.is_empty() {
            i % TEMPLATE_COUNT
        } else {
            self.templates[i % self.templates.len()]
        };
        let spec = SceneSpec::template(template, scene_seed, self.duration, self.base_fps);
        (template, scene_seed, spec)
    }
}

pub fn scene_id(i: usize) -> String {
    format!("{i:04}")
}

/// Per-clip motion scores computed on the base-rate sequence.
fn clip_records(
    opts: &DatasetOptions,
    i: usize,
    template: usize,
    scene_seed: u64,
    seq: &GaussianSequence,
    rig: &CameraRig,
) -> Result<Vec<ClipRecord>> {
    let per_base = opts.base_fps.round() as usize;
    let per_out = opts.fps.round() as usize;
    let clips = seq.len() / per_base;
    (0..clips)
        .map(|k| {
            let sub = GaussianSequence {
                fps: seq.fps,
                frames: seq.frames[k * per_base..(k + 1) * per_base].to_vec(),
            };
            let score = motion_score(&sub, rig)?;
            Ok(ClipRecord {
                scene_id: scene_id(i),
                template,
                scene_seed,
                clip_index: k,
                start_time: k as f64,
                fps: opts.fps,
                start_frame: k * per_out,
                frames: per_out,
                motion_score: score,
                kept: score > MOTION_THRESHOLD,
                path: format!("scenes/{}", scene_id(i)),
            })
        })
        .collect()
}

fn manifest_for(opts: &DatasetOptions, rig: CameraRig, clips: Vec<ClipRecord>) -> DatasetManifest {
    DatasetManifest {
        version: MANIFEST_VERSION,
        rig,
        render: RenderSettings {
            resolution: opts.resolution,
            base_fps: opts.base_fps,
            fps: opts.fps,
            duration: opts.duration,
            background: opts.render.background,
        },
        threshold: MOTION_THRESHOLD,
        clips,
    }
}

/// In-memory dataset: rendered scenes plus their ground truth.
pub struct MemoryDataset {
    manifest: DatasetManifest,
    scenes: BTreeMap<String, (GaussianSequence, RenderedScene)>,
}

impl MemoryDataset {
    pub fn generate(opts: &DatasetOptions) -> Result<Self> {
        let rig = build_rig_at(opts.seed, opts.resolution);
        let mut clips = Vec::new();
        let mut scenes = BTreeMap::new();
        for i in 0..opts.scenes {
            let (template, scene_seed, spec) = opts.scene(i);
            let seq = generate_scene(&spec)?;
            clips.extend(clip_records(opts, i, template, scene_seed, &seq, &rig)?);
            let rendered = render_clips(&seq, &rig, opts.fps, &opts.render)?;
            scenes.insert(scene_id(i), (seq, rendered));
        }
        Ok(MemoryDataset {
            manifest: manifest_for(opts, rig, clips),
            scenes,
        })
    }

    /// Builds a dataset from explicit sequences (one scene each).
    pub fn from_sequences(
        sequences: Vec<GaussianSequence>,
        rig: CameraRig,
        fps: f32,
        render: &RenderConfig,
    ) -> Result<Self> {
        let mut clips = Vec::new();
        let mut scenes = BTreeMap::new();
        let base_fps = sequences.first().map_or(24.0, |s| s.fps);
        let opts = DatasetOptions {
            scenes: sequences.len(),
            base_fps,
            fps,
            duration: sequences.first().map_or(1.0, |s| s.len() as f64 / s.fps as f64),
            resolution: rig.fixed.first().map_or(64, |p| p.width),
            render: *render,
            ..Default::default()
        };
        for (i, seq) in sequences.into_iter().enumerate() {
            clips.extend(clip_records(&opts, i, usize::MAX, 0, &seq, &rig)?);
            let rendered = render_clips(&seq, &rig, fps, render)?;
            scenes.insert(scene_id(i), (seq, rendered));
        }
        Ok(MemoryDataset {
            manifest: manifest_for(&opts, rig, clips),
            scenes,
        })
    }

    pub fn manifest_mut(&mut self) -> &mut DatasetManifest {
        &mut self.manifest
    }

    pub fn rendered(&self, scene_id: &str) -> Option<&RenderedScene> {
        self.scenes.get(scene_id).map(|s| &s.1)
    }

    /// Writes the dataset to disk in the directory layout read by
    /// [`DiskDataset`].
    pub fn write(&self, dir: impl AsRef<Path>, previews: bool) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        for (id, (seq, rendered)) in &self.scenes {
            let scene_dir = dir.join("scenes").join(id);
            fs::create_dir_all(&scene_dir)?;
            write_sequence(seq, scene_dir.join("gt.g4ds"))?;
            for (k, frames) in rendered.views.iter().enumerate() {
                let cam_dir = scene_dir.join(format!("cam{k}"));
                fs::create_dir_all(&cam_dir)?;
                for (t, img) in frames.iter().enumerate() {
                    write_pfm(img, cam_dir.join(format!("frame{t}.pfm")))?;
                    if previews {
                        write_png(img, cam_dir.join(format!("frame{t}.png")))?;
                    }
                }
            }
        }
        self.manifest.write(dir.join(MANIFEST_FILE))
    }
}

impl ClipSource for MemoryDataset {
    fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    fn view(&self, clip: &ClipRecord, camera: usize, frame: usize) -> Result<Image> {
        let (_, r) = self
            .scenes
            .get(&clip.scene_id)
            .ok_or_else(|| Error::invalid(format!("unknown scene {}", clip.scene_id)))?;
        r.views
            .get(camera)
            .and_then(|v| v.get(clip.start_frame + frame))
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no view cam{camera} frame{}", clip.start_frame + frame)))
    }

    fn ground_truth(&self, scene_id: &str) -> Result<GaussianSequence> {
        self.scenes
            .get(scene_id)
            .map(|s| s.0.clone())
            .ok_or_else(|| Error::invalid(format!("unknown scene {scene_id}")))
    }
}

/// Dataset stored as `scenes/<id>/cam<k>/frame<t>.pfm` plus the manifest.
pub struct DiskDataset {
    root: PathBuf,
    manifest: DatasetManifest,
}

impl DiskDataset {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let manifest = DatasetManifest::read(root.join(MANIFEST_FILE))?;
        Ok(DiskDataset { root, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

impl ClipSource for DiskDataset {
    fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    fn view(&self, clip: &ClipRecord, camera: usize, frame: usize) -> Result<Image> {
        read_pfm(
            self.root
                .join(&clip.path)
                .join(format!("cam{camera}"))
                .join(format!("frame{}.pfm", clip.start_frame + frame)),
        )
    }

    fn ground_truth(&self, scene_id: &str) -> Result<GaussianSequence> {
        crate::io::read_sequence(self.root.join("scenes").join(scene_id).join("gt.g4ds"))
    }
}

/// Mean over pixels of `|a - b|`, used by tests comparing renders.
pub fn mean_abs_diff<T: Real>(a: &Image<T>, b: &Image<T>) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| (*x - *y).abs().f64()).sum::<f64>() / a.data.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{Gaussian, GaussianFrame};
    use crate::render::render_rgba;
    use crate::synth::scene::SceneSpec;
    use crate::synth::rig::build_rig;

    fn build_translating(px_per_step: f64, res: usize) -> GaussianSequence {
        // Gaussian at the origin moving along +x; fixed cameras at azimuth 0
        // and 180 see it move sideways at depth 1.5, the 90/270 cameras see
        // it move along their optical axis.
        let pose = CameraPose::orbit(0.0, 0.0, res);
        let fx = pose.camera::<f64>().fx;
        let per_half_second = px_per_step * 1.5 / fx;
        let frames = (0..24)
            .map(|t| {
                let x = per_half_second * 2.0 * t as f64 / 24.0;
                let g = Gaussian::isotropic([x as f32, 0.0, 0.0], 0.05, 0.8, [1.0, 0.5, 0.2]).unwrap();
                GaussianFrame::new(t, vec![g])
            })
            .collect();
        GaussianSequence::new(24.0, frames).unwrap()
    }

    use crate::camera::CameraPose;

    #[test]
    fn stride_selection_and_direct_render() {
        let spec = SceneSpec::template(0, 3, 1.0, 24.0);
        let seq = generate_scene(&spec).unwrap();
        let rig = build_rig_at(1, 16);
        let cfg = RenderConfig::default();
        let r = render_clips(&seq, &rig, 8.0, &cfg).unwrap();
        assert_eq!(r.views.len(), 48);
        assert_eq!(r.frames(), 8);
        assert_eq!(r.clip_ranges(), vec![(0, 8)]);
        for (k, t) in [(0, 0), (5, 2), (40, 7)] {
            let direct = render_rgba(&seq.frames[3 * t], rig.get(k).unwrap(), &cfg);
            assert_eq!(r.views[k][t], direct);
        }
        assert!(render_clips(&seq, &rig, 7.0, &cfg).is_err());
        assert!(render_clips(&seq, &rig, 48.0, &cfg).is_err());
    }

    #[test]
    fn static_scene_frames_identical_and_score_zero() {
        let spec = SceneSpec::template(11, 5, 1.0, 24.0);
        let seq = generate_scene(&spec).unwrap();
        let rig = build_rig_at(2, 16);
        let r = render_clips(&seq, &rig, 8.0, &RenderConfig::default()).unwrap();
        for view in &r.views {
            assert!(view.iter().all(|f| f == &view[0]));
        }
        assert_eq!(motion_score(&seq, &rig).unwrap(), 0.0);
    }

    #[test]
    fn translating_gaussian_matches_projection_oracle() {
        let seq = build_translating(4.0, 64);
        let rig = build_rig_at(0, 64);
        let s = motion_score(&seq, &rig).unwrap();
        // 4 px in the 0 and 180 deg views, 0 px in the 90 and 270 deg views
        assert!((s - 2.0).abs() < 1e-4, "{s}");
        let other = build_rig_at(99, 64);
        assert_eq!(s, motion_score(&seq, &other).unwrap());
    }

    #[test]
    fn single_frame_rejected() {
        let seq = build_translating(1.0, 16);
        let short = GaussianSequence::new(24.0, seq.frames[..5].to_vec()).unwrap();
        assert!(motion_score(&short, &build_rig(0)).is_err());
    }

    fn record(score: f64) -> ClipRecord {
        ClipRecord {
            scene_id: "0000".into(),
            template: 0,
            scene_seed: 0,
            clip_index: 0,
            start_time: 0.0,
            fps: 8.0,
            start_frame: 0,
            frames: 8,
            motion_score: score,
            kept: false,
            path: "scenes/0000".into(),
        }
    }

    fn manifest(scores: &[f64]) -> DatasetManifest {
        DatasetManifest {
            version: MANIFEST_VERSION,
            rig: build_rig(0),
            render: RenderSettings {
                resolution: 64,
                base_fps: 24.0,
                fps: 8.0,
                duration: 1.0,
                background: [0.0; 3],
            },
            threshold: MOTION_THRESHOLD,
            clips: scores.iter().map(|s| record(*s)).collect(),
        }
    }

    #[test]
    fn filter_is_strict() {
        let mut m = manifest(&[0.0, 0.15, 0.1500001, 0.3, 0.0]);
        assert_eq!(filter_manifest(&mut m, MOTION_THRESHOLD), (2, 5));
        assert!(!m.clips[1].kept);
        assert_eq!(filter_manifest(&mut m, 0.0), (3, 5));
        assert_eq!(filter_manifest(&mut m, 1e9), (0, 5));
    }

    #[test]
    fn engineered_split() {
        let rig = build_rig_at(0, 64);
        let seqs: Vec<_> = [0.1, 0.5, 0.2, 0.6, 0.25, 0.35].iter().map(|p| build_translating(*p, 64)).collect();
        let scores: Vec<f64> = seqs.iter().map(|s| motion_score(s, &rig).unwrap()).collect();
        let mut m = manifest(&scores);
        filter_manifest(&mut m, MOTION_THRESHOLD);
        let kept: Vec<bool> = m.clips.iter().map(|c| c.kept).collect();
        assert_eq!(kept, vec![false, true, false, true, false, true]);
    }

    #[test]
    fn manifest_text_round_trip() {
        let m = manifest(&[0.2, 0.01]);
        let text = m.to_text();
        assert_eq!(text.lines().count(), 3);
        let back = DatasetManifest::from_reader(text.as_bytes()).unwrap();
        assert_eq!(back, m);
        let bad = text.replacen("\"version\":1", "\"version\":7", 1);
        assert!(matches!(
            DatasetManifest::from_reader(bad.as_bytes()),
            Err(Error::VersionMismatch { .. })
        ));
        assert!(DatasetManifest::from_reader("garbage\n".as_bytes()).is_err());
    }

    #[test]
    fn disk_and_memory_agree() {
        let opts = DatasetOptions {
            scenes: 2,
            seed: 4,
            duration: 1.0,
            resolution: 16,
            ..Default::default()
        };
        let mem = MemoryDataset::generate(&opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        mem.write(dir.path(), true).unwrap();
        let disk = DiskDataset::open(dir.path()).unwrap();
        assert_eq!(disk.manifest(), mem.manifest());
        assert_eq!(disk.manifest().clips.len(), 2);
        let clip = &disk.manifest().clips[1];
        for (cam, frame) in [(0, 0), (17, 7)] {
            assert_eq!(disk.view(clip, cam, frame).unwrap(), mem.view(clip, cam, frame).unwrap());
        }
        assert!(dir.path().join("scenes/0001/cam3/frame2.png").exists());
        assert_eq!(disk.ground_truth("0001").unwrap(), mem.ground_truth("0001").unwrap());
        let again = MemoryDataset::generate(&opts).unwrap();
        assert_eq!(again.manifest().to_text(), mem.manifest().to_text());
    }

    #[test]
    fn clip_count_is_scenes_times_seconds() {
        let opts = DatasetOptions {
            scenes: 3,
            duration: 2.0,
            resolution: 8,
            ..Default::default()
        };
        let m = MemoryDataset::generate(&opts).unwrap();
        assert_eq!(m.manifest().clips.len(), 6);
        assert_eq!(m.manifest().clips[3].start_frame, 8);
        let empty = MemoryDataset::generate(&DatasetOptions { scenes: 0, ..opts }).unwrap();
        assert!(empty.manifest().clips.is_empty());
    }
}
