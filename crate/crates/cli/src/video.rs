//! Video directories: `frame<t>.pfm` (or `.png`) plus an optional
//! `video.txt` with `fps=<f>` and one `camera=<az> <el> <radius> <fov_y>` line
//! per frame (a single line applies to all frames).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gauss4d_core::io::{write_pfm, write_png};
use gauss4d_core::{make_camera, CameraPose, Image};
use gauss4d_recon::pipeline::load_rgba;

use crate::failure::Failure;

pub const VIDEO_META: &str = "video.txt";

pub struct Video {
    pub frames: Vec<Image>,
    pub fps: Option<f32>,
    /// Camera of every frame when the metadata lists them.
    pub cameras: Vec<(f64, f64, f64, f64)>,
}

fn frame_path(dir: &Path, t: usize) -> Option<PathBuf> {
    ["pfm", "png"]
        .iter()
        .map(|ext| dir.join(format!("frame{t}.{ext}")))
        .find(|p| p.is_file())
}

pub fn read_video(dir: &Path) -> Result<Video, Failure> {
    if !dir.is_dir() {
        return Err(Failure::Data(format!("video directory {} does not exist", dir.display())));
    }
    let mut frames = Vec::new();
    while let Some(p) = frame_path(dir, frames.len()) {
        frames.push(load_rgba(&p).map_err(Failure::context(p.display()))?);
    }
    if frames.is_empty() {
        return Err(Failure::Data(format!("{} holds no frame0.pfm or frame0.png", dir.display())));
    }
    let (w, h) = (frames[0].width, frames[0].height);
    if let Some(t) = frames.iter().position(|f| (f.width, f.height) != (w, h)) {
        return Err(Failure::Data(format!("frame{t} is {}x{}, frame0 is {w}x{h}", frames[t].width, frames[t].height)));
    }
    let mut fps = None;
    let mut cameras = Vec::new();
    let meta = dir.join(VIDEO_META);
    if meta.is_file() {
        let text = fs::read_to_string(&meta)?;
        for (n, line) in text.lines().map(str::trim).enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Failure::Data(format!("{} line {}: malformed {line:?}", meta.display(), n + 1));
            let (k, v) = line.split_once('=').ok_or_else(bad)?;
            match k.trim() {
                "fps" => fps = Some(v.trim().parse::<f32>().map_err(|_| bad())?),
                "camera" => {
                    let nums: Vec<f64> = v.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| bad())?;
                    if nums.len() != 4 {
                        return Err(bad());
                    }
                    cameras.push((nums[0], nums[1], nums[2], nums[3]));
                }
                _ => return Err(bad()),
            }
        }
        if !(cameras.len() <= 1 || cameras.len() == frames.len()) {
            return Err(Failure::Data(format!(
                "{} lists {} cameras for {} frames",
                meta.display(),
                cameras.len(),
                frames.len()
            )));
        }
    }
    Ok(Video { frames, fps, cameras })
}

impl Video {
    /// The single camera of a static-camera video. Videos whose cameras
    /// move are rejected.
    pub fn static_camera(&self, fallback: (f64, f64)) -> Result<CameraPose, Failure> {
        let (w, h) = (self.frames[0].width, self.frames[0].height);
        let Some(&first) = self.cameras.first() else {
            let p = CameraPose::orbit(fallback.0, fallback.1, w).with_resolution(w, h);
            return Ok(p);
        };
        if let Some(t) = self.cameras.iter().position(|c| *c != first) {
            return Err(Failure::Data(format!(
                "moving-camera video: frame{t} camera {:?} differs from frame0 camera {first:?}; only static-camera videos can be reconstructed",
                self.cameras[t]
            )));
        }
        make_camera(first.0, first.1, first.2, first.3, (w, h)).map_err(Failure::context("video camera"))
    }
}

/// Writes frames (PFM, plus PNG previews when asked) and the metadata.
pub fn write_video(dir: &Path, frames: &[Image], pose: &CameraPose, fps: f32, previews: bool) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))?;
    let mut meta = format!("fps={fps}\n");
    for (t, img) in frames.iter().enumerate() {
        write_pfm(img, dir.join(format!("frame{t}.pfm")))?;
        if previews {
            write_png(img, dir.join(format!("frame{t}.png")))?;
        }
        let _ = writeln!(meta, "camera={} {} {} {}", pose.azimuth, pose.elevation, pose.radius, pose.fov_y);
    }
    fs::write(dir.join(VIDEO_META), meta)?;
    Ok(())
}
