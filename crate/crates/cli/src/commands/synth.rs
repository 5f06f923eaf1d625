use std::path::PathBuf;

use clap::Args;
use gauss4d_core::synth::{filter_manifest, DatasetManifest, DatasetOptions, MemoryDataset, DEFAULT_RESOLUTION, MANIFEST_FILE, MOTION_THRESHOLD};

use crate::failure::Failure;
use crate::header::Header;

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Number of scenes to generate.
    #[arg(long)]
    pub scenes: usize,
    /// Root seed for scenes and the camera rig.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Base animation and render rate.
    #[arg(long, default_value_t = 24.0)]
    pub fps: f32,
    /// Rate the training clips are sampled at.
    #[arg(long, default_value_t = 8.0)]
    pub clip_fps: f32,
    /// Seconds per scene; each second becomes one clip.
    #[arg(long, default_value_t = 2.0)]
    pub duration: f64,
    /// Square render resolution in pixels.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Restrict to these template indices, cycled over scenes.
    #[arg(long, value_delimiter = ',')]
    pub templates: Vec<usize>,
    /// Also write PNG previews next to the PFM renders.
    #[arg(long)]
    pub previews: bool,
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn gen(a: GenArgs, header: &mut Header) -> Result<(), Failure> {
    if !(a.fps > 0.0 && a.clip_fps > 0.0 && a.clip_fps <= a.fps) {
        return Err(Failure::Usage(format!("need 0 < --clip-fps <= --fps, got {} and {}", a.clip_fps, a.fps)));
    }
    if a.resolution == 0 || !(a.duration > 0.0) {
        return Err(Failure::Usage("--resolution and --duration must be positive".into()));
    }
    let opts = DatasetOptions {
        scenes: a.scenes,
        seed: a.seed,
        base_fps: a.fps,
        fps: a.clip_fps,
        duration: a.duration,
        resolution: a.resolution,
        templates: a.templates.clone(),
        ..Default::default()
    };
    header.set("seed", a.seed);
    header.set("scenes", a.scenes);
    header.set("base_fps", a.fps);
    header.set("clip_fps", a.clip_fps);
    header.set("duration", a.duration);
    header.set("resolution", a.resolution);
    header.set("templates", format!("{:?}", a.templates));
    header.set("threshold", MOTION_THRESHOLD);
    header.set("previews", a.previews);
    header.set("out", a.out.display());
    header.print();
    if a.scenes == 0 {
        eprintln!("warning: --scenes 0 writes an empty manifest");
    }
    let data = MemoryDataset::generate(&opts)?;
    data.write(&a.out, a.previews)
        .map_err(Failure::context(format!("writing dataset to {}", a.out.display())))?;
    let m = gauss4d_core::synth::ClipSource::manifest(&data);
    println!("clips={} kept={} manifest={}", m.clips.len(), m.kept_count(), a.out.join(MANIFEST_FILE).display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// Dataset directory holding the manifest.
    #[arg(long)]
    pub data: PathBuf,
    /// Keep clips whose motion score is strictly larger than this.
    #[arg(long, default_value_t = MOTION_THRESHOLD)]
    pub threshold: f64,
}

pub fn filter(a: FilterArgs, header: &mut Header) -> Result<(), Failure> {
    if !(a.threshold >= 0.0) {
        return Err(Failure::Usage(format!("--threshold must be >= 0, got {}", a.threshold)));
    }
    header.set("data", a.data.display());
    header.set("threshold", a.threshold);
    header.print();
    let path = a.data.join(MANIFEST_FILE);
    let mut m = DatasetManifest::read(&path).map_err(Failure::context(path.display()))?;
    let (kept, total) = filter_manifest(&mut m, a.threshold);
    m.write(&path).map_err(Failure::context(path.display()))?;
    println!("kept={kept} total={total} threshold={}", a.threshold);
    Ok(())
}
