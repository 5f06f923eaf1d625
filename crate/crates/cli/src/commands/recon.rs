use std::fs;
use std::path::PathBuf;

use clap::Args;
use gauss4d_core::camera::{RIG_FOV_Y, RIG_RADIUS};
use gauss4d_core::eval::evaluate_sequences;
use gauss4d_core::io::{read_sequence, write_sequence};
use gauss4d_core::render::render as render_splats;
use gauss4d_core::{make_camera, CameraPose, GaussianSequence, RenderConfig};
use gauss4d_model::{load_checkpoint, Checkpoint, Model};
use gauss4d_recon::pipeline::{align_azimuth, interpolate_sequence, load_rgba, orthogonal_poses, reconstruct_long, InterpOptions, ViewProvider};

use crate::failure::Failure;
use crate::header::Header;
use crate::video::{read_video, write_video};

fn checkpoint(path: &PathBuf) -> Result<(Checkpoint, Model), Failure> {
    let ck = load_checkpoint(path).map_err(Failure::context(format!("checkpoint {}", path.display())))?;
    let model = Model::new(&ck.config).map_err(Failure::context(format!("checkpoint {}", path.display())))?;
    model
        .check_params(&ck.params)
        .map_err(Failure::context(format!("checkpoint {}", path.display())))?;
    Ok((ck, model))
}

fn sequence(path: &PathBuf) -> Result<GaussianSequence, Failure> {
    read_sequence(path).map_err(Failure::context(format!("sequence {}", path.display())))
}

fn save(seq: &GaussianSequence, path: &PathBuf) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    write_sequence(seq, path).map_err(Failure::context(format!("writing {}", path.display())))
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Video directory (frame<t>.pfm|png, optional video.txt).
    #[arg(long)]
    pub video: PathBuf,
    /// `gt` renders the first frame of --gt around the video camera; otherwise
    /// a directory with view0..view3 (.pfm or .png) at +0/90/180/270 deg.
    #[arg(long, default_value = "gt")]
    pub views: String,
    /// Ground-truth sequence for `--views gt`.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Base checkpoint (from `train base`).
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Frames per forward pass (T).
    #[arg(long, default_value_t = 16)]
    pub chunk: usize,
    /// Camera azimuth when the video has no video.txt.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub azimuth: f64,
    /// Camera elevation when the video has no video.txt.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub elevation: f64,
    /// Frame rate when the video has no video.txt.
    #[arg(long, default_value_t = 8.0)]
    pub fps: f32,
    /// Output sequence (G4DS).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn reconstruct(a: ReconstructArgs, header: &mut Header) -> Result<(), Failure> {
    if a.chunk < 2 {
        return Err(Failure::Usage(format!("--chunk must be at least 2, got {}", a.chunk)));
    }
    if a.views == "gt" && a.gt.is_none() {
        return Err(Failure::Usage("--views gt needs --gt <sequence.g4ds>".into()));
    }
    let video = read_video(&a.video)?;
    let camera = video.static_camera((a.azimuth, a.elevation))?;
    let fps = video.fps.unwrap_or(a.fps);
    let (ck, model) = checkpoint(&a.checkpoint)?;
    let res = ck.config.input_resolution;
    if (camera.width, camera.height) != (res, res) {
        return Err(Failure::Data(format!(
            "video frames are {}x{} but the checkpoint expects {res}x{res}",
            camera.width, camera.height
        )));
    }
    let render = RenderConfig::default();
    let provider = if a.views == "gt" {
        let gt = sequence(a.gt.as_ref().expect("checked"))?;
        let frame = gt.frames.first().cloned().ok_or_else(|| Failure::Data("ground-truth sequence has no frames".into()))?;
        ViewProvider::GroundTruth { frame, render }
    } else {
        let dir = PathBuf::from(&a.views);
        let paths = (0..4)
            .map(|k| {
                ["pfm", "png"]
                    .iter()
                    .map(|e| dir.join(format!("view{k}.{e}")))
                    .find(|p| p.is_file())
                    .ok_or_else(|| Failure::Data(format!("{} has no view{k}.pfm or view{k}.png", dir.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ViewProvider::External { paths }
    };
    let l = video.frames.len();
    let chunk = if l < a.chunk {
        eprintln!("warning: video has {l} frames, shorter than --chunk {}; using one chunk of {l}", a.chunk);
        l.max(1)
    } else {
        a.chunk
    };
    header.set("video", a.video.display());
    header.set("frames", l);
    header.set("fps", fps);
    header.set("camera", format!("az={} el={} r={} fov={}", camera.azimuth, camera.elevation, camera.radius, camera.fov_y));
    header.set("views", &a.views);
    header.set("checkpoint", a.checkpoint.display());
    header.set("chunk", chunk);
    header.set("out", a.out.display());
    header.print();
    let out = reconstruct_long(&model, &ck.params, &video.frames, &camera, &provider, chunk, fps, &render)?;
    save(&out.sequence, &a.out)?;
    for (k, c) in out.plan.chunks.iter().enumerate() {
        println!("chunk {k}: input {}..{} new {}..{}", c.input.start, c.input.end, c.new.start, c.new.end);
    }
    println!("frames={} forward_passes={} out={}", out.sequence.len(), out.forward_passes, a.out.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct InterpolateArgs {
    /// Input sequence (G4DS).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output sequence (G4DS).
    #[arg(long)]
    pub out: PathBuf,
    /// Interpolation checkpoint (from `train interp`).
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Emit the model's re-reconstruction of the input frames instead of
    /// copying them to the endpoints.
    #[arg(long)]
    pub model_endpoints: bool,
}

pub fn interpolate(a: InterpolateArgs, header: &mut Header) -> Result<(), Failure> {
    let seq = sequence(&a.input)?;
    let (ck, model) = checkpoint(&a.checkpoint)?;
    let res = ck.config.input_resolution;
    let opts = InterpOptions {
        poses: orthogonal_poses(&CameraPose::orbit(0.0, 0.0, res)),
        render: RenderConfig::default(),
        keep_endpoints: !a.model_endpoints,
    };
    header.set("in", a.input.display());
    header.set("frames", seq.len());
    header.set("fps", seq.fps);
    header.set("checkpoint", a.checkpoint.display());
    header.set("keep_endpoints", opts.keep_endpoints);
    header.set("out", a.out.display());
    header.print();
    let out = interpolate_sequence(&model, &ck.params, &seq, &opts)?;
    save(&out, &a.out)?;
    println!("frames_in={} frames_out={} fps={} out={}", seq.len(), out.len(), out.fps, a.out.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Sequence to render (G4DS).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Camera azimuth in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub azimuth: f64,
    /// Camera elevation in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub elevation: f64,
    /// Orbit radius.
    #[arg(long, default_value_t = RIG_RADIUS)]
    pub radius: f64,
    /// Vertical field of view in degrees.
    #[arg(long, default_value_t = RIG_FOV_Y)]
    pub fov: f64,
    /// Square output resolution in pixels.
    #[arg(long, default_value_t = 128)]
    pub resolution: usize,
    /// Video directory: PFM frames, PNG previews and video.txt.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn render(a: RenderArgs, header: &mut Header) -> Result<(), Failure> {
    let pose = make_camera(a.azimuth, a.elevation, a.radius, a.fov, (a.resolution, a.resolution)).map_err(|e| Failure::Usage(e.to_string()))?;
    let seq = sequence(&a.input)?;
    let cfg = RenderConfig::default();
    header.set("in", a.input.display());
    header.set("frames", seq.len());
    header.set("camera", format!("az={} el={} r={} fov={} res={}", a.azimuth, a.elevation, a.radius, a.fov, a.resolution));
    header.set("out", a.out.display());
    header.print();
    let outs = gauss4d_core::par::map_slice(&seq.frames, |f| render_splats(&f.gaussians, &pose, &cfg));
    for (t, o) in outs.iter().enumerate() {
        println!("frame {t}: {}", o.stats);
    }
    let frames: Vec<_> = outs.iter().map(|o| o.rgba()).collect();
    write_video(&a.out, &frames, &pose, seq.fps, true)?;
    println!("frames={} out={}", frames.len(), a.out.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    /// Gaussian sequence; --frame selects the frame to align.
    #[arg(long)]
    pub gaussians: PathBuf,
    /// Frame index within the sequence.
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    /// Reference image (PFM or PNG).
    #[arg(long)]
    pub image: PathBuf,
    /// Azimuth grid spacing in degrees.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Orbit radius of the search cameras.
    #[arg(long, default_value_t = RIG_RADIUS)]
    pub radius: f64,
    /// Vertical field of view of the search cameras.
    #[arg(long, default_value_t = RIG_FOV_Y)]
    pub fov: f64,
    /// Write the residual curve as `theta,residual` CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

pub fn align(a: AlignArgs, header: &mut Header) -> Result<(), Failure> {
    if !(a.step > 0.0 && a.step <= 360.0) {
        return Err(Failure::Usage(format!("--step must lie in (0, 360], got {}", a.step)));
    }
    let seq = sequence(&a.gaussians)?;
    let frame = seq
        .frames
        .get(a.frame)
        .ok_or_else(|| Failure::Data(format!("--frame {} out of range: sequence has {} frames", a.frame, seq.len())))?;
    let img = load_rgba(&a.image).map_err(Failure::context(a.image.display()))?;
    let pose = make_camera(0.0, 0.0, a.radius, a.fov, (img.width, img.height)).map_err(|e| Failure::Usage(e.to_string()))?;
    header.set("gaussians", a.gaussians.display());
    header.set("frame", a.frame);
    header.set("image", a.image.display());
    header.set("step", a.step);
    header.set("radius", a.radius);
    header.set("fov", a.fov);
    header.print();
    let al = align_azimuth(frame, &img, a.step, &pose, &RenderConfig::default())?;
    if let Some(p) = &a.curve {
        let mut s = String::from("theta,residual\n");
        for (t, r) in &al.curve {
            s.push_str(&format!("{t},{r}\n"));
        }
        fs::write(p, s)?;
    }
    println!("theta={} residual={}", al.theta, al.residual);
    Ok(())
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Predicted sequence (G4DS).
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth sequence (G4DS).
    #[arg(long)]
    pub gt: PathBuf,
    /// Take every k-th ground-truth frame (e.g. 3 for 24 fps truth against an 8 fps prediction).
    #[arg(long, default_value_t = 1)]
    pub gt_stride: usize,
    /// `orthogonal`, `ring:N` (N cameras at 0 elevation) or `az:el,az:el,...`.
    #[arg(long, default_value = "orthogonal")]
    pub rig: String,
    /// Square render resolution of the evaluation cameras.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Scene label stored in the report.
    #[arg(long, default_value = "scene")]
    pub scene_id: String,
    /// Write the JSON report here (it is always printed).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the per-frame PSNR curve as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

pub fn parse_rig(spec: &str, res: usize) -> Result<Vec<CameraPose>, Failure> {
    let bad = |why: &str| Failure::Usage(format!("--rig {spec:?}: {why}"));
    if spec == "orthogonal" {
        return Ok(orthogonal_poses(&CameraPose::orbit(0.0, 0.0, res)));
    }
    if let Some(n) = spec.strip_prefix("ring:") {
        let n: usize = n.parse().map_err(|_| bad("ring count must be an integer"))?;
        if n == 0 {
            return Err(bad("ring needs at least one camera"));
        }
        return Ok((0..n).map(|k| CameraPose::orbit(k as f64 * 360.0 / n as f64, 0.0, res)).collect());
    }
    spec.split(',')
        .map(|p| {
            let (az, el) = p.split_once(':').ok_or_else(|| bad("expected az:el pairs"))?;
            let az: f64 = az.trim().parse().map_err(|_| bad("azimuth is not a number"))?;
            let el: f64 = el.trim().parse().map_err(|_| bad("elevation is not a number"))?;
            make_camera(az, el, RIG_RADIUS, RIG_FOV_Y, (res, res)).map_err(|e| bad(&e.to_string()))
        })
        .collect()
}

pub fn eval(a: EvalArgs, header: &mut Header) -> Result<(), Failure> {
    if a.gt_stride == 0 || a.resolution == 0 {
        return Err(Failure::Usage("--gt-stride and --resolution must be positive".into()));
    }
    let poses = parse_rig(&a.rig, a.resolution)?;
    let pred = sequence(&a.pred)?;
    let mut gt = sequence(&a.gt)?;
    if a.gt_stride > 1 {
        let frames = gt.frames.iter().step_by(a.gt_stride).cloned().collect();
        gt = GaussianSequence::new(gt.fps / a.gt_stride as f32, frames)?;
    }
    header.set("pred", a.pred.display());
    header.set("gt", a.gt.display());
    header.set("gt_stride", a.gt_stride);
    header.set("rig", &a.rig);
    header.set("resolution", a.resolution);
    header.print();
    let report = evaluate_sequences(&a.scene_id, &pred, &gt, &poses, &RenderConfig::default())
        .map_err(Failure::context(format!("{} vs {}", a.pred.display(), a.gt.display())))?;
    let json = report.to_json();
    if let Some(p) = &a.out {
        fs::write(p, &json)?;
    }
    if let Some(p) = &a.curve {
        fs::write(p, report.curve_csv())?;
    }
    println!("{json}");
    Ok(())
}
