//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `GAUSS4D_ACCEPTANCE=1,3,8` restricts the run to the listed criteria.
//! `GAUSS4D_ACCEPTANCE_STRICT=1` makes any FAIL exit non-zero.
//! Criteria 4, 6 and 7 share one trained fixture.

use std::cell::OnceCell;
use std::time::Instant;

use gauss4d_core::eval::{evaluate_sequences, psnr};
use gauss4d_core::gradcheck::{check_gaussian_gradients, GradCheck};
use gauss4d_core::io::{decode_sequence, encode_sequence};
use gauss4d_core::losses::{LossConfig, PerceptualMode, SupervisionView};
use gauss4d_core::render::{oracle_render, render, render_rgba};
use gauss4d_core::synth::fixtures::{random_gaussians, random_pose};
use gauss4d_core::synth::{build_rig_at, filter_manifest, generate_scene, motion_score, ClipSource, DatasetOptions, MemoryDataset, SceneSpec};
use gauss4d_core::{CameraPose, Gaussian, GaussianFrame, GaussianSequence, Image, RenderConfig};
use gauss4d_model::gradcheck::GradFixture;
use gauss4d_model::rearrange::{cross_view_tokens, cross_view_untokens, temporal_tokens, temporal_untokens};
use gauss4d_model::{extend_temporal, read_checkpoint, write_checkpoint, Checkpoint, Model, ModelConfig, ModelParams, Tensor};
use gauss4d_recon::pipeline::{
    align_azimuth, interpolate_sequence, orthogonal_poses, plan_chunks, reconstruct_long, render_views, InterpOptions, ViewProvider,
};
use gauss4d_recon::train::{pretrain_3d, train_base, train_interp, Hooks, StepRecord, TrainConfig, Trained};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OVERFIT_PSNR: f64 = 30.0;
const OVERFIT_STEPS: usize = 2000;
const OVERFIT_MINUTES: f64 = 60.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// The single-clip overfit fixture and everything trained on it.
struct Fixture {
    data: MemoryDataset,
    pretrain: OnceCell<(Trained, f64)>,
    base: OnceCell<(Trained, f64)>,
    random: OnceCell<(Trained, f64)>,
}

fn overfit_data() -> MemoryDataset {
    MemoryDataset::generate(&DatasetOptions {
        scenes: 1,
        duration: 1.0,
        resolution: 64,
        templates: vec![0],
        ..Default::default()
    })
    .unwrap()
}

fn overfit_config() -> TrainConfig {
    TrainConfig {
        steps_per_epoch: OVERFIT_STEPS,
        lr: 1e-3,
        warmup_steps: 20,
        resample_poses: false,
        val_fraction: 0.0,
        ..Default::default()
    }
}

fn progress(tag: &'static str) -> impl FnMut(&StepRecord) {
    move |r: &StepRecord| {
        if r.step % 50 == 0 {
            println!("    {tag} step {:4}  psnr {:.2}", r.step, r.psnr);
        }
    }
}

impl Fixture {
    fn new() -> Self {
        Fixture {
            data: overfit_data(),
            pretrain: OnceCell::new(),
            base: OnceCell::new(),
            random: OnceCell::new(),
        }
    }

    fn pretrain(&self) -> &(Trained, f64) {
        self.pretrain.get_or_init(|| {
            let t0 = Instant::now();
            let cfg = TrainConfig {
                steps_per_epoch: 300,
                resample_poses: true,
                ..overfit_config()
            };
            let mut f = progress("pretrain3d");
            let mut hooks = Hooks {
                on_step: Some(&mut f),
                ..Default::default()
            };
            let t = pretrain_3d(&cfg, &ModelConfig::tiny(), &self.data, &mut hooks).unwrap();
            (t, t0.elapsed().as_secs_f64())
        })
    }

    fn base(&self) -> &(Trained, f64) {
        self.base.get_or_init(|| {
            let (pre, _) = self.pretrain();
            let t0 = Instant::now();
            let mut f = progress("base4d");
            let mut hooks = Hooks {
                on_step: Some(&mut f),
                stop_at_psnr: Some(OVERFIT_PSNR),
                ..Default::default()
            };
            let t = train_base(&overfit_config(), &ModelConfig::tiny(), &self.data, Some((&pre.model, &pre.params)), &mut hooks).unwrap();
            (t, t0.elapsed().as_secs_f64())
        })
    }

    fn random(&self) -> &(Trained, f64) {
        self.random.get_or_init(|| {
            let t0 = Instant::now();
            let cfg = TrainConfig {
                random_init: true,
                ..overfit_config()
            };
            let mut f = progress("random-init base4d");
            let mut hooks = Hooks {
                on_step: Some(&mut f),
                stop_at_psnr: Some(OVERFIT_PSNR),
                ..Default::default()
            };
            let t = train_base(&cfg, &ModelConfig::tiny(), &self.data, None, &mut hooks).unwrap();
            (t, t0.elapsed().as_secs_f64())
        })
    }
}

fn rasterizer_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let cfg = RenderConfig::default();
    let (mut rgb, mut alpha) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(1..=256);
        let gs: Vec<Gaussian<f32>> = random_gaussians(&mut rng, n);
        let pose = random_pose(&mut rng, 64);
        let a = render(&gs, &pose, &cfg);
        let b = oracle_render(&gs, &pose, &cfg);
        let diff = |x: &Image, y: &Image| x.data.iter().zip(&y.data).map(|(p, q)| (p - q).abs() as f64).fold(0.0, f64::max);
        rgb = rgb.max(diff(&a.rgb, &b.rgb));
        alpha = alpha.max(diff(&a.alpha, &b.alpha));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        rgb <= 1e-5 && alpha <= 1e-5 && secs <= 120.0,
        format!("100 scenes: max |tiled - oracle| rgb {rgb:.2e}, alpha {alpha:.2e} (tol 1e-5); {secs:.1} s (limit 120 s)"),
    )
}

fn gradient_checks() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut gauss = GradCheck::default();
    let mut model = GradCheck::default();
    // pyramid L1 has kinks wherever a residual crosses zero; reported, not judged
    let mut gauss_l1 = GradCheck::default();
    let mut model_l1 = GradCheck::default();
    for scene in 0..10u64 {
        let res = 24;
        let cfg = LossConfig {
            supervision_resolution: res,
            render: RenderConfig::smooth(),
            perceptual_mode: PerceptualMode::Off,
            ..LossConfig::default()
        };
        let cfg_l1 = LossConfig {
            perceptual_mode: PerceptualMode::PyramidL1,
            ..cfg
        };
        let gs: Vec<Gaussian<f64>> = random_gaussians(&mut rng, 6);
        let target: Vec<Gaussian<f64>> = random_gaussians(&mut rng, 6);
        let poses: Vec<CameraPose> = (0..2).map(|_| random_pose(&mut rng, res)).collect();
        let outs: Vec<_> = poses.iter().map(|p| render(&target, p, &cfg.render)).collect();
        let views: Vec<SupervisionView<f64>> = outs
            .iter()
            .zip(&poses)
            .map(|(o, pose)| SupervisionView {
                rgb: &o.rgb,
                alpha: &o.alpha,
                pose,
            })
            .collect();
        gauss.extend(check_gaussian_gradients(&gs, &views, &cfg, 1e-3).unwrap());
        gauss_l1.extend(check_gaussian_gradients(&gs, &views, &cfg_l1, 1e-3).unwrap());
        let mut fx = GradFixture::new(1000 + scene).unwrap();
        let coords = fx.sample_coords(20, 2000 + scene);
        fx.cfg.perceptual_mode = PerceptualMode::Off;
        model.extend(fx.check(&coords, 1e-3).unwrap());
        fx.cfg.perceptual_mode = PerceptualMode::PyramidL1;
        model_l1.extend(fx.check(&coords, 1e-3).unwrap());
    }
    let (gf, gw) = gauss.summary(1e-2, 1e-3);
    let (mf, mw) = model.summary(1e-2, 1e-3);
    let (gf1, gw1) = gauss_l1.summary(1e-2, 1e-3);
    let (mf1, mw1) = model_l1.summary(1e-2, 1e-3);
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        gf >= 0.95 && gw <= 5e-2 && mf >= 0.95 && mw <= 5e-2 && model.pairs.len() >= 200 && secs <= 600.0,
        format!(
            "gaussian partials {}: {:.1}% within 1e-2, worst {gw:.2e}; model partials {}: {:.1}% within 1e-2, worst {mw:.2e} (need 95%, worst 5e-2); with pyramid_l1 on: {:.1}% / {gw1:.2e} and {:.1}% / {mw1:.2e}; {secs:.1} s",
            gauss.pairs.len(),
            100.0 * gf,
            model.pairs.len(),
            100.0 * mf,
            100.0 * gf1,
            100.0 * mf1
        ),
    )
}

fn reshape_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut ok = true;
    for _ in 0..20 {
        let (t, v, h, w, c) = (rng.random_range(1..5), rng.random_range(1..5), rng.random_range(1..6), rng.random_range(1..6), rng.random_range(1..5));
        let b = rng.random_range(1..3);
        let n = b * t * v;
        let x = Tensor::from_data(n, h, w, c, (0..n * h * w * c).map(|_| rng.random::<f32>()).collect()).unwrap();
        let cv = cross_view_untokens(&cross_view_tokens(&x, t, v).unwrap(), v, h, w);
        let tp = temporal_untokens(&temporal_tokens(&x, t, v).unwrap(), t, v, h, w);
        ok &= cv == x && tp == x;
    }
    let base_cfg = ModelConfig {
        temporal: false,
        ..ModelConfig::tiny()
    };
    let base = Model::new(&base_cfg).unwrap();
    let mut p = base.init_params(5);
    for t in p.tensors.iter_mut() {
        for v in t.data.iter_mut() {
            *v += rng.random_range(-0.05..0.05);
        }
    }
    let (ext_cfg, ext_p) = extend_temporal(&base_cfg, &p, 6).unwrap();
    let ext = Model::new(&ext_cfg).unwrap();
    let data = overfit_data();
    let clip = &data.manifest().clips[0];
    let poses = orthogonal_poses(&data.manifest().rig.fixed[0]);
    let cells: Vec<Image> = [0, 4, 8, 12].iter().map(|&k| data.view(clip, k, 0).unwrap()).collect();
    let grid = gauss4d_core::ImageGrid::from_cells(1, 4, &cells, &poses).unwrap();
    let a = base.forward_cached(&p, &grid, 8.0).unwrap().1.raw;
    let b = ext.forward_cached(&ext_p, &grid, 8.0).unwrap().1.raw;
    let exact = a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits());
    outcome(
        ok && exact,
        format!("20 random shapes round-trip exactly: {ok}; zero-init temporal extension bit-exact on T=1: {exact}"),
    )
}

fn overfit(fx: &Fixture) -> Outcome {
    let (pre, pre_secs) = fx.pretrain();
    let (base, secs) = fx.base();
    let reached = base.log.first_reaching(OVERFIT_PSNR);
    let params = Model::new(&base.model).unwrap().layout().total();
    let minutes = (pre_secs + secs) / 60.0;
    let best = base.log.best_psnr();
    outcome(
        reached.is_some_and(|s| s < OVERFIT_STEPS) && minutes <= OVERFIT_MINUTES && params <= 2_000_000,
        format!(
            "{params} params, T=8 V=4 64x64: supervision PSNR {best:.2} dB, 30 dB at step {} (limit {OVERFIT_STEPS}); pretrain {} steps + base {:.1} min total (limit 60)",
            reached.map_or("never".to_string(), |s| s.to_string()),
            pre.log.steps.len(),
            minutes
        ),
    )
}

fn small_config() -> ModelConfig {
    ModelConfig {
        input_resolution: 32,
        output_resolution: 16,
        channel_widths: vec![16, 32, 32],
        attention_levels: vec![2],
        heads: 2,
        groups: 4,
        ..ModelConfig::default()
    }
}

fn temporal_ablation() -> Outcome {
    let t0 = Instant::now();
    let mut wins = 0;
    let mut lines = Vec::new();
    for scene in 0..5usize {
        let data = MemoryDataset::generate(&DatasetOptions {
            scenes: 1,
            seed: scene as u64,
            duration: 1.0,
            resolution: 32,
            templates: vec![scene],
            ..Default::default()
        })
        .unwrap();
        let cfg = TrainConfig {
            steps_per_epoch: 150,
            lr: 1e-3,
            warmup_steps: 20,
            frames: 4,
            supervision_resolution: 32,
            val_fraction: 0.0,
            seed: 7,
            ..Default::default()
        };
        let pre = pretrain_3d(&cfg, &small_config(), &data, &mut Hooks::default()).unwrap();
        let mut flicker = [0.0; 2];
        for (arm, no_temporal) in [false, true].into_iter().enumerate() {
            let c = TrainConfig { no_temporal, ..cfg.clone() };
            let t = train_base(&c, &small_config(), &data, Some((&pre.model, &pre.params)), &mut Hooks::default()).unwrap();
            flicker[arm] = novel_view_flicker(&data, &t);
        }
        if flicker[0] < flicker[1] {
            wins += 1;
        }
        lines.push(format!("scene {scene}: {:.4} vs {:.4}", flicker[0], flicker[1]));
    }
    outcome(
        wins >= 4,
        format!(
            "flicker with vs without temporal attention: {}; lower with temporal in {wins}/5 (need 4); {:.1} min",
            lines.join(", "),
            t0.elapsed().as_secs_f64() / 60.0
        ),
    )
}

/// Reconstructs the whole clip from the reference camera (GT-rendered
/// bootstrap views) and measures flicker from two off-rig cameras.
fn novel_view_flicker(data: &MemoryDataset, t: &Trained) -> f64 {
    let m = data.manifest();
    let clip = &m.clips[0];
    let reference = m.rig.fixed[0].clone();
    let video: Vec<Image> = (0..clip.frames).map(|f| data.view(clip, 0, f).unwrap()).collect();
    let gt = data.ground_truth(&clip.scene_id).unwrap();
    let stride = (m.render.base_fps / clip.fps).round() as usize;
    let render = m.render.render_config();
    let provider = ViewProvider::GroundTruth {
        frame: gt.frames[0].clone(),
        render,
    };
    let model = Model::new(&t.model).unwrap();
    let out = reconstruct_long(&model, &t.params, &video, &reference, &provider, t.model.frames, clip.fps, &render).unwrap();
    let gt_sub = GaussianSequence::new(clip.fps, gt.frames.iter().step_by(stride).take(clip.frames).cloned().collect()).unwrap();
    let novel = [CameraPose::orbit(45.0, 20.0, m.render.resolution), CameraPose::orbit(200.0, 35.0, m.render.resolution)];
    evaluate_sequences(&clip.scene_id, &out.sequence, &gt_sub, &novel, &render).unwrap().flicker.unwrap()
}

fn pretrain_ablation(fx: &Fixture) -> Outcome {
    let (base, _) = fx.base();
    let (random, secs) = fx.random();
    let a = base.log.first_reaching(OVERFIT_PSNR);
    let b = random.log.first_reaching(OVERFIT_PSNR);
    let pass = match (a, b) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    };
    let show = |s: Option<usize>| s.map_or(format!("not within {OVERFIT_STEPS}"), |s| s.to_string());
    outcome(
        pass,
        format!(
            "steps to 30 dB: pretrained init {}, random init {} (best {:.2} dB, {:.1} min)",
            show(a),
            show(b),
            random.log.best_psnr(),
            secs / 60.0
        ),
    )
}

fn autoregressive(fx: &Fixture) -> Outcome {
    let mut plan_ok = true;
    for t in [4, 8, 16] {
        for l in 1..=200 {
            let plan = plan_chunks(l, t).unwrap();
            let c = &plan.chunks;
            let mut ok = c[0].input.start == 0 && c.last().unwrap().input.end == l;
            ok &= c.iter().all(|k| k.input.len() == t.min(l));
            ok &= c.windows(2).all(|w| w[1].input.start < w[0].input.end && w[1].input.start > w[0].input.start);
            if c.len() >= 3 {
                ok &= c[..c.len() - 1].windows(2).all(|w| w[0].input.end - w[1].input.start == 1);
            }
            if l > t && (l - 1) % (t - 1) == 0 {
                ok &= c.windows(2).all(|w| w[0].input.end - w[1].input.start == 1);
            }
            // each frame is first covered exactly once
            let mut covered = vec![0; l];
            for k in c {
                for f in k.new.clone() {
                    covered[f] += 1;
                }
            }
            ok &= covered.iter().all(|&n| n == 1);
            plan_ok &= ok;
        }
    }
    let (base, _) = fx.base();
    let long = MemoryDataset::generate(&DatasetOptions {
        scenes: 1,
        duration: 3.0,
        resolution: 64,
        templates: vec![0],
        ..Default::default()
    })
    .unwrap();
    let m = long.manifest();
    let gt = long.ground_truth("0000").unwrap();
    let stride = (m.render.base_fps / m.render.fps).round() as usize;
    let gt_sub = GaussianSequence::new(m.render.fps, gt.frames.iter().step_by(stride).cloned().collect()).unwrap();
    let render = m.render.render_config();
    let camera = m.rig.fixed[0].clone();
    let video: Vec<Image> = gt_sub.frames.iter().map(|f| render_rgba(f, &camera, &render)).collect();
    let provider = ViewProvider::GroundTruth {
        frame: gt_sub.frames[0].clone(),
        render,
    };
    let model = Model::new(&base.model).unwrap();
    let out = reconstruct_long(&model, &base.params, &video, &camera, &provider, 8, m.render.fps, &render).unwrap();
    let l = video.len();
    let finite = out.sequence.len() == l && out.sequence.frames.iter().all(|f| f.gaussians.iter().all(|g| g.validate().is_ok()));
    let mut poses = vec![camera.clone()];
    poses.extend([CameraPose::orbit(45.0, 20.0, 64), CameraPose::orbit(200.0, 35.0, 64)]);
    let report = evaluate_sequences("0000", &out.sequence, &gt_sub, &poses, &render).unwrap();
    let curve: Vec<String> = report.per_frame_psnr.iter().map(|p| format!("{p:.1}")).collect();
    outcome(
        plan_ok && finite,
        format!(
            "plans for L<=200, T in {{4,8,16}} exact: {plan_ok}; L={l} T=8 gives {} finite frames in {} passes; per-frame PSNR [{}]",
            out.sequence.len(),
            out.forward_passes,
            curve.join(" ")
        ),
    )
}

fn azimuth_alignment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let cfg = RenderConfig::default();
    let mut hits = 0;
    for _ in 0..100 {
        let frame = GaussianFrame::new(0, random_gaussians(&mut rng, 40));
        let truth: f64 = rng.random_range(-180.0..180.0);
        let pose = CameraPose::orbit(truth, 0.0, 32);
        let i1 = render_rgba(&frame, &pose, &cfg);
        let a = align_azimuth(&frame, &i1, 1.0, &CameraPose::orbit(0.0, 0.0, 32), &cfg).unwrap();
        let d = (a.theta - truth).rem_euclid(360.0);
        if d.min(360.0 - d) <= 1.0 {
            hits += 1;
        }
    }
    let sym = GaussianFrame::new(0, vec![Gaussian::isotropic([0.0, 0.0, 0.0], 0.2, 0.8, [0.7, 0.4, 0.2]).unwrap()]);
    let i1 = render_rgba(&sym, &CameraPose::orbit(73.0, 0.0, 32), &cfg);
    let a = align_azimuth(&sym, &i1, 1.0, &CameraPose::orbit(0.0, 0.0, 32), &cfg).unwrap();
    outcome(
        hits >= 95 && a.theta == -180.0,
        format!("{hits}/100 within 1 deg (need 95); symmetric scene resolves to {} (tie rule: smallest theta, -180)", a.theta),
    )
}

/// Bobbing pair: the fastest-moving template, where holding a keyframe
/// costs the most.
const INTERP_TEMPLATE: usize = 4;

fn interp_data() -> MemoryDataset {
    MemoryDataset::generate(&DatasetOptions {
        scenes: 1,
        duration: 3.0,
        fps: 24.0,
        resolution: 64,
        templates: vec![INTERP_TEMPLATE],
        ..Default::default()
    })
    .unwrap()
}

fn interpolation() -> Outcome {
    let t0 = Instant::now();
    let data = interp_data();
    // the middle clip is removed from every training stage
    let mut train = interp_data();
    train.manifest_mut().clips.remove(1);
    let base_cfg = TrainConfig {
        steps_per_epoch: 400,
        lr: 1e-3,
        warmup_steps: 20,
        val_fraction: 0.0,
        ..Default::default()
    };
    let pre_cfg = TrainConfig {
        steps_per_epoch: 300,
        ..base_cfg.clone()
    };
    let mut f = progress("interp fixture pretrain3d");
    let mut hooks = Hooks {
        on_step: Some(&mut f),
        ..Default::default()
    };
    let pre = pretrain_3d(&pre_cfg, &ModelConfig::tiny(), &train, &mut hooks).unwrap();
    let mut f = progress("interp fixture base4d");
    let mut hooks = Hooks {
        on_step: Some(&mut f),
        ..Default::default()
    };
    let base = train_base(&base_cfg, &ModelConfig::tiny(), &train, Some((&pre.model, &pre.params)), &mut hooks).unwrap();
    let cfg = TrainConfig {
        steps_per_epoch: 200,
        lr: 5e-4,
        warmup_steps: 20,
        distortion: 0.0,
        val_fraction: 0.0,
        ..Default::default()
    };
    let mut f = progress("interp");
    let mut hooks = Hooks {
        on_step: Some(&mut f),
        ..Default::default()
    };
    let interp = train_interp(&cfg, &train, (&base.model, &base.params), &mut hooks).unwrap();
    let m = data.manifest();
    let render = m.render.render_config();
    let gt = data.ground_truth("0000").unwrap();
    let held: Vec<GaussianFrame> = gt.frames[24..48].to_vec();
    let keys = GaussianSequence::new(8.0, held.iter().step_by(3).cloned().collect()).unwrap();
    let camera = m.rig.fixed[0].clone();
    let opts = InterpOptions {
        poses: orthogonal_poses(&camera),
        render,
        keep_endpoints: true,
    };
    let model = Model::new(&interp.model).unwrap();
    let out = interpolate_sequence(&model, &interp.params, &keys, &opts).unwrap();
    let n = keys.len();
    let count_ok = out.len() == 3 * (n - 1) + 1;
    let mut eval_poses = opts.poses.clone();
    eval_poses.push(CameraPose::orbit(45.0, 20.0, 64));
    let mut endpoint_err = 0.0f64;
    for (k, key) in keys.frames.iter().enumerate() {
        let a = render_views(&out.frames[3 * k], &eval_poses, &render);
        let b = render_views(key, &eval_poses, &render);
        for (x, y) in a.iter().zip(&b) {
            endpoint_err = endpoint_err.max(x.data.iter().zip(&y.data).map(|(p, q)| (p - q).abs() as f64).fold(0.0, f64::max));
        }
    }
    let (mut model_psnr, mut hold_psnr, mut cells) = (0.0, 0.0, 0);
    for (j, frame) in out.frames.iter().enumerate().filter(|(j, _)| j % 3 != 0) {
        let truth = render_views(&held[j], &eval_poses, &render);
        let pred = render_views(frame, &eval_poses, &render);
        let hold = render_views(&keys.frames[j / 3], &eval_poses, &render);
        for v in 0..eval_poses.len() {
            let rgb = |img: &Image| img.channels_range(0, 3);
            model_psnr += psnr(&rgb(&pred[v]), &rgb(&truth[v])).unwrap();
            hold_psnr += psnr(&rgb(&hold[v]), &rgb(&truth[v])).unwrap();
            cells += 1;
        }
    }
    model_psnr /= cells as f64;
    hold_psnr /= cells as f64;
    outcome(
        count_ok && endpoint_err <= 1e-4 && model_psnr >= hold_psnr,
        format!(
            "{n} keyframes -> {} frames (want {}); endpoint max diff {endpoint_err:.1e} (tol 1e-4); held-out inner-frame PSNR {model_psnr:.2} dB vs hold-last-endpoint {hold_psnr:.2} dB; {:.1} min",
            out.len(),
            3 * (n - 1) + 1,
            t0.elapsed().as_secs_f64() / 60.0
        ),
    )
}

/// One Gaussian moving along +x at `px` pixels per 2-fps step in the 0-deg
/// view of a 64 px rig.
fn translating(px: f64) -> GaussianSequence {
    let fx = CameraPose::orbit(0.0, 0.0, 64).camera::<f64>().fx;
    let per_step = px * 1.5 / fx;
    let frames = (0..24)
        .map(|t| {
            let x = per_step * 2.0 * t as f64 / 24.0;
            GaussianFrame::new(t, vec![Gaussian::isotropic([x as f32, 0.0, 0.0], 0.05, 0.8, [1.0, 0.5, 0.2]).unwrap()])
        })
        .collect();
    GaussianSequence::new(24.0, frames).unwrap()
}

fn motion_filter() -> Outcome {
    let rig = build_rig_at(0, 64);
    let threshold = 0.15;
    let mut static_rejected = true;
    for seed in 0..10 {
        let seq = generate_scene(&SceneSpec::template(11, seed, 1.0, 24.0)).unwrap();
        static_rejected &= motion_score(&seq, &rig).unwrap() <= threshold;
    }
    // p px per step in two of the four views, so scores are p / 2
    let plan = [(0.1, false), (0.5, true), (0.2, false), (0.6, true), (0.25, false), (0.35, true)];
    let mut data = MemoryDataset::from_sequences(plan.iter().map(|(p, _)| translating(*p)).collect(), rig.clone(), 8.0, &RenderConfig::default()).unwrap();
    filter_manifest(data.manifest_mut(), threshold);
    let split_ok = data.manifest().clips.iter().zip(&plan).all(|(c, (_, keep))| c.kept == *keep);
    let m = data.manifest_mut();
    m.clips[0].motion_score = threshold;
    filter_manifest(m, threshold);
    let boundary_rejected = !m.clips[0].kept;
    outcome(
        static_rejected && split_ok && boundary_rejected,
        format!("static clips rejected: {static_rejected}; engineered split exact: {split_ok}; score == threshold rejected: {boundary_rejected}"),
    )
}

fn random_sequence(rng: &mut ChaCha8Rng) -> GaussianSequence {
    let frames = rng.random_range(1..5);
    let n = rng.random_range(1..40);
    let fps = rng.random_range(1.0f32..60.0);
    let frames = (0..frames).map(|t| GaussianFrame::new(t as u32, random_gaussians(rng, n))).collect();
    GaussianSequence::new(fps, frames).unwrap()
}

fn random_checkpoint(rng: &mut ChaCha8Rng) -> Checkpoint {
    let w = 2 * rng.random_range(1..4);
    let config = ModelConfig {
        input_resolution: 8,
        output_resolution: 4,
        channel_widths: vec![w, 2 * w],
        attention_levels: if rng.random_bool(0.5) { vec![1] } else { vec![] },
        heads: 2,
        groups: 2,
        temporal: rng.random_bool(0.5),
        ..ModelConfig::default()
    };
    let mut params: ModelParams = Model::new(&config).unwrap().init_params(rng.random());
    for t in params.tensors.iter_mut() {
        for v in t.data.iter_mut() {
            *v = f32::from_bits(rng.random::<u32>() & 0xBF7F_FFFF);
        }
    }
    let meta: String = (0..rng.random_range(0..60)).map(|_| rng.random_range(' '..='~')).collect();
    Checkpoint { config, meta, params }
}

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut seq_ok = 0;
    let mut ck_ok = 0;
    for _ in 0..1000 {
        let seq = random_sequence(&mut rng);
        let bytes = encode_sequence(&seq).unwrap();
        let back = decode_sequence(&bytes).unwrap();
        if back == seq && encode_sequence(&back).unwrap() == bytes {
            seq_ok += 1;
        }
    }
    for _ in 0..1000 {
        let ck = random_checkpoint(&mut rng);
        let bytes = write_checkpoint(&ck);
        let back = read_checkpoint(&bytes).unwrap();
        let bits = |c: &Checkpoint| c.params.tensors.iter().flat_map(|t| t.data.iter().map(|v| v.to_bits())).collect::<Vec<_>>();
        if back.config == ck.config && back.meta == ck.meta && bits(&back) == bits(&ck) && write_checkpoint(&back) == bytes {
            ck_ok += 1;
        }
    }
    outcome(
        seq_ok == 1000 && ck_ok == 1000,
        format!("G4DS {seq_ok}/1000 and checkpoint {ck_ok}/1000 random payloads round-trip bit-exactly"),
    )
}

fn main() {
    let selected: Option<Vec<usize>> = std::env::var("GAUSS4D_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let fx = Fixture::new();
    let criteria: [(usize, &str, &dyn Fn() -> Outcome); 11] = [
        (1, "rasterizer-oracle equivalence", &rasterizer_oracle),
        (2, "gradient correctness", &gradient_checks),
        (3, "reshape and identity invariants", &reshape_invariants),
        (4, "single-clip overfit", &|| overfit(&fx)),
        (5, "temporal-attention ablation", &temporal_ablation),
        (6, "pretrain ablation", &|| pretrain_ablation(&fx)),
        (7, "autoregressive structure", &|| autoregressive(&fx)),
        (8, "azimuth alignment", &azimuth_alignment),
        (9, "interpolation", &interpolation),
        (10, "motion filter", &motion_filter),
        (11, "serialization", &serialization),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:2} {tag} {name}: {} [{:.1} s]", o.detail, t0.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("all selected criteria passed");
    } else {
        println!("failed criteria: {failed:?}");
        // reported, not fatal, unless strict mode is on
        if std::env::var("GAUSS4D_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
