//! Training loops: the static-3D pretrain, the 4D base model and the
//! interpolation fine-tune, all sharing one sample / forward / loss /
//! backward / Adam step.

pub mod augment;
pub mod config;
pub mod optim;
pub mod sampling;

use std::collections::BTreeSet;
use std::path::Path;

use gauss4d_core::eval::psnr_from_mse;
use gauss4d_core::losses::{loss_and_grad, LossConfig, LossReport};
use gauss4d_core::synth::{ClipSource, DatasetManifest};
use gauss4d_core::{Error, Result};
use gauss4d_model::{extend_temporal, is_temporal_param, save_checkpoint, Checkpoint, Model, ModelConfig, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use augment::grid_distort;
pub use config::{Decay, Stage, TrainConfig};
pub use optim::{Adam, Schedule};
pub use sampling::{draw_poses, sample_batch, Batch, PoseDraw};

/// One optimisation step as logged.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub lr: f64,
    pub clip: usize,
    pub total: f64,
    pub rgb_mse: f64,
    pub perceptual: f64,
    pub mask_mse: f64,
    /// Mean PSNR over the supervision-camera renders (all cameras when there
    /// are no supervision cameras), before the update.
    pub psnr: f64,
}

impl StepRecord {
    pub fn line(&self) -> String {
        format!(
            "step={} epoch={} lr={:.6e} clip={} total={:.6e} rgb={:.6e} perceptual={:.6e} mask={:.6e} psnr={:.4}",
            self.step, self.epoch, self.lr, self.clip, self.total, self.rgb_mse, self.perceptual, self.mask_mse, self.psnr
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_psnr: f64,
    pub val_psnr: Option<f64>,
}

impl EpochRecord {
    pub fn line(&self) -> String {
        match self.val_psnr {
            Some(v) => format!("epoch={} train_psnr={:.4} val_psnr={:.4}", self.epoch, self.train_psnr, v),
            None => format!("epoch={} train_psnr={:.4} val_psnr=none", self.epoch, self.train_psnr),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub steps: Vec<StepRecord>,
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    /// First step whose pre-update PSNR reaches `threshold`.
    pub fn first_reaching(&self, threshold: f64) -> Option<usize> {
        self.steps.iter().find(|s| s.psnr >= threshold).map(|s| s.step)
    }

    pub fn best_psnr(&self) -> f64 {
        self.steps.iter().map(|s| s.psnr).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&s.line());
            out.push('\n');
        }
        for e in &self.epochs {
            out.push_str(&e.line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: ModelConfig,
    pub params: ModelParams,
    pub log: TrainLog,
}

impl Trained {
    pub fn checkpoint(&self, meta: String) -> Checkpoint {
        Checkpoint {
            config: self.model.clone(),
            meta,
            params: self.params.clone(),
        }
    }
}

/// Optional side channels of a training run.
#[derive(Default)]
pub struct Hooks<'a> {
    pub on_step: Option<&'a mut dyn FnMut(&StepRecord)>,
    pub on_epoch: Option<&'a mut dyn FnMut(&EpochRecord)>,
    /// Checkpoints land here as `<stage>-epoch<k>.g4ck` and `<stage>.g4ck`.
    pub checkpoint_dir: Option<&'a Path>,
    /// Stop once a step's PSNR reaches this value.
    pub stop_at_psnr: Option<f64>,
}

/// Held-out scenes: the `floor(n · fraction)` scenes with the smallest
/// seeds. Returns `(train, validation)` clip indices.
pub fn split_clips(manifest: &DatasetManifest, fraction: f64, kept_only: bool) -> (Vec<usize>, Vec<usize>) {
    let mut scenes: Vec<(u64, &str)> = manifest.clips.iter().map(|c| (c.scene_seed, c.scene_id.as_str())).collect();
    scenes.sort();
    scenes.dedup();
    let n_val = (scenes.len() as f64 * fraction).floor() as usize;
    let val_scenes: BTreeSet<&str> = scenes.iter().take(n_val).map(|s| s.1).collect();
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (i, c) in manifest.clips.iter().enumerate() {
        if kept_only && !c.kept {
            continue;
        }
        if val_scenes.contains(c.scene_id.as_str()) {
            val.push(i);
        } else {
            train.push(i);
        }
    }
    (train, val)
}

fn supervision_psnr(report: &LossReport, input_views: usize) -> f64 {
    let sup: Vec<f64> = report.per_view.iter().filter(|v| v.view >= input_views).map(|v| psnr_from_mse(v.rgb_mse)).collect();
    if sup.is_empty() {
        let all: Vec<f64> = report.per_view.iter().map(|v| psnr_from_mse(v.rgb_mse)).collect();
        return all.iter().sum::<f64>() / all.len().max(1) as f64;
    }
    sup.iter().sum::<f64>() / sup.len() as f64
}

fn grad_norm(g: &ModelParams) -> f64 {
    g.tensors.iter().flat_map(|t| t.data.iter()).map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
}

/// Mean supervision PSNR of `params` on a fixed draw from each clip.
pub fn validate(model: &Model, params: &ModelParams, source: &dyn ClipSource, clips: &[usize], cfg: &TrainConfig) -> Result<Option<f64>> {
    if clips.is_empty() {
        return Ok(None);
    }
    let loss_cfg = cfg.loss(source.manifest().render.render_config());
    let eval_cfg = TrainConfig {
        distortion: 0.0,
        ..cfg.clone()
    };
    let mut total = 0.0;
    for (j, &c) in clips.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_0000 ^ j as u64);
        let batch = sample_batch(source, &[c], &eval_cfg, &mut rng)?;
        let fps = source.manifest().clips[c].fps;
        let seq = model.forward(params, &batch.inputs, fps)?;
        let (report, _) = loss_and_grad(&seq, &batch.targets, &loss_cfg, false)?;
        total += supervision_psnr(&report, batch.input_views());
    }
    Ok(Some(total / clips.len() as f64))
}

fn strip_temporal(params: &ModelParams) -> Result<ModelParams> {
    ModelParams::from_tensors(params.tensors.iter().filter(|t| !is_temporal_param(&t.name)).cloned().collect())
}

/// The shared optimisation loop.
pub fn run(
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
    init: ModelParams,
    source: &dyn ClipSource,
    hooks: &mut Hooks<'_>,
) -> Result<Trained> {
    cfg.validate()?;
    let model_cfg = ModelConfig {
        frames: cfg.grid_frames(),
        ..model_cfg.clone()
    };
    let model = Model::new(&model_cfg)?;
    model.check_params(&init)?;
    let manifest = source.manifest();
    if manifest.render.resolution != model_cfg.input_resolution {
        return Err(Error::shape("render resolution", model_cfg.input_resolution, manifest.render.resolution));
    }
    let loss_cfg: LossConfig = cfg.loss(manifest.render.render_config());
    loss_cfg.validate()?;
    let (train, val) = split_clips(manifest, cfg.val_fraction, cfg.stage != Stage::Pretrain3d);
    if train.is_empty() {
        return Err(Error::invalid("filtered manifest has no training clips"));
    }
    let val: Vec<usize> = val.into_iter().take(cfg.val_clips).collect();
    let mut params = init;
    let mut opt = Adam::new(&params, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay);
    let schedule = cfg.schedule();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fixed: Option<Batch> = None;
    let mut log = TrainLog::default();
    let mut step = 0;
    'epochs: for epoch in 0..cfg.epochs {
        let mut epoch_psnr = Vec::new();
        for _ in 0..cfg.steps_per_epoch {
            let lr = schedule.at(step);
            let mut grads: Option<ModelParams> = None;
            let mut records = Vec::with_capacity(cfg.batch_clips);
            for _ in 0..cfg.batch_clips {
                let batch = match (&fixed, cfg.resample_poses) {
                    (Some(b), false) => b.clone(),
                    _ => {
                        let b = sample_batch(source, &train, cfg, &mut rng)?;
                        if !cfg.resample_poses {
                            fixed = Some(b.clone());
                        }
                        b
                    }
                };
                let fps = manifest.clips[batch.clip].fps;
                let (seq, cache) = model.forward_cached(&params, &batch.inputs, fps)?;
                let (report, upstream) = loss_and_grad(&seq, &batch.targets, &loss_cfg, true).map_err(|e| match e {
                    Error::NonFinite(_) => Error::NonFinite(format!(
                        "loss at step {step} (epoch {epoch}, clip {}, start frame {})",
                        manifest.clips[batch.clip].scene_id, batch.start
                    )),
                    e => e,
                })?;
                let g = model.backward(&params, &cache, &upstream.unwrap_or_default())?;
                match grads.as_mut() {
                    Some(acc) => acc.add_assign(&g),
                    None => grads = Some(g),
                }
                records.push((batch.clip, supervision_psnr(&report, batch.input_views()), report));
            }
            let mut g = grads.expect("batch_clips >= 1");
            if cfg.batch_clips > 1 {
                g.scale(1.0 / cfg.batch_clips as f32);
            }
            if cfg.freeze_backbone {
                g.mask(is_temporal_param);
            }
            if !g.is_finite() {
                return Err(Error::NonFinite(format!("parameter gradient at step {step}")));
            }
            if cfg.grad_clip > 0.0 {
                let n = grad_norm(&g);
                if n > cfg.grad_clip {
                    g.scale((cfg.grad_clip / n) as f32);
                }
            }
            let n = records.len() as f64;
            let record = StepRecord {
                step,
                epoch,
                lr,
                clip: records[0].0,
                total: records.iter().map(|r| r.2.total).sum::<f64>() / n,
                rgb_mse: records.iter().map(|r| r.2.rgb_mse).sum::<f64>() / n,
                perceptual: records.iter().map(|r| r.2.perceptual).sum::<f64>() / n,
                mask_mse: records.iter().map(|r| r.2.mask_mse).sum::<f64>() / n,
                psnr: records.iter().map(|r| r.1).sum::<f64>() / n,
            };
            let reached = hooks.stop_at_psnr.is_some_and(|t| record.psnr >= t);
            if let Some(f) = hooks.on_step.as_mut() {
                f(&record);
            }
            epoch_psnr.push(record.psnr);
            log.steps.push(record);
            if reached {
                break 'epochs;
            }
            opt.step(&mut params, &g, lr);
            step += 1;
        }
        let rec = EpochRecord {
            epoch,
            train_psnr: epoch_psnr.iter().sum::<f64>() / epoch_psnr.len().max(1) as f64,
            val_psnr: validate(&model, &params, source, &val, cfg)?,
        };
        if let Some(f) = hooks.on_epoch.as_mut() {
            f(&rec);
        }
        log.epochs.push(rec);
        if let Some(dir) = hooks.checkpoint_dir {
            if cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0 {
                let ck = Checkpoint {
                    config: model_cfg.clone(),
                    meta: meta(cfg, step),
                    params: params.clone(),
                };
                save_checkpoint(&ck, dir.join(format!("{}-epoch{}.g4ck", cfg.stage, epoch + 1)))?;
            }
        }
    }
    let out = Trained {
        model: model_cfg,
        params,
        log,
    };
    if let Some(dir) = hooks.checkpoint_dir {
        save_checkpoint(&out.checkpoint(meta(cfg, step)), dir.join(format!("{}.g4ck", cfg.stage)))?;
    }
    Ok(out)
}

fn meta(cfg: &TrainConfig, step: usize) -> String {
    format!("stage={}\nsteps={step}\nseed={}\n", cfg.stage, cfg.seed)
}

/// Static-3D pretrain: `T = 1` on single frames of any clip, without
/// temporal layers.
pub fn pretrain_3d(cfg: &TrainConfig, model_cfg: &ModelConfig, source: &dyn ClipSource, hooks: &mut Hooks<'_>) -> Result<Trained> {
    let cfg = TrainConfig {
        stage: Stage::Pretrain3d,
        freeze_backbone: false,
        ..cfg.clone()
    };
    let model_cfg = ModelConfig {
        temporal: false,
        ..model_cfg.clone()
    };
    let init = Model::new(&model_cfg)?.init_params(cfg.seed);
    run(&cfg, &model_cfg, init, source, hooks)
}

/// Resolves the starting point of a 4D run: the pretrain extended with
/// zero-initialised temporal attention, a stripped copy for `no_temporal`,
/// or fresh parameters for `random_init`.
pub fn base_init(cfg: &TrainConfig, model_cfg: &ModelConfig, init: Option<(&ModelConfig, &ModelParams)>) -> Result<(ModelConfig, ModelParams)> {
    let want = ModelConfig {
        temporal: !cfg.no_temporal,
        ..model_cfg.clone()
    };
    if cfg.random_init {
        let p = Model::new(&want)?.init_params(cfg.seed);
        return Ok((want, p));
    }
    let (icfg, ip) = init.ok_or_else(|| Error::invalid("base training needs an init checkpoint unless random_init is set"))?;
    let base = ModelConfig {
        frames: want.frames,
        ..icfg.clone()
    };
    match (base.temporal, want.temporal) {
        (false, true) => extend_temporal(&base, ip, cfg.seed ^ 0x7E47),
        (true, false) => Ok((ModelConfig { temporal: false, ..base }, strip_temporal(ip)?)),
        _ => Ok((base, ip.clone())),
    }
}

/// 4D base training from a pretrain (or random init, for the ablation).
pub fn train_base(
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
    source: &dyn ClipSource,
    init: Option<(&ModelConfig, &ModelParams)>,
    hooks: &mut Hooks<'_>,
) -> Result<Trained> {
    let cfg = TrainConfig {
        stage: Stage::Base4d,
        ..cfg.clone()
    };
    let (mc, p) = base_init(&cfg, model_cfg, init)?;
    run(&cfg, &mc, p, source, hooks)
}

/// Interpolation fine-tune on full-rate clips, starting from base params.
pub fn train_interp(
    cfg: &TrainConfig,
    source: &dyn ClipSource,
    base: (&ModelConfig, &ModelParams),
    hooks: &mut Hooks<'_>,
) -> Result<Trained> {
    let cfg = TrainConfig {
        stage: Stage::Interp,
        ..cfg.clone()
    };
    run(&cfg, base.0, base.1.clone(), source, hooks)
}
