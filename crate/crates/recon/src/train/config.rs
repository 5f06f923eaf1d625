use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use gauss4d_core::losses::{LossConfig, PerceptualMode};
use gauss4d_core::synth::{FIXED_CAMERAS, RANDOM_CAMERAS};
use gauss4d_core::{Error, RenderConfig, Result};

use super::optim::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Pretrain3d,
    Base4d,
    Interp,
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pretrain3d" => Ok(Stage::Pretrain3d),
            "base4d" => Ok(Stage::Base4d),
            "interp" => Ok(Stage::Interp),
            _ => Err(Error::invalid(format!("unknown stage {s:?}"))),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Pretrain3d => "pretrain3d",
            Stage::Base4d => "base4d",
            Stage::Interp => "interp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    Cosine,
    Constant,
}

impl FromStr for Decay {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Decay::Cosine),
            "constant" => Ok(Decay::Constant),
            _ => Err(Error::invalid(format!("unknown decay {s:?}"))),
        }
    }
}

impl fmt::Display for Decay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decay::Cosine => "cosine",
            Decay::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub stage: Stage,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub lr: f64,
    pub warmup_steps: usize,
    pub decay: Decay,
    pub min_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Global gradient-norm clip; 0 disables.
    pub grad_clip: f64,
    pub batch_clips: usize,
    pub frames: usize,
    pub input_cameras: usize,
    pub supervision_cameras: usize,
    /// Grid-distortion magnitude in pixels.
    pub distortion: f32,
    pub seed: u64,
    pub freeze_backbone: bool,
    pub no_temporal: bool,
    pub random_init: bool,
    /// Draw a new reference camera and supervision set every step. When off
    /// the first draw is reused (single-clip overfitting).
    pub resample_poses: bool,
    pub lambda_perceptual: f64,
    pub perceptual_mode: PerceptualMode,
    pub supervision_resolution: usize,
    pub val_fraction: f64,
    pub val_clips: usize,
    /// Checkpoint interval in epochs; 0 writes only the final checkpoint.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            stage: Stage::Base4d,
            epochs: 1,
            steps_per_epoch: 100,
            lr: 4e-4,
            warmup_steps: 100,
            decay: Decay::Cosine,
            min_lr: 0.0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            grad_clip: 0.0,
            batch_clips: 1,
            frames: 8,
            input_cameras: 4,
            supervision_cameras: 4,
            distortion: 3.0,
            seed: 0,
            freeze_backbone: false,
            no_temporal: false,
            random_init: false,
            resample_poses: true,
            lambda_perceptual: 1.0,
            perceptual_mode: PerceptualMode::PyramidL1,
            supervision_resolution: 64,
            val_fraction: 0.1,
            val_clips: 4,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn total_steps(&self) -> usize {
        self.epochs * self.steps_per_epoch
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            lr: self.lr,
            warmup: self.warmup_steps,
            total: match self.decay {
                Decay::Cosine => self.total_steps(),
                Decay::Constant => usize::MAX,
            },
            min_lr: match self.decay {
                Decay::Cosine => self.min_lr,
                Decay::Constant => self.lr,
            },
        }
    }

    pub fn loss(&self, render: RenderConfig) -> LossConfig {
        LossConfig {
            lambda_perceptual: self.lambda_perceptual,
            perceptual_mode: self.perceptual_mode,
            supervision_resolution: self.supervision_resolution,
            render,
        }
    }

    /// Frames per training grid for this stage.
    pub fn grid_frames(&self) -> usize {
        match self.stage {
            Stage::Pretrain3d => 1,
            Stage::Base4d => self.frames,
            Stage::Interp => 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::invalid("frames must be >= 1"));
        }
        if self.input_cameras == 0 || self.input_cameras > 4 || self.input_cameras > FIXED_CAMERAS {
            return Err(Error::invalid("input_cameras must be in 1..=4"));
        }
        if self.supervision_cameras > RANDOM_CAMERAS {
            return Err(Error::invalid(format!("supervision_cameras must be <= {RANDOM_CAMERAS}")));
        }
        if self.batch_clips == 0 {
            return Err(Error::invalid("batch_clips must be >= 1"));
        }
        if !(self.lr > 0.0 && self.min_lr >= 0.0 && self.eps > 0.0) {
            return Err(Error::invalid("learning rates and eps must be positive"));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::invalid("betas must lie in [0, 1)"));
        }
        if !(self.distortion >= 0.0) {
            return Err(Error::invalid("distortion must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::invalid("val_fraction must lie in [0, 1)"));
        }
        if self.supervision_resolution == 0 {
            return Err(Error::invalid("supervision_resolution must be positive"));
        }
        if self.freeze_backbone && self.no_temporal {
            return Err(Error::invalid("freeze_backbone trains only temporal layers; no_temporal removes them"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "stage={}", self.stage);
        let _ = writeln!(s, "epochs={}", self.epochs);
        let _ = writeln!(s, "steps_per_epoch={}", self.steps_per_epoch);
        let _ = writeln!(s, "lr={:?}", self.lr);
        let _ = writeln!(s, "warmup_steps={}", self.warmup_steps);
        let _ = writeln!(s, "decay={}", self.decay);
        let _ = writeln!(s, "min_lr={:?}", self.min_lr);
        let _ = writeln!(s, "beta1={:?}", self.beta1);
        let _ = writeln!(s, "beta2={:?}", self.beta2);
        let _ = writeln!(s, "eps={:?}", self.eps);
        let _ = writeln!(s, "weight_decay={:?}", self.weight_decay);
        let _ = writeln!(s, "grad_clip={:?}", self.grad_clip);
        let _ = writeln!(s, "batch_clips={}", self.batch_clips);
        let _ = writeln!(s, "frames={}", self.frames);
        let _ = writeln!(s, "input_cameras={}", self.input_cameras);
        let _ = writeln!(s, "supervision_cameras={}", self.supervision_cameras);
        let _ = writeln!(s, "distortion={:?}", self.distortion);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "freeze_backbone={}", self.freeze_backbone);
        let _ = writeln!(s, "no_temporal={}", self.no_temporal);
        let _ = writeln!(s, "random_init={}", self.random_init);
        let _ = writeln!(s, "resample_poses={}", self.resample_poses);
        let _ = writeln!(s, "lambda_perceptual={:?}", self.lambda_perceptual);
        let _ = writeln!(s, "perceptual_mode={}", self.perceptual_mode);
        let _ = writeln!(s, "supervision_resolution={}", self.supervision_resolution);
        let _ = writeln!(s, "val_fraction={:?}", self.val_fraction);
        let _ = writeln!(s, "val_clips={}", self.val_clips);
        let _ = writeln!(s, "checkpoint_every={}", self.checkpoint_every);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Malformed(format!("config line {line:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<N: FromStr>(key: &str, v: &str) -> Result<N> {
            v.parse().map_err(|_| Error::Malformed(format!("bad value {v:?} for {key}")))
        }
        match key {
            "stage" => self.stage = value.parse()?,
            "epochs" => self.epochs = num(key, value)?,
            "steps_per_epoch" => self.steps_per_epoch = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "warmup_steps" => self.warmup_steps = num(key, value)?,
            "decay" => self.decay = value.parse()?,
            "min_lr" => self.min_lr = num(key, value)?,
            "beta1" => self.beta1 = num(key, value)?,
            "beta2" => self.beta2 = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "weight_decay" => self.weight_decay = num(key, value)?,
            "grad_clip" => self.grad_clip = num(key, value)?,
            "batch_clips" => self.batch_clips = num(key, value)?,
            "frames" => self.frames = num(key, value)?,
            "input_cameras" => self.input_cameras = num(key, value)?,
            "supervision_cameras" => self.supervision_cameras = num(key, value)?,
            "distortion" => self.distortion = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "freeze_backbone" => self.freeze_backbone = num(key, value)?,
            "no_temporal" => self.no_temporal = num(key, value)?,
            "random_init" => self.random_init = num(key, value)?,
            "resample_poses" => self.resample_poses = num(key, value)?,
            "lambda_perceptual" => self.lambda_perceptual = num(key, value)?,
            "perceptual_mode" => self.perceptual_mode = value.parse()?,
            "supervision_resolution" => self.supervision_resolution = num(key, value)?,
            "val_fraction" => self.val_fraction = num(key, value)?,
            "val_clips" => self.val_clips = num(key, value)?,
            "checkpoint_every" => self.checkpoint_every = num(key, value)?,
            _ => return Err(Error::Malformed(format!("unknown train key {key:?}"))),
        }
        Ok(())
    }
}
