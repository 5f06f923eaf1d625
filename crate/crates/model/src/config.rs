use std::fmt::Write as _;

use gauss4d_core::{Error, Result};

use crate::decode::DecodeConfig;

/// Architecture hyperparameters of the reconstruction U-Net.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub input_resolution: usize,
    /// One width per level; level `l` runs at `input / 2^l`.
    pub channel_widths: Vec<usize>,
    /// Levels carrying cross-view (and, with `temporal`, temporal) attention.
    pub attention_levels: Vec<usize>,
    pub heads: usize,
    /// Frames per chunk the model is trained on (`T`).
    pub frames: usize,
    pub views: usize,
    pub output_resolution: usize,
    pub groups: usize,
    pub res_blocks: usize,
    pub temporal: bool,
    /// Add the parameter-free input prior to the head output: each Gaussian
    /// starts at its pixel's ray point nearest the origin, with the pixel's
    /// colour.
    pub input_skip: bool,
    pub decode: DecodeConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_resolution: 64,
            channel_widths: vec![32, 64, 128],
            attention_levels: vec![1, 2],
            heads: 4,
            frames: 8,
            views: 4,
            output_resolution: 32,
            groups: 8,
            res_blocks: 1,
            temporal: true,
            input_skip: true,
            decode: DecodeConfig::default(),
        }
    }
}

impl ModelConfig {
    /// Small configuration used by the acceptance fixtures: attention only at
    /// the 8x8 bottleneck.
    pub fn tiny() -> Self {
        ModelConfig {
            channel_widths: vec![16, 32, 32, 48],
            attention_levels: vec![3],
            heads: 2,
            groups: 4,
            ..Default::default()
        }
    }

    pub fn levels(&self) -> usize {
        self.channel_widths.len()
    }

    pub fn gaussians_per_frame(&self) -> usize {
        self.views * self.output_resolution * self.output_resolution
    }

    pub fn has_attention(&self, level: usize) -> bool {
        self.attention_levels.contains(&level)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.levels();
        if l < 2 {
            return Err(Error::invalid("need at least two U-Net levels"));
        }
        if self.input_resolution % (1 << (l - 1)) != 0 {
            return Err(Error::invalid(format!(
                "input resolution {} not divisible by 2^{}",
                self.input_resolution,
                l - 1
            )));
        }
        if self.output_resolution * 2 != self.input_resolution {
            return Err(Error::invalid("output resolution must be half the input resolution"));
        }
        if self.views == 0 || self.frames == 0 || self.res_blocks == 0 {
            return Err(Error::invalid("views, frames and res_blocks must be >= 1"));
        }
        for &a in &self.attention_levels {
            if a >= l {
                return Err(Error::invalid(format!("attention level {a} >= {l} levels")));
            }
            if self.heads == 0 || self.channel_widths[a] % self.heads != 0 {
                return Err(Error::invalid(format!(
                    "width {} at attention level {a} not divisible by {} heads",
                    self.channel_widths[a], self.heads
                )));
            }
        }
        for &w in &self.channel_widths {
            if self.groups == 0 || w % self.groups != 0 {
                return Err(Error::invalid(format!("width {w} not divisible by {} groups", self.groups)));
            }
        }
        if !(self.decode.s_min > 0.0 && self.decode.s_max > 0.0 && self.decode.c_box > 0.0) {
            return Err(Error::invalid("decode constants must be positive"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "input_resolution={}", self.input_resolution);
        let _ = writeln!(s, "channel_widths={}", list(&self.channel_widths));
        let _ = writeln!(s, "attention_levels={}", list(&self.attention_levels));
        let _ = writeln!(s, "heads={}", self.heads);
        let _ = writeln!(s, "frames={}", self.frames);
        let _ = writeln!(s, "views={}", self.views);
        let _ = writeln!(s, "output_resolution={}", self.output_resolution);
        let _ = writeln!(s, "groups={}", self.groups);
        let _ = writeln!(s, "res_blocks={}", self.res_blocks);
        let _ = writeln!(s, "temporal={}", self.temporal);
        let _ = writeln!(s, "input_skip={}", self.input_skip);
        let _ = writeln!(s, "c_box={:?}", self.decode.c_box);
        let _ = writeln!(s, "s_min={:?}", self.decode.s_min);
        let _ = writeln!(s, "s_max={:?}", self.decode.s_max);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
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
        fn num<N: std::str::FromStr>(key: &str, v: &str) -> Result<N> {
            v.parse().map_err(|_| Error::Malformed(format!("bad value {v:?} for {key}")))
        }
        fn list(key: &str, v: &str) -> Result<Vec<usize>> {
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(',').map(|x| num(key, x.trim())).collect()
        }
        match key {
            "input_resolution" => self.input_resolution = num(key, value)?,
            "channel_widths" => self.channel_widths = list(key, value)?,
            "attention_levels" => self.attention_levels = list(key, value)?,
            "heads" => self.heads = num(key, value)?,
            "frames" => self.frames = num(key, value)?,
            "views" => self.views = num(key, value)?,
            "output_resolution" => self.output_resolution = num(key, value)?,
            "groups" => self.groups = num(key, value)?,
            "res_blocks" => self.res_blocks = num(key, value)?,
            "temporal" => self.temporal = num(key, value)?,
            "input_skip" => self.input_skip = num(key, value)?,
            "c_box" => self.decode.c_box = num(key, value)?,
            "s_min" => self.decode.s_min = num(key, value)?,
            "s_max" => self.decode.s_max = num(key, value)?,
            _ => return Err(Error::Malformed(format!("unknown model key {key:?}"))),
        }
        Ok(())
    }
}
