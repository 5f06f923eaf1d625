//! The asymmetric U-Net: encoder down to the bottleneck, decoder back up to
//! half the input resolution, attention at the configured levels, and a 1x1
//! head emitting 14 raw channels per output pixel.

use gauss4d_core::gaussian::GAUSSIAN_PARAMS;
use gauss4d_core::image::MODEL_INPUT_CHANNELS;
use gauss4d_core::{Error, Gaussian, GaussianSequence, ImageGrid, Real, RenderGradients, Result};

use crate::config::ModelConfig;
use crate::decode::{decode_backward, decode_frames, decode_gaussians, DecodeConfig, RAW_CHANNELS};
use crate::layers::{
    silu, silu_backward, upsample2, upsample2_backward, AttentionBlock, AttentionCache, AttentionKind, Conv2d, Norm,
    NormCache, ResBlock, ResCache,
};
use crate::params::{Init, Layout, ModelParams};
use crate::tensor::Tensor;

/// Head bias: centre 0, small scale, identity rotation, low opacity, grey.
static HEAD_BIAS: [f64; RAW_CHANNELS] = [0.0, 0.0, 0.0, -2.25, -2.25, -2.25, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0];
const HEAD_GAIN: f64 = 0.1;

/// Name fragment shared by every temporal-attention tensor.
pub const TEMPORAL_TAG: &str = ".attn.temporal.";

#[derive(Debug, Clone)]
struct AttnPair {
    view: AttentionBlock,
    temporal: Option<AttentionBlock>,
}

struct AttnPairCache<T> {
    view: AttentionCache<T>,
    temporal: Option<AttentionCache<T>>,
}

impl AttnPair {
    fn register(layout: &mut Layout, name: &str, c: usize, cfg: &ModelConfig) -> Self {
        AttnPair {
            view: AttentionBlock::register(layout, &format!("{name}.attn.view"), c, cfg.heads, AttentionKind::CrossView, false),
            temporal: cfg
                .temporal
                .then(|| AttentionBlock::register(layout, &format!("{name}.attn.temporal"), c, cfg.heads, AttentionKind::Temporal, true)),
        }
    }

    fn forward<T: Real>(&self, p: &ModelParams<T>, x: &Tensor<T>, frames: usize, views: usize) -> Result<(Tensor<T>, AttnPairCache<T>)> {
        let (h, view) = self.view.forward(p, x, frames, views)?;
        match &self.temporal {
            Some(t) => {
                let (h, tc) = t.forward(p, &h, frames, views)?;
                Ok((h, AttnPairCache { view, temporal: Some(tc) }))
            }
            None => Ok((h, AttnPairCache { view, temporal: None })),
        }
    }

    fn backward<T: Real>(
        &self,
        p: &ModelParams<T>,
        c: &AttnPairCache<T>,
        dy: Tensor<T>,
        frames: usize,
        views: usize,
        g: &mut ModelParams<T>,
    ) -> Result<Tensor<T>> {
        let dy = match (&self.temporal, &c.temporal) {
            (Some(t), Some(tc)) => t.backward(p, tc, &dy, frames, views, g)?,
            _ => dy,
        };
        self.view.backward(p, &c.view, &dy, frames, views, g)
    }
}

#[derive(Debug, Clone)]
struct EncLevel {
    res: Vec<ResBlock>,
    attn: Option<AttnPair>,
    down: Option<Conv2d>,
}

#[derive(Debug, Clone)]
struct DecLevel {
    level: usize,
    up: Conv2d,
    res: ResBlock,
    attn: Option<AttnPair>,
}

/// Architecture bound to a parameter layout. Cheap to build; parameters live
/// separately in [`ModelParams`].
#[derive(Debug, Clone)]
pub struct Model {
    pub cfg: ModelConfig,
    layout: Layout,
    conv_in: Conv2d,
    enc: Vec<EncLevel>,
    mid: ResBlock,
    mid_attn: Option<AttnPair>,
    dec: Vec<DecLevel>,
    head_norm: Norm,
    head_conv: Conv2d,
}

struct EncCache<T> {
    res: Vec<ResCache<T>>,
    attn: Option<AttnPairCache<T>>,
    /// Level output (skip tensor and input of the down convolution).
    out: Tensor<T>,
}

struct DecCache<T> {
    up_in: Tensor<T>,
    skip_c: usize,
    res: ResCache<T>,
    attn: Option<AttnPairCache<T>>,
}

/// Everything the backward pass needs from one forward pass.
pub struct ForwardCache<T> {
    pub frames: usize,
    input: Tensor<T>,
    enc: Vec<EncCache<T>>,
    mid: ResCache<T>,
    mid_attn: Option<AttnPairCache<T>>,
    dec: Vec<DecCache<T>>,
    head_norm: NormCache<T>,
    head_pre: Tensor<T>,
    head_act: Tensor<T>,
    pub raw: Tensor<T>,
}

impl Model {
    pub fn new(cfg: &ModelConfig) -> Result<Model> {
        cfg.validate()?;
        let mut layout = Layout::default();
        let w = &cfg.channel_widths;
        let levels = cfg.levels();
        let conv_in = Conv2d::register(&mut layout, "conv_in", MODEL_INPUT_CHANNELS, w[0], 3, 1);
        let mut enc = Vec::new();
        let mut cur = w[0];
        for l in 0..levels {
            let mut res = Vec::new();
            for j in 0..cfg.res_blocks {
                res.push(ResBlock::register(&mut layout, &format!("enc.{l}.res.{j}"), cur, w[l], cfg.groups));
                cur = w[l];
            }
            let attn = cfg.has_attention(l).then(|| AttnPair::register(&mut layout, &format!("enc.{l}"), cur, cfg));
            let down = (l + 1 < levels).then(|| Conv2d::register(&mut layout, &format!("enc.{l}.down"), cur, cur, 3, 2));
            enc.push(EncLevel { res, attn, down });
        }
        let mid = ResBlock::register(&mut layout, "mid.res", cur, cur, cfg.groups);
        let mid_attn = cfg.has_attention(levels - 1).then(|| AttnPair::register(&mut layout, "mid", cur, cfg));
        let mut dec = Vec::new();
        for l in (1..levels - 1).rev() {
            let up = Conv2d::register(&mut layout, &format!("dec.{l}.up"), cur, cur, 3, 1);
            let res = ResBlock::register(&mut layout, &format!("dec.{l}.res"), cur + w[l], w[l], cfg.groups);
            cur = w[l];
            let attn = cfg.has_attention(l).then(|| AttnPair::register(&mut layout, &format!("dec.{l}"), cur, cfg));
            dec.push(DecLevel { level: l, up, res, attn });
        }
        let head_norm = Norm::group(&mut layout, "head.norm", cur, cfg.groups);
        let head_conv = Conv2d::register_with(
            &mut layout,
            "head.conv",
            cur,
            RAW_CHANNELS,
            1,
            1,
            HEAD_GAIN,
            Init::PerChannel(&HEAD_BIAS),
        );
        Ok(Model {
            cfg: cfg.clone(),
            layout,
            conv_in,
            enc,
            mid,
            mid_attn,
            dec,
            head_norm,
            head_conv,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn init_params(&self, seed: u64) -> ModelParams {
        ModelParams::init(&self.layout, seed)
    }

    pub fn check_params<T: Real>(&self, p: &ModelParams<T>) -> Result<()> {
        p.check_layout(&self.layout)
    }

    /// `(T·V, H, W, 9)` network input (RGB + Plücker) from a grid.
    pub fn input_from_grid<T: Real>(&self, grid: &ImageGrid) -> Result<Tensor<T>> {
        if grid.views != self.cfg.views {
            return Err(Error::shape("views", self.cfg.views, grid.views));
        }
        if grid.width != self.cfg.input_resolution {
            return Err(Error::shape("width", self.cfg.input_resolution, grid.width));
        }
        if grid.height != self.cfg.input_resolution {
            return Err(Error::shape("height", self.cfg.input_resolution, grid.height));
        }
        if grid.frames == 0 {
            return Err(Error::shape("frames", 1, 0));
        }
        let mut data = Vec::with_capacity(grid.frames * grid.views * grid.width * grid.height * MODEL_INPUT_CHANNELS);
        for t in 0..grid.frames {
            for v in 0..grid.views {
                data.extend(grid.model_input(t, v).into_iter().map(|x| T::of(x as f64)));
            }
        }
        Tensor::from_data(grid.frames * grid.views, grid.height, grid.width, MODEL_INPUT_CHANNELS, data)
    }

    /// Raw `(T·V, H_out, W_out, 14)` features.
    pub fn forward_raw<T: Real>(&self, p: &ModelParams<T>, x: Tensor<T>, frames: usize) -> Result<ForwardCache<T>> {
        self.check_params(p)?;
        let views = self.cfg.views;
        if x.c != MODEL_INPUT_CHANNELS {
            return Err(Error::shape("channels", MODEL_INPUT_CHANNELS, x.c));
        }
        if x.h != self.cfg.input_resolution || x.w != self.cfg.input_resolution {
            return Err(Error::shape("height", self.cfg.input_resolution, x.h));
        }
        if frames == 0 || x.n != frames * views {
            return Err(Error::shape("T·V", frames * views, x.n));
        }
        let mut h = self.conv_in.forward(p, &x);
        let mut enc = Vec::with_capacity(self.enc.len());
        for level in &self.enc {
            let mut res = Vec::new();
            for r in &level.res {
                let (o, c) = r.forward(p, h);
                res.push(c);
                h = o;
            }
            let attn = match &level.attn {
                Some(a) => {
                    let (o, c) = a.forward(p, &h, frames, views)?;
                    h = o;
                    Some(c)
                }
                None => None,
            };
            let next = level.down.as_ref().map(|d| d.forward(p, &h));
            enc.push(EncCache { res, attn, out: h });
            if let Some(nx) = next {
                h = nx;
            } else {
                h = enc.last().unwrap().out.clone();
            }
        }
        let (o, mid) = self.mid.forward(p, h);
        h = o;
        let mid_attn = match &self.mid_attn {
            Some(a) => {
                let (o, c) = a.forward(p, &h, frames, views)?;
                h = o;
                Some(c)
            }
            None => None,
        };
        let mut dec = Vec::with_capacity(self.dec.len());
        for level in &self.dec {
            let up_in = upsample2(&h);
            let u = level.up.forward(p, &up_in);
            let skip = &enc[level.level].out;
            let cat = Tensor::concat_channels(&u, skip);
            let (o, res) = level.res.forward(p, cat);
            h = o;
            let attn = match &level.attn {
                Some(a) => {
                    let (o, c) = a.forward(p, &h, frames, views)?;
                    h = o;
                    Some(c)
                }
                None => None,
            };
            dec.push(DecCache {
                up_in,
                skip_c: skip.c,
                res,
                attn,
            });
        }
        let (head_pre, head_norm) = self.head_norm.forward(p, &h);
        let head_act = silu(&head_pre);
        let mut raw = self.head_conv.forward(p, &head_act);
        if self.cfg.input_skip {
            raw.add_assign(&input_prior(&x, &self.cfg.decode));
        }
        Ok(ForwardCache {
            frames,
            input: x,
            enc,
            mid,
            mid_attn,
            dec,
            head_norm,
            head_pre,
            head_act,
            raw,
        })
    }

    /// Parameter gradients given the gradient with respect to the raw output.
    pub fn backward_raw<T: Real>(&self, p: &ModelParams<T>, cache: &ForwardCache<T>, d_raw: &Tensor<T>) -> Result<ModelParams<T>> {
        if !d_raw.same_shape(&cache.raw) {
            return Err(Error::shape("raw gradient", cache.raw.data.len(), d_raw.data.len()));
        }
        if !d_raw.is_finite() {
            return Err(Error::NonFinite("upstream model gradient".into()));
        }
        let (frames, views) = (cache.frames, self.cfg.views);
        let mut g = p.zeros_like();
        let d_act = self.head_conv.backward(p, &cache.head_act, d_raw, &mut g, true).unwrap();
        let d_pre = silu_backward(&cache.head_pre, &d_act);
        let mut dh = self.head_norm.backward(p, &cache.head_norm, &d_pre, &mut g);
        let mut d_skip: Vec<Option<Tensor<T>>> = (0..self.enc.len()).map(|_| None).collect();
        for (level, c) in self.dec.iter().zip(&cache.dec).rev() {
            if let (Some(a), Some(ac)) = (&level.attn, &c.attn) {
                dh = a.backward(p, ac, dh, frames, views, &mut g)?;
            }
            let d_cat = level.res.backward(p, &c.res, &dh, &mut g);
            let (d_u, d_s) = d_cat.split_channels(d_cat.c - c.skip_c);
            d_skip[level.level] = Some(d_s);
            let d_up_in = level.up.backward(p, &c.up_in, &d_u, &mut g, true).unwrap();
            dh = upsample2_backward(&d_up_in);
        }
        if let (Some(a), Some(ac)) = (&self.mid_attn, &cache.mid_attn) {
            dh = a.backward(p, ac, dh, frames, views, &mut g)?;
        }
        dh = self.mid.backward(p, &cache.mid, &dh, &mut g);
        // dh is now the gradient at the last encoder level's output
        for (l, (level, c)) in self.enc.iter().zip(&cache.enc).enumerate().rev() {
            let mut d_out = if level.down.is_some() {
                let d = level.down.as_ref().unwrap().backward(p, &c.out, &dh, &mut g, true).unwrap();
                d
            } else {
                dh.clone()
            };
            if let Some(s) = d_skip[l].take() {
                d_out.add_assign(&s);
            }
            let mut d = d_out;
            if let (Some(a), Some(ac)) = (&level.attn, &c.attn) {
                d = a.backward(p, ac, d, frames, views, &mut g)?;
            }
            for (r, rc) in level.res.iter().zip(&c.res).rev() {
                d = r.backward(p, rc, &d, &mut g);
            }
            dh = d;
        }
        self.conv_in.backward(p, &cache.input, &dh, &mut g, false);
        Ok(g)
    }

    /// Per-frame Gaussian sets (generic precision, for gradient checks).
    pub fn gaussians<T: Real>(&self, cache: &ForwardCache<T>) -> Result<Vec<Vec<Gaussian<T>>>> {
        decode_frames(&cache.raw, cache.frames, &self.cfg.decode)
    }

    pub fn forward_cached(&self, p: &ModelParams, grid: &ImageGrid, fps: f32) -> Result<(GaussianSequence, ForwardCache<f32>)> {
        let x = self.input_from_grid::<f32>(grid)?;
        let cache = self.forward_raw(p, x, grid.frames)?;
        let seq = decode_gaussians(&cache.raw, grid.frames, fps, &self.cfg.decode)?;
        Ok((seq, cache))
    }

    /// Reconstructs `T` Gaussian frames from a `(T, V)` grid.
    pub fn forward(&self, p: &ModelParams, grid: &ImageGrid, fps: f32) -> Result<GaussianSequence> {
        Ok(self.forward_cached(p, grid, fps)?.0)
    }

    /// Parameter gradients from per-frame Gaussian gradients.
    pub fn backward<T: Real>(&self, p: &ModelParams<T>, cache: &ForwardCache<T>, upstream: &[RenderGradients<T>]) -> Result<ModelParams<T>> {
        if upstream.len() != cache.frames {
            return Err(Error::shape("gradient frames", cache.frames, upstream.len()));
        }
        if upstream.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("upstream render gradient".into()));
        }
        let rows: Vec<&[[T; GAUSSIAN_PARAMS]]> = upstream.iter().map(|g| g.grads.as_slice()).collect();
        let d_raw = decode_backward(&cache.raw, &rows, &self.cfg.decode)?;
        self.backward_raw(p, cache, &d_raw)
    }
}

/// Raw-space prior derived from the input alone: for each output pixel the
/// 2x2 input block's ray point nearest the origin `d × (o × d)` (through
/// `atanh`) and its RGB (through `logit`). It has no parameters, so it only
/// shifts where optimisation starts.
pub fn input_prior<T: Real>(x: &Tensor<T>, cfg: &DecodeConfig) -> Tensor<T> {
    let (ho, wo) = (x.h / 2, x.w / 2);
    let mut out = Tensor::zeros(x.n, ho, wo, RAW_CHANNELS);
    let lim = 0.999;
    for n in 0..x.n {
        let xs = x.sample(n);
        for i in 0..ho {
            for j in 0..wo {
                let mut point = [0.0f64; 3];
                let mut rgb = [0.0f64; 3];
                for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let px = &xs[((2 * i + di) * x.w + 2 * j + dj) * x.c..][..MODEL_INPUT_CHANNELS];
                    let d = [px[3].f64(), px[4].f64(), px[5].f64()];
                    let m = [px[6].f64(), px[7].f64(), px[8].f64()];
                    let c = [d[1] * m[2] - d[2] * m[1], d[2] * m[0] - d[0] * m[2], d[0] * m[1] - d[1] * m[0]];
                    for k in 0..3 {
                        point[k] += 0.25 * c[k];
                        rgb[k] += 0.25 * px[k].f64();
                    }
                }
                let o = ((n * ho + i) * wo + j) * RAW_CHANNELS;
                for k in 0..3 {
                    out.data[o + k] = T::of((point[k] / cfg.c_box).clamp(-lim, lim).atanh());
                    let c = rgb[k].clamp(0.02, 0.98);
                    out.data[o + 11 + k] = T::of((c / (1.0 - c)).ln());
                }
            }
        }
    }
    out
}

/// Adds zero-initialised temporal attention to parameters trained without it.
/// Existing tensors are copied by name, so the extended model matches the
/// original exactly until the temporal output projections move.
pub fn extend_temporal(cfg: &ModelConfig, params: &ModelParams, seed: u64) -> Result<(ModelConfig, ModelParams)> {
    let base = Model::new(&ModelConfig {
        temporal: false,
        ..cfg.clone()
    })?;
    base.check_params(params)?;
    let ext_cfg = ModelConfig {
        temporal: true,
        ..cfg.clone()
    };
    let ext = Model::new(&ext_cfg)?;
    let mut out = ext.init_params(seed);
    for t in out.tensors.iter_mut() {
        if let Some(src) = params.by_name(&t.name) {
            t.data.copy_from_slice(&src.data);
        }
    }
    Ok((ext_cfg, out))
}

pub fn is_temporal_param(name: &str) -> bool {
    name.contains(TEMPORAL_TAG)
}
