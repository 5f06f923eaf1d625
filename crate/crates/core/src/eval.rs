//! Reconstruction metrics: PSNR, mask IoU and a temporal flicker score.

use serde::{Deserialize, Serialize};

use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::gaussian::GaussianSequence;
use crate::image::Image;
use crate::math::Real;
use crate::par;
use crate::render::{render, RenderConfig};

/// Reported for exact matches instead of infinity.
pub const PSNR_CAP: f64 = 99.0;

pub fn mse<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    a.check_same_shape(b)?;
    if a.data.is_empty() {
        return Ok(0.0);
    }
    let s: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x.f64() - y.f64()).powi(2)).sum();
    Ok(s / a.data.len() as f64)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP;
    }
    (10.0 * (1.0 / mse).log10()).min(PSNR_CAP)
}

/// `10 log10(1 / MSE)` for images in `[0, 1]`, capped at 99 dB.
pub fn psnr<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

/// Mean `|f[t+1] - 2 f[t] + f[t-1]|` over pixels, channels and interior steps.
pub fn flicker_score<T: Real>(frames: &[Image<T>]) -> Result<f64> {
    if frames.len() < 3 {
        return Err(Error::invalid(format!(
            "flicker score needs at least 3 frames, got {}",
            frames.len()
        )));
    }
    for f in &frames[1..] {
        frames[0].check_same_shape(f)?;
    }
    let n = frames[0].data.len();
    let mut total = 0.0;
    for w in frames.windows(3) {
        for i in 0..n {
            total += (w[2].data[i].f64() - 2.0 * w[1].data[i].f64() + w[0].data[i].f64()).abs();
        }
    }
    Ok(total / ((frames.len() - 2) * n.max(1)) as f64)
}

/// IoU of two alpha masks binarised at `threshold` (`>=`); two empty masks
/// give 1.
pub fn mask_iou<T: Real>(a: &Image<T>, b: &Image<T>, threshold: f64) -> Result<f64> {
    a.check_same_shape(b)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.data.iter().zip(&b.data) {
        let (p, q) = (x.f64() >= threshold, y.f64() >= threshold);
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scene_id: String,
    pub poses: Vec<CameraPose>,
    /// Mean over poses of the RGB PSNR, one entry per frame.
    pub per_frame_psnr: Vec<f64>,
    pub mean_psnr: f64,
    pub mask_iou: f64,
    /// Flicker of the predicted renders, averaged over poses.
    pub flicker: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    /// `frame,psnr` lines for plotting.
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("frame,psnr\n");
        for (t, p) in self.per_frame_psnr.iter().enumerate() {
            s += &format!("{t},{p:.4}\n");
        }
        s
    }
}

/// Renders `pred` and `gt` from every pose and compares them frame by frame.
pub fn evaluate_sequences(
    scene_id: &str,
    pred: &GaussianSequence,
    gt: &GaussianSequence,
    poses: &[CameraPose],
    cfg: &RenderConfig,
) -> Result<EvalReport> {
    if pred.len() != gt.len() {
        return Err(Error::shape("frames", gt.len(), pred.len()));
    }
    if poses.is_empty() || pred.is_empty() {
        return Err(Error::invalid("evaluation needs at least one pose and one frame"));
    }
    // (frame, pose) -> (psnr, iou, pred rgb)
    let cells = par::map_range(pred.len() * poses.len(), |k| {
        let (t, v) = (k / poses.len(), k % poses.len());
        let a = render(&pred.frames[t].gaussians, &poses[v], cfg);
        let b = render(&gt.frames[t].gaussians, &poses[v], cfg);
        let p = psnr(&a.rgb, &b.rgb).expect("same pose");
        let iou = mask_iou(&a.alpha, &b.alpha, 0.5).expect("same pose");
        (p, iou, a.rgb)
    });
    let nv = poses.len();
    let per_frame_psnr: Vec<f64> = cells
        .chunks(nv)
        .map(|c| c.iter().map(|x| x.0).sum::<f64>() / nv as f64)
        .collect();
    let mean_psnr = per_frame_psnr.iter().sum::<f64>() / per_frame_psnr.len() as f64;
    let mask_iou = cells.iter().map(|c| c.1).sum::<f64>() / cells.len() as f64;
    let flicker = if pred.len() >= 3 {
        let mut acc = 0.0;
        for v in 0..nv {
            let frames: Vec<Image> = (0..pred.len()).map(|t| cells[t * nv + v].2.clone()).collect();
            acc += flicker_score(&frames)?;
        }
        Some(acc / nv as f64)
    } else {
        None
    };
    Ok(EvalReport {
        scene_id: scene_id.to_string(),
        poses: poses.to_vec(),
        per_frame_psnr,
        mean_psnr,
        mask_iou,
        flicker,
    })
}
