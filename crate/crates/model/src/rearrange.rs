//! Token rearrangements of `(B·T·V, H, W, C)` feature maps, sample index
//! `n = (b·T + t)·V + v`.
//!
//! Cross-view groups are `(B·T, V·H·W, C)`: one group per timestep, tokens
//! ordered by view then pixel. Temporal groups are `(B·V, T·H·W, C)`: one
//! group per view, tokens ordered by time then pixel.

use gauss4d_core::{Error, Real, Result};

use crate::tensor::Tensor;

/// Token groups stored as a tensor `(groups, tokens, 1, C)`.
pub type Tokens<T> = Tensor<T>;

fn check<T>(x: &Tensor<T>, frames: usize, views: usize) -> Result<usize> {
    if frames == 0 || views == 0 || x.n % (frames * views) != 0 {
        return Err(Error::shape("B·T·V", frames * views, x.n));
    }
    Ok(x.n / (frames * views))
}

/// `(B·T·V, H, W, C) → (B·T, V·H·W, C)`.
pub fn cross_view_tokens<T: Real>(x: &Tensor<T>, frames: usize, views: usize) -> Result<Tokens<T>> {
    let b = check(x, frames, views)?;
    Ok(Tensor {
        n: b * frames,
        h: views * x.h * x.w,
        w: 1,
        c: x.c,
        data: x.data.clone(),
    })
}

/// Inverse of [`cross_view_tokens`].
pub fn cross_view_untokens<T: Real>(t: &Tokens<T>, views: usize, h: usize, w: usize) -> Tensor<T> {
    Tensor {
        n: t.n * views,
        h,
        w,
        c: t.c,
        data: t.data.clone(),
    }
}

/// `(B·T·V, H, W, C) → (B·V, T·H·W, C)`.
pub fn temporal_tokens<T: Real>(x: &Tensor<T>, frames: usize, views: usize) -> Result<Tokens<T>> {
    let b = check(x, frames, views)?;
    let s = x.sample_len();
    let mut data = Vec::with_capacity(x.data.len());
    for bi in 0..b {
        for v in 0..views {
            for t in 0..frames {
                data.extend_from_slice(x.sample((bi * frames + t) * views + v));
            }
        }
    }
    debug_assert_eq!(data.len(), b * views * frames * s);
    Ok(Tensor {
        n: b * views,
        h: frames * x.h * x.w,
        w: 1,
        c: x.c,
        data,
    })
}

/// Inverse of [`temporal_tokens`].
pub fn temporal_untokens<T: Real>(tok: &Tokens<T>, frames: usize, views: usize, h: usize, w: usize) -> Tensor<T> {
    let b = tok.n / views;
    let s = h * w * tok.c;
    let mut data = vec![T::zero(); tok.data.len()];
    for bi in 0..b {
        for v in 0..views {
            for t in 0..frames {
                let src = ((bi * views + v) * frames + t) * s;
                let dst = ((bi * frames + t) * views + v) * s;
                data[dst..dst + s].copy_from_slice(&tok.data[src..src + s]);
            }
        }
    }
    Tensor {
        n: b * frames * views,
        h,
        w,
        c: tok.c,
        data,
    }
}
