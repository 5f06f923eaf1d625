use gauss4d_core::math::{gemm, Op};
use gauss4d_core::{par, Error, Real, Result};

use super::norm::{Norm, NormCache};
use crate::params::{Init, Layout, ModelParams, ParamId};
use crate::rearrange::{cross_view_tokens, cross_view_untokens, temporal_tokens, temporal_untokens, Tokens};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttentionKind {
    CrossView,
    Temporal,
}

/// Residual multi-head self-attention over token groups:
/// `x + W_out · MHA(LayerNorm(x))`.
#[derive(Debug, Clone)]
pub struct AttentionBlock {
    pub kind: AttentionKind,
    norm: Norm,
    qkv_w: ParamId,
    qkv_b: ParamId,
    out_w: ParamId,
    out_b: ParamId,
    c: usize,
    heads: usize,
}

pub struct AttentionCache<T> {
    h: usize,
    w: usize,
    norm: NormCache<T>,
    xn: Tokens<T>,
    qkv: Vec<T>,
    o: Vec<T>,
}

impl AttentionBlock {
    /// With `zero_out` the output projection starts at zero, making the block
    /// an exact identity until trained.
    pub fn register(layout: &mut Layout, name: &str, c: usize, heads: usize, kind: AttentionKind, zero_out: bool) -> Self {
        assert!(heads > 0 && c % heads == 0, "{name}: {c} channels not divisible by {heads} heads");
        let norm = Norm::layer(layout, &format!("{name}.norm"), c);
        let qkv_w = layout.add(format!("{name}.qkv.weight"), &[c, 3 * c], Init::Uniform { fan_in: c, gain: 1.0 });
        let qkv_b = layout.add(format!("{name}.qkv.bias"), &[3 * c], Init::Const(0.0));
        let out_init = if zero_out {
            Init::Const(0.0)
        } else {
            Init::Uniform { fan_in: c, gain: 1.0 }
        };
        let out_w = layout.add(format!("{name}.out.weight"), &[c, c], out_init);
        let out_b = layout.add(format!("{name}.out.bias"), &[c], Init::Const(0.0));
        AttentionBlock {
            kind,
            norm,
            qkv_w,
            qkv_b,
            out_w,
            out_b,
            c,
            heads,
        }
    }

    fn tokens<T: Real>(&self, x: &Tensor<T>, frames: usize, views: usize) -> Result<Tokens<T>> {
        match self.kind {
            AttentionKind::CrossView => cross_view_tokens(x, frames, views),
            AttentionKind::Temporal => temporal_tokens(x, frames, views),
        }
    }

    fn untokens<T: Real>(&self, t: &Tokens<T>, frames: usize, views: usize, h: usize, w: usize) -> Tensor<T> {
        match self.kind {
            AttentionKind::CrossView => cross_view_untokens(t, views, h, w),
            AttentionKind::Temporal => temporal_untokens(t, frames, views, h, w),
        }
    }

    pub fn forward<T: Real>(
        &self,
        p: &ModelParams<T>,
        x: &Tensor<T>,
        frames: usize,
        views: usize,
    ) -> Result<(Tensor<T>, AttentionCache<T>)> {
        if x.c != self.c {
            return Err(Error::shape("attention channels", self.c, x.c));
        }
        let tok = self.tokens(x, frames, views)?;
        let (xn, norm) = self.norm.forward(p, &tok);
        let (g, l, c) = (tok.n, tok.h, self.c);
        let (qkv_w, qkv_b, out_w, out_b) = (p.get(self.qkv_w), p.get(self.qkv_b), p.get(self.out_w), p.get(self.out_b));
        let per_group = par::map_range(g, |gi| {
            let xs = xn.sample(gi);
            let mut qkv = Vec::with_capacity(l * 3 * c);
            for _ in 0..l {
                qkv.extend_from_slice(qkv_b);
            }
            gemm(l, c, 3 * c, T::one(), xs, Op::N, qkv_w, Op::N, T::one(), &mut qkv);
            let o = self.attend(&qkv, l);
            let mut y = Vec::with_capacity(l * c);
            for _ in 0..l {
                y.extend_from_slice(out_b);
            }
            gemm(l, c, c, T::one(), &o, Op::N, out_w, Op::N, T::one(), &mut y);
            (qkv, o, y)
        });
        let mut qkv_all = Vec::with_capacity(g * l * 3 * c);
        let mut o_all = Vec::with_capacity(g * l * c);
        let mut y_all = Vec::with_capacity(g * l * c);
        for (qkv, o, y) in per_group {
            qkv_all.extend(qkv);
            o_all.extend(o);
            y_all.extend(y);
        }
        let mut out_tok = tok;
        for (a, b) in out_tok.data.iter_mut().zip(&y_all) {
            *a += *b;
        }
        let out = self.untokens(&out_tok, frames, views, x.h, x.w);
        Ok((
            out,
            AttentionCache {
                h: x.h,
                w: x.w,
                norm,
                xn,
                qkv: qkv_all,
                o: o_all,
            },
        ))
    }

    fn head_slices<T: Real>(&self, qkv: &[T], l: usize, head: usize) -> [Vec<T>; 3] {
        let (c, dh) = (self.c, self.c / self.heads);
        let mut out = [Vec::with_capacity(l * dh), Vec::with_capacity(l * dh), Vec::with_capacity(l * dh)];
        for row in qkv.chunks_exact(3 * c) {
            for (part, buf) in out.iter_mut().enumerate() {
                let s = part * c + head * dh;
                buf.extend_from_slice(&row[s..s + dh]);
            }
        }
        out
    }

    /// Row-softmax of `Q Kᵀ / sqrt(dh)`.
    fn probabilities<T: Real>(&self, q: &[T], k: &[T], l: usize) -> Vec<T> {
        let dh = self.c / self.heads;
        let scale = T::one() / T::of(dh as f64).sqrt();
        let mut s = vec![T::zero(); l * l];
        gemm(l, dh, l, scale, q, Op::N, k, Op::T, T::zero(), &mut s);
        for row in s.chunks_exact_mut(l) {
            let m = row.iter().cloned().fold(T::neg_infinity(), T::max);
            let mut sum = T::zero();
            for v in row.iter_mut() {
                *v = (*v - m).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        s
    }

    fn attend<T: Real>(&self, qkv: &[T], l: usize) -> Vec<T> {
        let (c, dh) = (self.c, self.c / self.heads);
        let mut o = vec![T::zero(); l * c];
        for head in 0..self.heads {
            let [q, k, v] = self.head_slices(qkv, l, head);
            let pr = self.probabilities(&q, &k, l);
            let mut oh = vec![T::zero(); l * dh];
            gemm(l, l, dh, T::one(), &pr, Op::N, &v, Op::N, T::zero(), &mut oh);
            for (row, src) in o.chunks_exact_mut(c).zip(oh.chunks_exact(dh)) {
                row[head * dh..(head + 1) * dh].copy_from_slice(src);
            }
        }
        o
    }

    pub fn backward<T: Real>(
        &self,
        p: &ModelParams<T>,
        cache: &AttentionCache<T>,
        dy: &Tensor<T>,
        frames: usize,
        views: usize,
        g: &mut ModelParams<T>,
    ) -> Result<Tensor<T>> {
        let dtok = self.tokens(dy, frames, views)?;
        let (gn, l, c) = (dtok.n, dtok.h, self.c);
        let dh = c / self.heads;
        let scale = T::one() / T::of(dh as f64).sqrt();
        let (qkv_w, out_w) = (p.get(self.qkv_w), p.get(self.out_w));
        let parts = par::map_range(gn, |gi| {
            let dys = dtok.sample(gi);
            let qkv = &cache.qkv[gi * l * 3 * c..(gi + 1) * l * 3 * c];
            let o = &cache.o[gi * l * c..(gi + 1) * l * c];
            let xs = cache.xn.sample(gi);
            let mut d_out_w = vec![T::zero(); c * c];
            gemm(c, l, c, T::one(), o, Op::T, dys, Op::N, T::zero(), &mut d_out_w);
            let mut d_out_b = vec![T::zero(); c];
            for row in dys.chunks_exact(c) {
                for (a, b) in d_out_b.iter_mut().zip(row) {
                    *a += *b;
                }
            }
            let mut d_o = vec![T::zero(); l * c];
            gemm(l, c, c, T::one(), dys, Op::N, out_w, Op::T, T::zero(), &mut d_o);
            let mut d_qkv = vec![T::zero(); l * 3 * c];
            for head in 0..self.heads {
                let [q, k, v] = self.head_slices(qkv, l, head);
                let pr = self.probabilities(&q, &k, l);
                let doh: Vec<T> = d_o.chunks_exact(c).flat_map(|r| r[head * dh..(head + 1) * dh].iter().cloned()).collect();
                let mut dp = vec![T::zero(); l * l];
                gemm(l, dh, l, T::one(), &doh, Op::N, &v, Op::T, T::zero(), &mut dp);
                let mut dv = vec![T::zero(); l * dh];
                gemm(l, l, dh, T::one(), &pr, Op::T, &doh, Op::N, T::zero(), &mut dv);
                // softmax adjoint, in place in dp
                for (drow, prow) in dp.chunks_exact_mut(l).zip(pr.chunks_exact(l)) {
                    let dot = drow.iter().zip(prow).fold(T::zero(), |s, (a, b)| s + *a * *b);
                    for (d, pv) in drow.iter_mut().zip(prow) {
                        *d = *pv * (*d - dot);
                    }
                }
                let mut dq = vec![T::zero(); l * dh];
                gemm(l, l, dh, scale, &dp, Op::N, &k, Op::N, T::zero(), &mut dq);
                let mut dk = vec![T::zero(); l * dh];
                gemm(l, l, dh, scale, &dp, Op::T, &q, Op::N, T::zero(), &mut dk);
                for (t, row) in d_qkv.chunks_exact_mut(3 * c).enumerate() {
                    for (part, src) in [&dq, &dk, &dv].iter().enumerate() {
                        let s = part * c + head * dh;
                        row[s..s + dh].copy_from_slice(&src[t * dh..(t + 1) * dh]);
                    }
                }
            }
            let mut d_qkv_w = vec![T::zero(); c * 3 * c];
            gemm(c, l, 3 * c, T::one(), xs, Op::T, &d_qkv, Op::N, T::zero(), &mut d_qkv_w);
            let mut d_qkv_b = vec![T::zero(); 3 * c];
            for row in d_qkv.chunks_exact(3 * c) {
                for (a, b) in d_qkv_b.iter_mut().zip(row) {
                    *a += *b;
                }
            }
            let mut d_xn = vec![T::zero(); l * c];
            gemm(l, 3 * c, c, T::one(), &d_qkv, Op::N, qkv_w, Op::T, T::zero(), &mut d_xn);
            (d_out_w, d_out_b, d_qkv_w, d_qkv_b, d_xn)
        });
        let mut d_xn_all = Vec::with_capacity(dtok.data.len());
        for (a, b, cw, cb, dx) in parts {
            for (ids, vals) in [(self.out_w, a), (self.out_b, b), (self.qkv_w, cw), (self.qkv_b, cb)] {
                for (t, v) in g.get_mut(ids).iter_mut().zip(&vals) {
                    *t += *v;
                }
            }
            d_xn_all.extend(dx);
        }
        let d_xn = Tensor {
            n: dtok.n,
            h: dtok.h,
            w: 1,
            c,
            data: d_xn_all,
        };
        let mut dx_tok = self.norm.backward(p, &cache.norm, &d_xn, g);
        dx_tok.add_assign(&dtok);
        Ok(self.untokens(&dx_tok, frames, views, cache.h, cache.w))
    }
}
