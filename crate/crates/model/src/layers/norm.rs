use gauss4d_core::{par, Real};

use crate::params::{Init, Layout, ModelParams, ParamId};
use crate::tensor::Tensor;

const EPS: f64 = 1e-5;

/// Normalisation over groups of `c / groups` channels, per sample (spatial
/// extent included) or per token: `GroupNorm` with `per_token = false`,
/// `LayerNorm` over channels with `groups = 1, per_token = true`.
#[derive(Debug, Clone)]
pub struct Norm {
    pub gamma: ParamId,
    pub beta: ParamId,
    pub c: usize,
    pub groups: usize,
    pub per_token: bool,
}

pub struct NormCache<T> {
    xhat: Vec<T>,
    inv_std: Vec<T>,
}

impl Norm {
    pub fn group(layout: &mut Layout, name: &str, c: usize, groups: usize) -> Self {
        assert!(c % groups == 0, "{name}: {c} channels not divisible into {groups} groups");
        Self::register(layout, name, c, groups, false)
    }

    pub fn layer(layout: &mut Layout, name: &str, c: usize) -> Self {
        Self::register(layout, name, c, 1, true)
    }

    fn register(layout: &mut Layout, name: &str, c: usize, groups: usize, per_token: bool) -> Self {
        let gamma = layout.add(format!("{name}.gamma"), &[c], Init::Const(1.0));
        let beta = layout.add(format!("{name}.beta"), &[c], Init::Const(0.0));
        Norm {
            gamma,
            beta,
            c,
            groups,
            per_token,
        }
    }

    pub fn forward<T: Real>(&self, p: &ModelParams<T>, x: &Tensor<T>) -> (Tensor<T>, NormCache<T>) {
        assert_eq!(x.c, self.c, "norm channels");
        let unit = if self.per_token { self.c } else { x.sample_len() };
        let (gamma, beta) = (p.get(self.gamma), p.get(self.beta));
        let cg = self.c / self.groups;
        let units = x.data.len() / unit.max(1);
        let chunk = units.div_ceil(64).max(1);
        let blocks = par::map_range(units.div_ceil(chunk), |bi| {
            let mut y = Vec::new();
            let mut xh = Vec::new();
            let mut inv = Vec::new();
            for u in bi * chunk..((bi + 1) * chunk).min(units) {
                let xs = &x.data[u * unit..(u + 1) * unit];
                let start = xh.len();
                xh.extend_from_slice(xs);
                for gi in 0..self.groups {
                    let (mut s, mut s2, mut cnt) = (0.0f64, 0.0f64, 0usize);
                    for px in xs.chunks_exact(self.c) {
                        for v in &px[gi * cg..(gi + 1) * cg] {
                            let v = v.f64();
                            s += v;
                            s2 += v * v;
                            cnt += 1;
                        }
                    }
                    let mean = s / cnt as f64;
                    let var = (s2 / cnt as f64 - mean * mean).max(0.0);
                    let is = 1.0 / (var + EPS).sqrt();
                    let (mean_t, is_t) = (T::of(mean), T::of(is));
                    inv.push(is_t);
                    for px in xh[start..].chunks_exact_mut(self.c) {
                        for v in &mut px[gi * cg..(gi + 1) * cg] {
                            *v = (*v - mean_t) * is_t;
                        }
                    }
                }
                for px in xh[start..].chunks_exact(self.c) {
                    for ch in 0..self.c {
                        y.push(px[ch] * gamma[ch] + beta[ch]);
                    }
                }
            }
            (y, xh, inv)
        });
        let mut y = Vec::with_capacity(x.data.len());
        let mut xhat = Vec::with_capacity(x.data.len());
        let mut inv_std = Vec::new();
        for (a, b, c) in blocks {
            y.extend(a);
            xhat.extend(b);
            inv_std.extend(c);
        }
        (
            Tensor {
                n: x.n,
                h: x.h,
                w: x.w,
                c: x.c,
                data: y,
            },
            NormCache { xhat, inv_std },
        )
    }

    pub fn backward<T: Real>(
        &self,
        p: &ModelParams<T>,
        cache: &NormCache<T>,
        dy: &Tensor<T>,
        g: &mut ModelParams<T>,
    ) -> Tensor<T> {
        let unit = if self.per_token { self.c } else { dy.sample_len() };
        let gamma = p.get(self.gamma);
        let cg = self.c / self.groups;
        let units = dy.data.len() / unit.max(1);
        let chunk = units.div_ceil(64).max(1);
        let blocks = par::map_range(units.div_ceil(chunk), |bi| {
            let mut dx = Vec::new();
            let mut dg = vec![T::zero(); self.c];
            let mut db = vec![T::zero(); self.c];
            for u in bi * chunk..((bi + 1) * chunk).min(units) {
                let dys = &dy.data[u * unit..(u + 1) * unit];
                let xh = &cache.xhat[u * unit..(u + 1) * unit];
                for (pd, px) in dys.chunks_exact(self.c).zip(xh.chunks_exact(self.c)) {
                    for ch in 0..self.c {
                        dg[ch] += pd[ch] * px[ch];
                        db[ch] += pd[ch];
                    }
                }
                let start = dx.len();
                dx.resize(start + unit, T::zero());
                for gi in 0..self.groups {
                    let is = cache.inv_std[u * self.groups + gi];
                    let (mut m1, mut m2, mut cnt) = (T::zero(), T::zero(), 0usize);
                    for (pd, px) in dys.chunks_exact(self.c).zip(xh.chunks_exact(self.c)) {
                        for ch in gi * cg..(gi + 1) * cg {
                            let dxh = pd[ch] * gamma[ch];
                            m1 += dxh;
                            m2 += dxh * px[ch];
                            cnt += 1;
                        }
                    }
                    let nf = T::of(cnt as f64);
                    let (m1, m2) = (m1 / nf, m2 / nf);
                    let out = &mut dx[start..];
                    for ((o, pd), px) in out.chunks_exact_mut(self.c).zip(dys.chunks_exact(self.c)).zip(xh.chunks_exact(self.c)) {
                        for ch in gi * cg..(gi + 1) * cg {
                            o[ch] = is * (pd[ch] * gamma[ch] - m1 - px[ch] * m2);
                        }
                    }
                }
            }
            (dx, dg, db)
        });
        let mut dx = Vec::with_capacity(dy.data.len());
        for (a, dg, db) in blocks {
            dx.extend(a);
            for (t, v) in g.get_mut(self.gamma).iter_mut().zip(&dg) {
                *t += *v;
            }
            for (t, v) in g.get_mut(self.beta).iter_mut().zip(&db) {
                *t += *v;
            }
        }
        Tensor {
            n: dy.n,
            h: dy.h,
            w: dy.w,
            c: dy.c,
            data: dx,
        }
    }
}
