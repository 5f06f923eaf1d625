use gauss4d_core::math::{gemm, Op};
use gauss4d_core::{par, Real};

use crate::params::{Init, Layout, ModelParams, ParamId};
use crate::tensor::Tensor;

/// 2D convolution (`k x k`, zero padding `k / 2`) computed as im2col + gemm.
/// Weights are stored `[k, k, cin, cout]`.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub w: ParamId,
    pub b: ParamId,
    pub cin: usize,
    pub cout: usize,
    pub k: usize,
    pub stride: usize,
}

impl Conv2d {
    pub fn register(layout: &mut Layout, name: &str, cin: usize, cout: usize, k: usize, stride: usize) -> Self {
        Self::register_with(layout, name, cin, cout, k, stride, 1.0, Init::Const(0.0))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn register_with(
        layout: &mut Layout,
        name: &str,
        cin: usize,
        cout: usize,
        k: usize,
        stride: usize,
        gain: f64,
        bias: Init,
    ) -> Self {
        let fan_in = k * k * cin;
        let w = layout.add(format!("{name}.weight"), &[k, k, cin, cout], Init::Uniform { fan_in, gain });
        let b = layout.add(format!("{name}.bias"), &[cout], bias);
        Conv2d { w, b, cin, cout, k, stride }
    }

    fn pad(&self) -> usize {
        self.k / 2
    }

    pub fn out_size(&self, h: usize, w: usize) -> (usize, usize) {
        let p = self.pad();
        ((h + 2 * p - self.k) / self.stride + 1, (w + 2 * p - self.k) / self.stride + 1)
    }

    fn direct(&self) -> bool {
        self.k == 1 && self.stride == 1
    }

    fn im2col<T: Real>(&self, x: &[T], h: usize, w: usize) -> Vec<T> {
        let (ho, wo) = self.out_size(h, w);
        let (k, c, p, s) = (self.k, self.cin, self.pad() as isize, self.stride as isize);
        let kk = k * k * c;
        let mut col = vec![T::zero(); ho * wo * kk];
        for oy in 0..ho {
            for ox in 0..wo {
                let row = &mut col[(oy * wo + ox) * kk..(oy * wo + ox + 1) * kk];
                for ky in 0..k {
                    let iy = oy as isize * s + ky as isize - p;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for kx in 0..k {
                        let ix = ox as isize * s + kx as isize - p;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        let src = (iy as usize * w + ix as usize) * c;
                        row[(ky * k + kx) * c..(ky * k + kx + 1) * c].copy_from_slice(&x[src..src + c]);
                    }
                }
            }
        }
        col
    }

    fn col2im<T: Real>(&self, col: &[T], h: usize, w: usize) -> Vec<T> {
        let (ho, wo) = self.out_size(h, w);
        let (k, c, p, s) = (self.k, self.cin, self.pad() as isize, self.stride as isize);
        let kk = k * k * c;
        let mut x = vec![T::zero(); h * w * c];
        for oy in 0..ho {
            for ox in 0..wo {
                let row = &col[(oy * wo + ox) * kk..(oy * wo + ox + 1) * kk];
                for ky in 0..k {
                    let iy = oy as isize * s + ky as isize - p;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for kx in 0..k {
                        let ix = ox as isize * s + kx as isize - p;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        let dst = (iy as usize * w + ix as usize) * c;
                        for (d, v) in x[dst..dst + c].iter_mut().zip(&row[(ky * k + kx) * c..(ky * k + kx + 1) * c]) {
                            *d += *v;
                        }
                    }
                }
            }
        }
        x
    }

    pub fn forward<T: Real>(&self, p: &ModelParams<T>, x: &Tensor<T>) -> Tensor<T> {
        assert_eq!(x.c, self.cin, "conv input channels");
        let (ho, wo) = self.out_size(x.h, x.w);
        let (wt, bias) = (p.get(self.w), p.get(self.b));
        let kk = self.k * self.k * self.cin;
        let m = ho * wo;
        let outs = par::map_range(x.n, |i| {
            let mut y = Vec::with_capacity(m * self.cout);
            for _ in 0..m {
                y.extend_from_slice(bias);
            }
            if self.direct() {
                gemm(m, kk, self.cout, T::one(), x.sample(i), Op::N, wt, Op::N, T::one(), &mut y);
            } else {
                let col = self.im2col(x.sample(i), x.h, x.w);
                gemm(m, kk, self.cout, T::one(), &col, Op::N, wt, Op::N, T::one(), &mut y);
            }
            y
        });
        Tensor {
            n: x.n,
            h: ho,
            w: wo,
            c: self.cout,
            data: outs.concat(),
        }
    }

    /// Accumulates weight/bias gradients into `g`; returns `dx` if requested.
    pub fn backward<T: Real>(
        &self,
        p: &ModelParams<T>,
        x: &Tensor<T>,
        dy: &Tensor<T>,
        g: &mut ModelParams<T>,
        need_dx: bool,
    ) -> Option<Tensor<T>> {
        let (ho, wo) = (dy.h, dy.w);
        let m = ho * wo;
        let kk = self.k * self.k * self.cin;
        let wt = p.get(self.w);
        let parts = par::map_range(x.n, |i| {
            let dyi = dy.sample(i);
            let col_owned;
            let col: &[T] = if self.direct() {
                x.sample(i)
            } else {
                col_owned = self.im2col(x.sample(i), x.h, x.w);
                &col_owned
            };
            let mut dw = vec![T::zero(); kk * self.cout];
            gemm(kk, m, self.cout, T::one(), col, Op::T, dyi, Op::N, T::zero(), &mut dw);
            let mut db = vec![T::zero(); self.cout];
            for px in dyi.chunks_exact(self.cout) {
                for (d, v) in db.iter_mut().zip(px) {
                    *d += *v;
                }
            }
            let dx = need_dx.then(|| {
                let mut dcol = vec![T::zero(); m * kk];
                gemm(m, self.cout, kk, T::one(), dyi, Op::N, wt, Op::T, T::zero(), &mut dcol);
                if self.direct() {
                    dcol
                } else {
                    self.col2im(&dcol, x.h, x.w)
                }
            });
            (dw, db, dx)
        });
        let mut dx_all = need_dx.then(|| Vec::with_capacity(x.data.len()));
        for (dw, db, dx) in parts {
            for (a, b) in g.get_mut(self.w).iter_mut().zip(&dw) {
                *a += *b;
            }
            for (a, b) in g.get_mut(self.b).iter_mut().zip(&db) {
                *a += *b;
            }
            if let (Some(all), Some(dx)) = (dx_all.as_mut(), dx) {
                all.extend_from_slice(&dx);
            }
        }
        dx_all.map(|data| Tensor {
            n: x.n,
            h: x.h,
            w: x.w,
            c: x.c,
            data,
        })
    }
}
