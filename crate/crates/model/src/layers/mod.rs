//! Hand-written layers with explicit forward caches and backward passes.

mod attention;
mod conv;
mod norm;

pub use attention::{AttentionBlock, AttentionCache, AttentionKind};
pub use conv::Conv2d;
pub use norm::{Norm, NormCache};

use gauss4d_core::Real;

use crate::params::{Layout, ModelParams};
use crate::tensor::Tensor;

pub fn silu<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    Tensor {
        data: x.data.iter().map(|&v| v / (T::one() + (-v).exp())).collect(),
        ..x.clone_shape()
    }
}

/// `dy ⊙ silu'(x)`.
pub fn silu_backward<T: Real>(x: &Tensor<T>, dy: &Tensor<T>) -> Tensor<T> {
    Tensor {
        data: x
            .data
            .iter()
            .zip(&dy.data)
            .map(|(&v, &d)| {
                let s = T::one() / (T::one() + (-v).exp());
                d * s * (T::one() + v * (T::one() - s))
            })
            .collect(),
        ..x.clone_shape()
    }
}

/// Nearest-neighbour 2x upsampling.
pub fn upsample2<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    let (h2, w2) = (x.h * 2, x.w * 2);
    let mut out = Tensor::zeros(x.n, h2, w2, x.c);
    for n in 0..x.n {
        for y in 0..h2 {
            for xx in 0..w2 {
                let src = ((n * x.h + y / 2) * x.w + xx / 2) * x.c;
                let dst = ((n * h2 + y) * w2 + xx) * x.c;
                out.data[dst..dst + x.c].copy_from_slice(&x.data[src..src + x.c]);
            }
        }
    }
    out
}

pub fn upsample2_backward<T: Real>(dy: &Tensor<T>) -> Tensor<T> {
    let (h, w) = (dy.h / 2, dy.w / 2);
    let mut out = Tensor::zeros(dy.n, h, w, dy.c);
    for n in 0..dy.n {
        for y in 0..dy.h {
            for xx in 0..dy.w {
                let src = ((n * dy.h + y) * dy.w + xx) * dy.c;
                let dst = ((n * h + y / 2) * w + xx / 2) * dy.c;
                for k in 0..dy.c {
                    out.data[dst + k] += dy.data[src + k];
                }
            }
        }
    }
    out
}

/// `GroupNorm → SiLU → conv3x3 → GroupNorm → SiLU → conv3x3`, plus a
/// (1x1-projected when widths differ) skip connection.
#[derive(Debug, Clone)]
pub struct ResBlock {
    norm1: Norm,
    conv1: Conv2d,
    norm2: Norm,
    conv2: Conv2d,
    skip: Option<Conv2d>,
}

pub struct ResCache<T> {
    x: Tensor<T>,
    n1: NormCache<T>,
    a: Tensor<T>,
    b: Tensor<T>,
    n2: NormCache<T>,
    c: Tensor<T>,
    d: Tensor<T>,
}

impl ResBlock {
    pub fn register(layout: &mut Layout, name: &str, cin: usize, cout: usize, groups: usize) -> Self {
        ResBlock {
            norm1: Norm::group(layout, &format!("{name}.norm1"), cin, groups),
            conv1: Conv2d::register(layout, &format!("{name}.conv1"), cin, cout, 3, 1),
            norm2: Norm::group(layout, &format!("{name}.norm2"), cout, groups),
            conv2: Conv2d::register(layout, &format!("{name}.conv2"), cout, cout, 3, 1),
            skip: (cin != cout).then(|| Conv2d::register(layout, &format!("{name}.skip"), cin, cout, 1, 1)),
        }
    }

    pub fn forward<T: Real>(&self, p: &ModelParams<T>, x: Tensor<T>) -> (Tensor<T>, ResCache<T>) {
        let (a, n1) = self.norm1.forward(p, &x);
        let b = silu(&a);
        let h1 = self.conv1.forward(p, &b);
        let (c, n2) = self.norm2.forward(p, &h1);
        let d = silu(&c);
        let mut out = self.conv2.forward(p, &d);
        match &self.skip {
            Some(s) => out.add_assign(&s.forward(p, &x)),
            None => out.add_assign(&x),
        }
        (out, ResCache { x, n1, a, b, n2, c, d })
    }

    pub fn backward<T: Real>(&self, p: &ModelParams<T>, cache: &ResCache<T>, dy: &Tensor<T>, g: &mut ModelParams<T>) -> Tensor<T> {
        let dd = self.conv2.backward(p, &cache.d, dy, g, true).unwrap();
        let dc = silu_backward(&cache.c, &dd);
        let dh1 = self.norm2.backward(p, &cache.n2, &dc, g);
        let db = self.conv1.backward(p, &cache.b, &dh1, g, true).unwrap();
        let da = silu_backward(&cache.a, &db);
        let mut dx = self.norm1.backward(p, &cache.n1, &da, g);
        match &self.skip {
            Some(s) => dx.add_assign(&s.backward(p, &cache.x, dy, g, true).unwrap()),
            None => dx.add_assign(dy),
        }
        dx
    }
}

impl<T: Real> Tensor<T> {
    /// An empty tensor with this tensor's shape, used with struct update.
    pub(crate) fn clone_shape(&self) -> Tensor<T> {
        Tensor {
            n: self.n,
            h: self.h,
            w: self.w,
            c: self.c,
            data: Vec::new(),
        }
    }
}
