use gauss4d_core::{Error, Real, Result};

/// Dense `(N, H, W, C)` activation tensor, row-major with channels last.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T = f32> {
    pub n: usize,
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(n: usize, h: usize, w: usize, c: usize) -> Self {
        Tensor {
            n,
            h,
            w,
            c,
            data: vec![T::zero(); n * h * w * c],
        }
    }

    pub fn from_data(n: usize, h: usize, w: usize, c: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * h * w * c {
            return Err(Error::shape("tensor elements", n * h * w * c, data.len()));
        }
        Ok(Tensor { n, h, w, c, data })
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.n, self.h, self.w, self.c]
    }

    pub fn same_shape(&self, other: &Tensor<T>) -> bool {
        self.shape() == other.shape()
    }

    /// Elements of one sample.
    pub fn sample_len(&self) -> usize {
        self.h * self.w * self.c
    }

    pub fn sample(&self, i: usize) -> &[T] {
        let s = self.sample_len();
        &self.data[i * s..(i + 1) * s]
    }

    pub fn add_assign(&mut self, other: &Tensor<T>) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Channel concatenation `[a, b]`.
    pub fn concat_channels(a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
        assert_eq!((a.n, a.h, a.w), (b.n, b.h, b.w), "concat: spatial mismatch");
        let c = a.c + b.c;
        let mut data = Vec::with_capacity(a.n * a.h * a.w * c);
        for (pa, pb) in a.data.chunks_exact(a.c).zip(b.data.chunks_exact(b.c)) {
            data.extend_from_slice(pa);
            data.extend_from_slice(pb);
        }
        Tensor { n: a.n, h: a.h, w: a.w, c, data }
    }

    /// Inverse of [`Tensor::concat_channels`]: splits after `ca` channels.
    pub fn split_channels(&self, ca: usize) -> (Tensor<T>, Tensor<T>) {
        let cb = self.c - ca;
        let mut a = Vec::with_capacity(self.n * self.h * self.w * ca);
        let mut b = Vec::with_capacity(self.n * self.h * self.w * cb);
        for px in self.data.chunks_exact(self.c) {
            a.extend_from_slice(&px[..ca]);
            b.extend_from_slice(&px[ca..]);
        }
        (
            Tensor { n: self.n, h: self.h, w: self.w, c: ca, data: a },
            Tensor { n: self.n, h: self.h, w: self.w, c: cb, data: b },
        )
    }

    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            n: self.n,
            h: self.h,
            w: self.w,
            c: self.c,
            data: self.data.iter().map(|v| U::of(v.f64())).collect(),
        }
    }
}
