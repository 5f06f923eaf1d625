//! The 4D representation: a time-ordered sequence of per-frame Gaussian sets.

use crate::error::{Error, Result};
use crate::math::{quat_identity, quat_norm, quat_normalize, Quat, Real, Vec3};

/// Number of scalar parameters per Gaussian.
pub const GAUSSIAN_PARAMS: usize = 14;

/// One anisotropic 3D Gaussian: centre, per-axis standard deviation,
/// rotation `(w, x, y, z)`, opacity and RGB colour.
///
/// Fields are public so optimisers and finite-difference probes can perturb
/// them directly; [`Gaussian::new`] is the validating constructor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian<T = f32> {
    pub center: Vec3<T>,
    pub scale: Vec3<T>,
    pub rotation: Quat<T>,
    pub opacity: T,
    pub color: Vec3<T>,
}

impl<T: Real> Gaussian<T> {
    /// Builds a Gaussian, normalising the quaternion and checking ranges.
    pub fn new(
        center: Vec3<T>,
        scale: Vec3<T>,
        rotation: Quat<T>,
        opacity: T,
        color: Vec3<T>,
    ) -> Result<Self> {
        let n = quat_norm(rotation);
        if !(n.is_finite() && n > T::zero()) {
            return Err(Error::invalid("quaternion must be finite and non-zero"));
        }
        let g = Gaussian {
            center,
            scale,
            rotation: quat_normalize(rotation),
            opacity,
            color,
        };
        g.validate()?;
        Ok(g)
    }

    /// Isotropic, axis-aligned Gaussian.
    pub fn isotropic(center: Vec3<T>, sigma: T, opacity: T, color: Vec3<T>) -> Result<Self> {
        Self::new(center, [sigma; 3], quat_identity(), opacity, color)
    }

    pub fn validate(&self) -> Result<()> {
        let arr = self.to_array();
        if arr.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gaussian parameters".into()));
        }
        if self.scale.iter().any(|&s| s <= T::zero()) {
            return Err(Error::invalid("gaussian scales must be positive"));
        }
        if (quat_norm(self.rotation) - T::one()).abs() > T::of(1e-5) {
            return Err(Error::invalid("gaussian quaternion must have unit norm"));
        }
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.opacity) || !self.color.iter().all(|&c| unit(c)) {
            return Err(Error::invalid("opacity and colour must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Parameters in storage order: centre xyz, scale xyz, quaternion wxyz,
    /// opacity, colour rgb.
    pub fn to_array(&self) -> [T; GAUSSIAN_PARAMS] {
        let c = self.center;
        let s = self.scale;
        let q = self.rotation;
        let k = self.color;
        [
            c[0], c[1], c[2], s[0], s[1], s[2], q[0], q[1], q[2], q[3], self.opacity, k[0], k[1],
            k[2],
        ]
    }

    /// Inverse of [`Gaussian::to_array`]; performs no validation.
    pub fn from_array(a: &[T; GAUSSIAN_PARAMS]) -> Self {
        Gaussian {
            center: [a[0], a[1], a[2]],
            scale: [a[3], a[4], a[5]],
            rotation: [a[6], a[7], a[8], a[9]],
            opacity: a[10],
            color: [a[11], a[12], a[13]],
        }
    }

    pub fn cast<U: Real>(&self) -> Gaussian<U> {
        let a = self.to_array();
        let mut b = [U::zero(); GAUSSIAN_PARAMS];
        for (dst, src) in b.iter_mut().zip(a) {
            *dst = U::of(src.f64());
        }
        Gaussian::from_array(&b)
    }
}

/// The Gaussians of one time step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaussianFrame {
    /// Frame index within its sequence.
    pub index: u32,
    pub gaussians: Vec<Gaussian>,
}

impl GaussianFrame {
    pub fn new(index: u32, gaussians: Vec<Gaussian>) -> Self {
        GaussianFrame { index, gaussians }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    /// Time of this frame in seconds at the given frame rate.
    pub fn time(&self, fps: f32) -> f64 {
        self.index as f64 / fps as f64
    }
}

/// Time-ordered frames sharing one world coordinate system.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSequence {
    pub fps: f32,
    pub frames: Vec<GaussianFrame>,
}

impl GaussianSequence {
    pub fn new(fps: f32, frames: Vec<GaussianFrame>) -> Result<Self> {
        let seq = GaussianSequence { fps, frames };
        seq.validate_structure()?;
        Ok(seq)
    }

    /// Checks frame-rate and timestamp ordering (not per-Gaussian ranges).
    pub fn validate_structure(&self) -> Result<()> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::invalid("fps must be positive"));
        }
        for w in self.frames.windows(2) {
            if w[1].index <= w[0].index {
                return Err(Error::invalid(format!(
                    "frame indices must increase strictly ({} then {})",
                    w[0].index, w[1].index
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Gaussians per frame if constant across the sequence.
    pub fn gaussians_per_frame(&self) -> Option<usize> {
        let n = self.frames.first()?.len();
        self.frames.iter().all(|f| f.len() == n).then_some(n)
    }
}
