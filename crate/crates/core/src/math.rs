//! Small fixed-size linear algebra and the floating-point abstraction.
//!
//! Everything numeric is generic over [`Real`] so the same code runs in `f32`
//! for training and in `f64` for finite-difference verification.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst};

pub trait Real:
    Float
    + FloatConst
    + Default
    + Debug
    + Display
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + 'static
{
    fn of(x: f64) -> Self;
    fn f64(self) -> f64;

    /// `C = alpha * A * B + beta * C` with arbitrary row/column strides.
    ///
    /// # Safety
    /// Strides and extents must describe valid regions of the slices.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Real for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn f64(self) -> f64 {
        self as f64
    }
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }
}

impl Real for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }
    #[inline]
    fn f64(self) -> f64 {
        self
    }
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }
}

/// Row-major matrix operand description for [`gemm`].
#[derive(Debug, Clone, Copy)]
pub enum Op {
    /// Use the stored `rows x cols` matrix as is.
    N,
    /// Use its transpose.
    T,
}

/// `c[m x n] = alpha * op(a) * op(b) + beta * c`, all buffers row-major and
/// contiguous. `a` is stored as `m x k` (or `k x m` when transposed), `b` as
/// `k x n` (or `n x k`).
#[allow(clippy::too_many_arguments)]
pub fn gemm<T: Real>(
    m: usize,
    k: usize,
    n: usize,
    alpha: T,
    a: &[T],
    op_a: Op,
    b: &[T],
    op_b: Op,
    beta: T,
    c: &mut [T],
) {
    assert!(a.len() >= m * k, "gemm: lhs too short");
    assert!(b.len() >= k * n, "gemm: rhs too short");
    assert!(c.len() >= m * n, "gemm: output too short");
    let (rsa, csa) = match op_a {
        Op::N => (k as isize, 1),
        Op::T => (1, m as isize),
    };
    let (rsb, csb) = match op_b {
        Op::N => (n as isize, 1),
        Op::T => (1, k as isize),
    };
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: extents checked above; strides describe contiguous row-major
    // storage of the stated shapes.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub type Vec3<T> = [T; 3];
/// Row-major 3x3 matrix.
pub type Mat3<T> = [[T; 3]; 3];

#[inline]
pub fn v3<T: Real>(x: f64, y: f64, z: f64) -> Vec3<T> {
    [T::of(x), T::of(y), T::of(z)]
}

#[inline]
pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale<T: Real>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm<T: Real>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

pub fn normalize<T: Real>(a: Vec3<T>) -> Vec3<T> {
    let n = norm(a);
    scale(a, T::one() / n)
}

#[inline]
pub fn mat_vec<T: Real>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

/// `m^T v`.
#[inline]
pub fn mat_t_vec<T: Real>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, o) in row.iter_mut().enumerate() {
            *o = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn transpose<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out[j][i] = x;
        }
    }
    out
}

pub fn det<T: Real>(m: &Mat3<T>) -> T {
    dot(m[0], cross(m[1], m[2]))
}

pub fn identity<T: Real>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

/// Rotation about `+y` by `angle` radians (takes `+z` towards `+x`).
pub fn rot_y<T: Real>(angle: T) -> Mat3<T> {
    let (s, c) = angle.sin_cos();
    let (o, z) = (T::one(), T::zero());
    [[c, z, s], [z, o, z], [-s, z, c]]
}

/// Quaternion stored as `[w, x, y, z]`.
pub type Quat<T> = [T; 4];

pub fn quat_identity<T: Real>() -> Quat<T> {
    [T::one(), T::zero(), T::zero(), T::zero()]
}

pub fn quat_norm<T: Real>(q: Quat<T>) -> T {
    (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt()
}

pub fn quat_normalize<T: Real>(q: Quat<T>) -> Quat<T> {
    let n = quat_norm(q);
    [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
}

/// Hamilton product `a * b` (apply `b` first, then `a`).
pub fn quat_mul<T: Real>(a: Quat<T>, b: Quat<T>) -> Quat<T> {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Unit quaternion for a rotation of `angle` radians about a unit `axis`.
pub fn quat_axis_angle<T: Real>(axis: Vec3<T>, angle: T) -> Quat<T> {
    let a = normalize(axis);
    let (s, c) = (angle * T::of(0.5)).sin_cos();
    [c, a[0] * s, a[1] * s, a[2] * s]
}

/// Rotation matrix of a unit quaternion.
pub fn quat_to_mat<T: Real>(q: Quat<T>) -> Mat3<T> {
    let [w, x, y, z] = q;
    let one = T::one();
    let two = T::of(2.0);
    [
        [
            one - two * (y * y + z * z),
            two * (x * y - w * z),
            two * (x * z + w * y),
        ],
        [
            two * (x * y + w * z),
            one - two * (x * x + z * z),
            two * (y * z - w * x),
        ],
        [
            two * (x * z - w * y),
            two * (y * z + w * x),
            one - two * (x * x + y * y),
        ],
    ]
}

/// Pulls a gradient with respect to the rotation matrix back onto the unit
/// quaternion components that produced it (no normalisation term).
pub fn quat_to_mat_backward<T: Real>(q: Quat<T>, g: &Mat3<T>) -> Quat<T> {
    let [w, x, y, z] = q;
    let two = T::of(2.0);
    let four = T::of(4.0);
    let dw = two
        * (-z * g[0][1] + y * g[0][2] + z * g[1][0] - x * g[1][2] - y * g[2][0] + x * g[2][1]);
    let dx = two * (y * g[0][1] + z * g[0][2] + y * g[1][0] - w * g[1][2] + z * g[2][0]
        + w * g[2][1])
        - four * x * (g[1][1] + g[2][2]);
    let dy = two * (x * g[0][1] + w * g[0][2] + x * g[1][0] + z * g[1][2] - w * g[2][0]
        + z * g[2][1])
        - four * y * (g[0][0] + g[2][2]);
    let dz = two * (-w * g[0][1] + x * g[0][2] + w * g[1][0] + y * g[1][2] + x * g[2][0]
        + y * g[2][1])
        - four * z * (g[0][0] + g[1][1]);
    [dw, dx, dy, dz]
}

/// Gradient through `q / |q|`: maps `dL/d(q_hat)` to `dL/dq`.
pub fn normalize4_backward<T: Real>(q: Quat<T>, d_hat: Quat<T>) -> Quat<T> {
    let n = quat_norm(q);
    let hat = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
    let proj = hat[0] * d_hat[0] + hat[1] * d_hat[1] + hat[2] * d_hat[2] + hat[3] * d_hat[3];
    [
        (d_hat[0] - hat[0] * proj) / n,
        (d_hat[1] - hat[1] * proj) / n,
        (d_hat[2] - hat[2] * proj) / n,
        (d_hat[3] - hat[3] * proj) / n,
    ]
}

pub fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_quaternion_is_exact_identity() {
        let m: Mat3<f32> = quat_to_mat(quat_identity());
        assert_eq!(m, identity::<f32>());
        let m: Mat3<f64> = quat_to_mat(quat_identity());
        assert_eq!(m, identity::<f64>());
    }

    #[test]
    fn quaternion_matrix_matches_axis_angle_rotation() {
        let q = quat_axis_angle([0.0f64, 1.0, 0.0], 0.7);
        let m = quat_to_mat(q);
        let r = rot_y(0.7f64);
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - r[i][j]).abs() < 1e-12);
            }
        }
        assert!((det(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quat_backward_matches_finite_differences() {
        let q = quat_normalize([0.3f64, -0.5, 0.7, 0.2]);
        let g = [[0.1, -0.4, 0.3], [0.9, 0.2, -0.6], [-0.3, 0.5, 0.8]];
        let loss = |q: Quat<f64>| {
            let m = quat_to_mat(quat_normalize(q));
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += g[i][j] * m[i][j];
                }
            }
            s
        };
        let analytic = normalize4_backward(q, quat_to_mat_backward(q, &g));
        let h = 1e-6;
        for k in 0..4 {
            let mut qp = q;
            let mut qm = q;
            qp[k] += h;
            qm[k] -= h;
            let fd = (loss(qp) - loss(qm)) / (2.0 * h);
            assert!((fd - analytic[k]).abs() < 1e-7, "{k}: {fd} vs {}", analytic[k]);
        }
    }

    #[test]
    fn gemm_transposes() {
        // a: 2x3, b: 3x2
        let a = [1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [7.0f64, 8.0, 9.0, 10.0, 11.0, 12.0];
        let mut c = [0.0; 4];
        gemm(2, 3, 2, 1.0, &a, Op::N, &b, Op::N, 0.0, &mut c);
        assert_eq!(c, [58.0, 64.0, 139.0, 154.0]);
        // a^T stored as 3x2 = a viewed transposed
        let at = [1.0f64, 4.0, 2.0, 5.0, 3.0, 6.0];
        let mut c2 = [0.0; 4];
        gemm(2, 3, 2, 1.0, &at, Op::T, &b, Op::N, 0.0, &mut c2);
        assert_eq!(c, c2);
        let bt = [7.0f64, 9.0, 11.0, 8.0, 10.0, 12.0];
        let mut c3 = [0.0; 4];
        gemm(2, 3, 2, 1.0, &a, Op::N, &bt, Op::T, 0.0, &mut c3);
        assert_eq!(c, c3);
    }
}
