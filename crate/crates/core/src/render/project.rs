//! Per-Gaussian EWA projection and its adjoint.

use super::{RenderConfig, COV2D_BLUR, MIN_DET, NEAR_PLANE};
use crate::camera::Camera;
use crate::gaussian::Gaussian;
use crate::math::{
    mat_t_vec, normalize4_backward, quat_norm, quat_to_mat, quat_to_mat_backward,
    Mat3, Quat, Real, Vec3,
};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Projected<T> {
    pub mean: [T; 2],
    /// Inverse 2D covariance `[a, b, c]` of `[[a, b], [b, c]]`.
    pub conic: [T; 3],
    pub opacity: T,
    pub color: [T; 3],
    pub depth: T,
    /// Pixel bounds `[x0, x1, y0, y1)` that may receive `α >= alpha_cutoff`.
    pub bbox: [usize; 4],
    p_cam: Vec3<T>,
    q_hat: Quat<T>,
    rot: Mat3<T>,
    m: Mat3<T>,
    cov3: Mat3<T>,
    tm: [[T; 3]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Skip {
    Near,
    Degenerate,
}

pub(crate) fn project<T: Real>(
    g: &Gaussian<T>,
    cam: &Camera<T>,
    cfg: &RenderConfig,
) -> Result<Projected<T>, Skip> {
    let p = cam.to_camera(g.center);
    let z = p[2];
    if !(z > T::of(NEAR_PLANE)) {
        return Err(Skip::Near);
    }
    let qn = quat_norm(g.rotation);
    if !(qn > T::zero() && qn.is_finite()) {
        return Err(Skip::Degenerate);
    }
    let q_hat = [g.rotation[0] / qn, g.rotation[1] / qn, g.rotation[2] / qn, g.rotation[3] / qn];
    let rot = quat_to_mat(q_hat);
    let mut m = rot;
    for row in m.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= g.scale[j];
        }
    }
    let mut cov3 = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov3[i][j] = m[i][0] * m[j][0] + m[i][1] * m[j][1] + m[i][2] * m[j][2];
        }
    }
    let (fx, fy) = (cam.fx, cam.fy);
    let jac = [
        [fx / z, T::zero(), -fx * p[0] / (z * z)],
        [T::zero(), fy / z, -fy * p[1] / (z * z)],
    ];
    let w = &cam.rotation;
    let mut tm = [[T::zero(); 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            tm[i][j] = jac[i][0] * w[0][j] + jac[i][1] * w[1][j] + jac[i][2] * w[2][j];
        }
    }
    // Σ2 = Tm Σ Tmᵀ
    let mut tc = [[T::zero(); 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            tc[i][j] = tm[i][0] * cov3[0][j] + tm[i][1] * cov3[1][j] + tm[i][2] * cov3[2][j];
        }
    }
    let blur = T::of(COV2D_BLUR);
    let s00 = tc[0][0] * tm[0][0] + tc[0][1] * tm[0][1] + tc[0][2] * tm[0][2] + blur;
    let s01 = tc[0][0] * tm[1][0] + tc[0][1] * tm[1][1] + tc[0][2] * tm[1][2];
    let s11 = tc[1][0] * tm[1][0] + tc[1][1] * tm[1][1] + tc[1][2] * tm[1][2] + blur;
    let det = s00 * s11 - s01 * s01;
    if !(det >= T::of(MIN_DET)) || !det.is_finite() {
        return Err(Skip::Degenerate);
    }
    let conic = [s11 / det, -s01 / det, s00 / det];
    let mean = [fx * p[0] / z + cam.cx, fy * p[1] / z + cam.cy];

    // Radius beyond which no pixel can reach the cutoff, floored at
    // `gaussian_extent` standard deviations.
    let mid = T::of(0.5) * (s00 + s11);
    let lambda = mid + (mid * mid - det).max(T::zero()).sqrt();
    let sigma = lambda.sqrt();
    let k = T::of(cfg.gaussian_extent as f64);
    let cutoff = T::of(cfg.alpha_cutoff as f64);
    let extent = if cutoff > T::zero() {
        if g.opacity < cutoff {
            T::zero()
        } else {
            k.max((T::of(2.0) * (g.opacity / cutoff).ln()).sqrt())
        }
    } else {
        k
    };
    let bbox = if extent > T::zero() && mean[0].is_finite() && mean[1].is_finite() {
        let r = extent * sigma + T::one();
        let clamp = |v: T, hi: usize| -> usize {
            if v <= T::zero() {
                0
            } else {
                v.to_usize().unwrap_or(hi).min(hi)
            }
        };
        [
            clamp((mean[0] - r).floor(), cam.width),
            clamp((mean[0] + r).ceil() + T::one(), cam.width),
            clamp((mean[1] - r).floor(), cam.height),
            clamp((mean[1] + r).ceil() + T::one(), cam.height),
        ]
    } else {
        [0, 0, 0, 0]
    };
    Ok(Projected {
        mean,
        conic,
        opacity: g.opacity,
        color: g.color,
        depth: z,
        bbox,
        p_cam: p,
        q_hat,
        rot,
        m,
        cov3,
        tm,
    })
}

/// Screen-space gradients accumulated for one splat.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SplatGrad<T> {
    pub mean: [T; 2],
    pub conic: [T; 3],
    pub opacity: T,
    pub color: [T; 3],
}

impl<T: Real> SplatGrad<T> {
    pub fn zero() -> Self {
        SplatGrad {
            mean: [T::zero(); 2],
            conic: [T::zero(); 3],
            opacity: T::zero(),
            color: [T::zero(); 3],
        }
    }

    pub fn add(&mut self, o: &SplatGrad<T>) {
        self.mean[0] += o.mean[0];
        self.mean[1] += o.mean[1];
        for k in 0..3 {
            self.conic[k] += o.conic[k];
            self.color[k] += o.color[k];
        }
        self.opacity += o.opacity;
    }
}

/// Pulls screen-space gradients back to the 14 Gaussian parameters.
pub(crate) fn project_backward<T: Real>(
    g: &Gaussian<T>,
    pr: &Projected<T>,
    cam: &Camera<T>,
    d: &SplatGrad<T>,
) -> [T; 14] {
    let [a, b, c] = pr.conic;
    let half = T::of(0.5);
    // dΣ2 = -Q G Q with G the symmetric matrix gradient of the conic.
    let (ga, gb, gc) = (d.conic[0], d.conic[1] * half, d.conic[2]);
    let qg = [[a * ga + b * gb, a * gb + b * gc], [b * ga + c * gb, b * gb + c * gc]];
    let s00 = -(qg[0][0] * a + qg[0][1] * b);
    let s01 = -(qg[0][0] * b + qg[0][1] * c);
    let s10 = -(qg[1][0] * a + qg[1][1] * b);
    let s11 = -(qg[1][0] * b + qg[1][1] * c);
    let sym = half * (s01 + s10);
    let ds2 = [[s00, sym], [sym, s11]];

    let tm = &pr.tm;
    // dΣ = Tmᵀ dΣ2 Tm
    let mut dcov = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = T::zero();
            for p in 0..2 {
                for q in 0..2 {
                    acc += tm[p][i] * ds2[p][q] * tm[q][j];
                }
            }
            dcov[i][j] = acc;
        }
    }
    // dTm = 2 dΣ2 Tm Σ
    let mut tms = [[T::zero(); 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            tms[i][j] = tm[i][0] * pr.cov3[0][j] + tm[i][1] * pr.cov3[1][j] + tm[i][2] * pr.cov3[2][j];
        }
    }
    let two = T::of(2.0);
    let mut dtm = [[T::zero(); 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            dtm[i][j] = two * (ds2[i][0] * tms[0][j] + ds2[i][1] * tms[1][j]);
        }
    }
    // Tm = J W  =>  dJ = dTm Wᵀ
    let w = &cam.rotation;
    let mut dj = [[T::zero(); 3]; 2];
    for i in 0..2 {
        for k in 0..3 {
            dj[i][k] = dtm[i][0] * w[k][0] + dtm[i][1] * w[k][1] + dtm[i][2] * w[k][2];
        }
    }
    let [x, y, z] = pr.p_cam;
    let (fx, fy) = (cam.fx, cam.fy);
    let z2 = z * z;
    let z3 = z2 * z;
    let (du, dv) = (d.mean[0], d.mean[1]);
    let dp = [
        dj[0][2] * (-fx / z2) + du * fx / z,
        dj[1][2] * (-fy / z2) + dv * fy / z,
        dj[0][0] * (-fx / z2)
            + dj[0][2] * (two * fx * x / z3)
            + dj[1][1] * (-fy / z2)
            + dj[1][2] * (two * fy * y / z3)
            - du * fx * x / z2
            - dv * fy * y / z2,
    ];
    let dcenter = mat_t_vec(w, dp);

    // Σ = M Mᵀ  =>  dM = (dΣ + dΣᵀ) M
    let mut dm = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = T::zero();
            for k in 0..3 {
                acc += (dcov[i][k] + dcov[k][i]) * pr.m[k][j];
            }
            dm[i][j] = acc;
        }
    }
    let mut drot = [[T::zero(); 3]; 3];
    let mut dscale = [T::zero(); 3];
    for i in 0..3 {
        for j in 0..3 {
            drot[i][j] = dm[i][j] * g.scale[j];
            dscale[j] += dm[i][j] * pr.rot[i][j];
        }
    }
    let dq = normalize4_backward(g.rotation, quat_to_mat_backward(pr.q_hat, &drot));
    [
        dcenter[0], dcenter[1], dcenter[2], dscale[0], dscale[1], dscale[2], dq[0], dq[1], dq[2],
        dq[3], d.opacity, d.color[0], d.color[1], d.color[2],
    ]
}

/// Front-to-back order of the projected splats (depth, then index).
pub(crate) fn depth_order<T: Real>(proj: &[Option<Projected<T>>]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..proj.len() as u32)
        .filter(|&i| proj[i as usize].is_some())
        .collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (proj[i as usize].as_ref().unwrap(), proj[j as usize].as_ref().unwrap());
        a.depth.partial_cmp(&b.depth).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
    });
    order
}

/// Projects every Gaussian, returning `None` for skipped ones.
pub(crate) fn project_all<T: Real>(
    gaussians: &[Gaussian<T>],
    cam: &Camera<T>,
    cfg: &RenderConfig,
) -> (Vec<Option<Projected<T>>>, super::RenderStats) {
    let results = crate::par::map_slice(gaussians, |g| project(g, cam, cfg));
    let mut stats = super::RenderStats::default();
    let proj = results
        .into_iter()
        .map(|r| match r {
            Ok(p) => {
                stats.visible += 1;
                Some(p)
            }
            Err(Skip::Near) => {
                stats.near_clipped += 1;
                None
            }
            Err(Skip::Degenerate) => {
                stats.degenerate += 1;
                None
            }
        })
        .collect();
    (proj, stats)
}
