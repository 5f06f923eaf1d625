//! Orbit cameras looking at the world origin.
//!
//! A [`CameraPose`] is the user-facing description (angles in degrees); the
//! derived [`Camera`] holds the extrinsics and intrinsics the renderer uses.
//! Camera space is x-right, y-down, z-forward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{cross, dot, mat_t_vec, mat_vec, norm, normalize, sub, Mat3, Real, Vec3};

/// Orbit radius of every rig camera.
pub const RIG_RADIUS: f64 = 1.5;
/// Vertical field of view of every rig camera, degrees.
pub const RIG_FOV_Y: f64 = 49.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub azimuth: f64,
    pub elevation: f64,
    pub radius: f64,
    pub fov_y: f64,
    pub width: usize,
    pub height: usize,
}

/// Validating constructor for an origin-facing orbit pose.
pub fn make_camera(
    azimuth: f64,
    elevation: f64,
    radius: f64,
    fov_y: f64,
    resolution: (usize, usize),
) -> Result<CameraPose> {
    if ![azimuth, elevation, radius, fov_y].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("camera parameters".into()));
    }
    if radius <= 0.0 {
        return Err(Error::invalid(format!("camera radius must be positive, got {radius}")));
    }
    if fov_y <= 0.0 || fov_y >= 180.0 {
        return Err(Error::invalid(format!("fov_y must lie in (0, 180), got {fov_y}")));
    }
    // Looking straight up/down makes the y-up frame degenerate.
    if elevation.abs() >= 90.0 {
        return Err(Error::invalid(format!("elevation must lie in (-90, 90), got {elevation}")));
    }
    if resolution.0 == 0 || resolution.1 == 0 {
        return Err(Error::invalid("resolution must be non-zero"));
    }
    Ok(CameraPose {
        azimuth,
        elevation,
        radius,
        fov_y,
        width: resolution.0,
        height: resolution.1,
    })
}

impl CameraPose {
    /// Rig-default pose (radius 1.5, fov 49.1 deg) at a square resolution.
    pub fn orbit(azimuth: f64, elevation: f64, resolution: usize) -> Self {
        make_camera(azimuth, elevation, RIG_RADIUS, RIG_FOV_Y, (resolution, resolution))
            .expect("rig pose parameters are valid")
    }

    pub fn with_resolution(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn with_azimuth(mut self, azimuth: f64) -> Self {
        self.azimuth = azimuth;
        self
    }

    /// World-space camera centre.
    pub fn position(&self) -> Vec3<f64> {
        let (az, el) = (self.azimuth.to_radians(), self.elevation.to_radians());
        [
            self.radius * el.cos() * az.sin(),
            self.radius * el.sin(),
            self.radius * el.cos() * az.cos(),
        ]
    }

    pub fn camera<T: Real>(&self) -> Camera<T> {
        let o = self.position();
        let forward = normalize(sub([0.0, 0.0, 0.0], o));
        let right = normalize(cross(forward, [0.0, 1.0, 0.0]));
        let down = cross(forward, right);
        let focal = 0.5 * self.height as f64 / (0.5 * self.fov_y.to_radians()).tan();
        let c = |v: Vec3<f64>| [T::of(v[0]), T::of(v[1]), T::of(v[2])];
        Camera {
            position: c(o),
            rotation: [c(right), c(down), c(forward)],
            fx: T::of(focal),
            fy: T::of(focal),
            cx: T::of(0.5 * self.width as f64),
            cy: T::of(0.5 * self.height as f64),
            width: self.width,
            height: self.height,
        }
    }
}

/// Recovers `(azimuth, elevation, radius)` in degrees/units from a position.
pub fn spherical_from_position(p: Vec3<f64>) -> (f64, f64, f64) {
    let r = norm(p);
    let el = (p[1] / r).asin().to_degrees();
    let az = p[0].atan2(p[2]).to_degrees();
    (az, el, r)
}

/// Pinhole camera: `rotation` rows are the camera axes (right, down, forward)
/// in world coordinates, i.e. the camera-from-world rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera<T = f32> {
    pub position: Vec3<T>,
    pub rotation: Mat3<T>,
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Real> Camera<T> {
    /// World point to camera space.
    #[inline]
    pub fn to_camera(&self, p: Vec3<T>) -> Vec3<T> {
        mat_vec(&self.rotation, sub(p, self.position))
    }

    /// Projects a world point to pixel coordinates; `None` behind the camera.
    pub fn project(&self, p: Vec3<T>) -> Option<[T; 2]> {
        let c = self.to_camera(p);
        if c[2] <= T::zero() {
            return None;
        }
        Some([self.fx * c[0] / c[2] + self.cx, self.fy * c[1] / c[2] + self.cy])
    }

    /// Unit world-space direction of the ray through the centre of pixel
    /// `(col, row)`.
    pub fn ray_direction(&self, col: usize, row: usize) -> Vec3<T> {
        let half = T::of(0.5);
        let x = (T::of(col as f64) + half - self.cx) / self.fx;
        let y = (T::of(row as f64) + half - self.cy) / self.fy;
        normalize(mat_t_vec(&self.rotation, [x, y, T::one()]))
    }

    /// World-from-camera rotation (columns are camera axes).
    pub fn world_from_camera(&self) -> Mat3<T> {
        crate::math::transpose(&self.rotation)
    }

    pub fn forward(&self) -> Vec3<T> {
        self.rotation[2]
    }

    pub fn viewing_origin(&self) -> bool {
        let to_origin = normalize(sub([T::zero(); 3], self.position));
        (dot(to_origin, self.forward()) - T::one()).abs() < T::of(1e-6)
    }
}

/// Fixed ring plus random cameras used to render and sample training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    /// 0-deg elevation ring, uniformly spaced in azimuth.
    pub fixed: Vec<CameraPose>,
    /// Random azimuth/elevation supervision cameras.
    pub random: Vec<CameraPose>,
    pub rng_seed: u64,
}

impl CameraRig {
    pub fn len(&self) -> usize {
        self.fixed.len() + self.random.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Camera `k` in the global ordering: fixed cameras first, then random.
    pub fn get(&self, k: usize) -> Option<&CameraPose> {
        if k < self.fixed.len() {
            self.fixed.get(k)
        } else {
            self.random.get(k - self.fixed.len())
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &CameraPose> {
        self.fixed.iter().chain(self.random.iter())
    }

    pub fn with_resolution(&self, res: usize) -> CameraRig {
        CameraRig {
            fixed: self.fixed.iter().map(|p| p.with_resolution(res, res)).collect(),
            random: self.random.iter().map(|p| p.with_resolution(res, res)).collect(),
            rng_seed: self.rng_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::det;

    fn close(a: Vec3<f64>, b: Vec3<f64>, tol: f64) -> bool {
        (0..3).all(|i| (a[i] - b[i]).abs() < tol)
    }

    #[test]
    fn canonical_positions() {
        let p = make_camera(0.0, 0.0, 1.5, 49.1, (64, 64)).unwrap();
        assert!(close(p.position(), [0.0, 0.0, 1.5], 1e-12));
        let p = make_camera(90.0, 0.0, 1.5, 49.1, (64, 64)).unwrap();
        assert!(close(p.position(), [1.5, 0.0, 0.0], 1e-12));
    }

    #[test]
    fn oblique_position_matches_trig() {
        let p = make_camera(45.0, 30.0, 2.0, 49.1, (64, 64)).unwrap();
        // Independent evaluation: horizontal radius 2 cos 30 = sqrt 3, split
        // equally between x and z at 45 deg; height 2 sin 30 = 1.
        let h = 3.0f64.sqrt();
        let expected = [h / 2.0f64.sqrt(), 1.0, h / 2.0f64.sqrt()];
        assert!(close(p.position(), expected, 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_camera(f64::NAN, 0.0, 1.5, 49.1, (8, 8)).is_err());
        assert!(make_camera(0.0, 0.0, 0.0, 49.1, (8, 8)).is_err());
        assert!(make_camera(0.0, 0.0, 1.5, 180.0, (8, 8)).is_err());
        assert!(make_camera(0.0, 0.0, 1.5, 0.0, (8, 8)).is_err());
        assert!(make_camera(0.0, f64::INFINITY, 1.5, 40.0, (8, 8)).is_err());
    }

    #[test]
    fn rotation_is_orthonormal_and_looks_at_origin() {
        for &(az, el) in &[(0.0, 0.0), (37.0, 12.0), (-120.0, 59.0), (200.0, -5.0)] {
            let cam: Camera<f64> = CameraPose::orbit(az, el, 32).camera();
            let r = cam.rotation;
            assert!((det(&r) - 1.0).abs() < 1e-6);
            for i in 0..3 {
                for j in 0..3 {
                    let d = dot(r[i], r[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-12);
                }
            }
            assert!(cam.viewing_origin());
            // Image "up" has a non-negative world-y component.
            assert!(-r[1][1] >= 0.0);
        }
    }

    #[test]
    fn origin_projects_to_image_centre() {
        let cam: Camera<f64> = CameraPose::orbit(73.0, 20.0, 64).camera();
        let uv = cam.project([0.0; 3]).unwrap();
        assert!((uv[0] - 32.0).abs() < 1e-9 && (uv[1] - 32.0).abs() < 1e-9);
    }

    #[test]
    fn spherical_round_trip() {
        for &(az, el, r) in &[(10.0, 20.0, 1.5), (-170.0, -4.0, 2.5), (89.0, 59.9, 0.7)] {
            let p = make_camera(az, el, r, 49.1, (4, 4)).unwrap();
            let (a, e, rr) = spherical_from_position(p.position());
            assert!((a - az).abs() < 1e-6 && (e - el).abs() < 1e-6 && (rr - r).abs() < 1e-6);
        }
    }
}
