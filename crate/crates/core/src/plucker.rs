//! Per-pixel Plücker ray embeddings: unit direction `d` and moment `o x d`.

use crate::camera::{Camera, CameraPose};
use crate::image::Image;
use crate::math::{cross, Real};

pub fn plucker_embed<T: Real>(pose: &CameraPose) -> Image<T> {
    plucker_from_camera(&pose.camera::<T>())
}

pub fn plucker_from_camera<T: Real>(cam: &Camera<T>) -> Image<T> {
    let mut out = Image::new(cam.width, cam.height, 6);
    for row in 0..cam.height {
        for col in 0..cam.width {
            let d = cam.ray_direction(col, row);
            let m = cross(cam.position, d);
            let i = out.idx(col, row, 0);
            out.data[i..i + 3].copy_from_slice(&d);
            out.data[i + 3..i + 6].copy_from_slice(&m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{dot, norm};

    #[test]
    fn camera_at_origin_has_zero_moment() {
        let mut cam: Camera<f64> = CameraPose::orbit(30.0, 10.0, 8).camera();
        cam.position = [0.0; 3];
        let p = plucker_from_camera(&cam);
        for px in p.data.chunks(6) {
            assert_eq!(&px[3..], &[0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn central_ray_passes_through_origin() {
        // 1x1 image: the only pixel centre is the principal point.
        let pose = crate::make_camera(0.0, 0.0, 1.5, 49.1, (1, 1)).unwrap();
        let p = plucker_embed::<f64>(&pose);
        let d = [p.data[0], p.data[1], p.data[2]];
        let m = [p.data[3], p.data[4], p.data[5]];
        assert!((d[0]).abs() < 1e-12 && (d[1]).abs() < 1e-12 && (d[2] + 1.0).abs() < 1e-12);
        assert!(m.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn corner_pixel_matches_direct_geometry() {
        // 4x4 image at 90 deg fov: focal = 2 px; top-left pixel centre is at
        // (0.5, 0.5), i.e. offsets (-1.5, -1.5) px from the principal point.
        let pose = crate::make_camera(0.0, 0.0, 1.5, 90.0, (4, 4)).unwrap();
        let p = plucker_embed::<f64>(&pose);
        // Camera axes at azimuth 0: right = +x, down = -y, forward = -z.
        let raw: [f64; 3] = [-1.5 / 2.0, 1.5 / 2.0, -1.0];
        let n = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
        let d = [raw[0] / n, raw[1] / n, raw[2] / n];
        let o = [0.0, 0.0, 1.5];
        let m = [o[1] * d[2] - o[2] * d[1], o[2] * d[0] - o[0] * d[2], o[0] * d[1] - o[1] * d[0]];
        let got = p.pixel(0, 0);
        for k in 0..3 {
            assert!((got[k] - d[k]).abs() < 1e-12);
            assert!((got[3 + k] - m[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn incidence_and_unit_direction() {
        for &(az, el) in &[(0.0, 0.0), (123.0, 45.0), (-77.0, -4.0)] {
            let p = plucker_embed::<f64>(&CameraPose::orbit(az, el, 16));
            for px in p.data.chunks(6) {
                let d = [px[0], px[1], px[2]];
                let m = [px[3], px[4], px[5]];
                assert!((norm(d) - 1.0).abs() < 1e-9);
                assert!(dot(d, m).abs() < 1e-6);
            }
        }
    }
}
