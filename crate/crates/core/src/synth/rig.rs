use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::{CameraPose, CameraRig};

pub const FIXED_CAMERAS: usize = 16;
pub const RANDOM_CAMERAS: usize = 32;
pub const RANDOM_ELEVATION: (f64, f64) = (-5.0, 60.0);
/// Default render resolution of training data.
pub const DEFAULT_RESOLUTION: usize = 64;

/// 16 fixed cameras on the 0-deg elevation ring (22.5 deg apart) and 32
/// random cameras, all at radius 1.5 with a 49.1 deg field of view.
pub fn build_rig(seed: u64) -> CameraRig {
    build_rig_at(seed, DEFAULT_RESOLUTION)
}

pub fn build_rig_at(seed: u64, resolution: usize) -> CameraRig {
    let fixed = (0..FIXED_CAMERAS)
        .map(|k| CameraPose::orbit(360.0 * k as f64 / FIXED_CAMERAS as f64, 0.0, resolution))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = (0..RANDOM_CAMERAS)
        .map(|_| {
            let az = rng.random_range(0.0..360.0);
            let el = rng.random_range(RANDOM_ELEVATION.0..=RANDOM_ELEVATION.1);
            CameraPose::orbit(az, el, resolution)
        })
        .collect();
    CameraRig {
        fixed,
        random,
        rng_seed: seed,
    }
}

/// Indices into `rig.fixed` of the four orthogonal cameras starting at
/// `reference` (0, +90, +180, +270 deg).
pub fn orthogonal_fixed(reference: usize) -> [usize; 4] {
    let q = FIXED_CAMERAS / 4;
    [reference % FIXED_CAMERAS, (reference + q) % FIXED_CAMERAS, (reference + 2 * q) % FIXED_CAMERAS, (reference + 3 * q) % FIXED_CAMERAS]
}
