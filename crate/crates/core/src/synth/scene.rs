//! Procedural animated Gaussian scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, GaussianFrame, GaussianSequence};
use crate::math::{
    add, mat_vec, norm, quat_axis_angle, quat_mul, quat_normalize, quat_to_mat, scale, sub, Vec3,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClusterShape {
    /// Gaussian-distributed points in a ball.
    Ball,
    /// Uniform points in an axis-aligned cube of half-size `size`.
    Box,
    /// Points on a horizontal ring of radius `size`.
    Ring,
    /// Points along the x axis over `[-size, size]`.
    Rod,
}

/// A cloud of Gaussians around `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTemplate {
    pub shape: ClusterShape,
    pub center: [f64; 3],
    pub size: f64,
    pub count: usize,
    pub color: [f32; 3],
    /// Mean per-axis standard deviation of the member Gaussians.
    pub gaussian_scale: f64,
}

/// Frequency of sinusoidal translation. Pulse periods are chosen the same
/// way: samples half a second apart never share a phase, so the 2 fps
/// motion score sees every oscillating template move.
pub const OSCILLATION_HZ: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MotionTrack {
    Static,
    /// Rotation about an axis through the world origin.
    Orbit { axis: [f64; 3], degrees_per_second: f64 },
    /// Linear drift, or `speed / ω · sin(ω t)` with `ω = 2π · OSCILLATION_HZ`
    /// along `direction` when sinusoidal (initial speed `speed`).
    Translate {
        direction: [f64; 3],
        speed: f64,
        sinusoidal: bool,
    },
    /// Scale about the part centroid by `1 + amplitude · sin(2π t / period)`.
    PulseScale { amplitude: f64, period: f64 },
    /// Tracks applied left to right.
    Compose(Vec<MotionTrack>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePart {
    pub name: String,
    pub cluster: ClusterTemplate,
    pub motion: MotionTrack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub parts: Vec<ScenePart>,
    /// Seconds.
    pub duration: f64,
    /// Base frame rate.
    pub fps: f32,
    pub seed: u64,
}

/// Content must stay inside this radius (centre distance plus largest scale).
pub const BOUNDING_RADIUS: f64 = 1.0;

impl ClusterTemplate {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<Gaussian<f64>> {
        (0..self.count)
            .map(|i| {
                let offset: Vec3<f64> = match self.shape {
                    ClusterShape::Ball => {
                        let v = [
                            gauss(rng) * 0.5,
                            gauss(rng) * 0.5,
                            gauss(rng) * 0.5,
                        ];
                        let n = norm(v);
                        scale(v, self.size * if n > 1.0 { 1.0 / n } else { 1.0 })
                    }
                    ClusterShape::Box => [
                        rng.random_range(-1.0..1.0) * self.size,
                        rng.random_range(-1.0..1.0) * self.size,
                        rng.random_range(-1.0..1.0) * self.size,
                    ],
                    ClusterShape::Ring => {
                        let a = std::f64::consts::TAU * (i as f64 + rng.random_range(0.0..0.5)) / self.count as f64;
                        [self.size * a.cos(), rng.random_range(-0.02..0.02), self.size * a.sin()]
                    }
                    ClusterShape::Rod => [
                        self.size * (2.0 * (i as f64 + 0.5) / self.count as f64 - 1.0),
                        rng.random_range(-0.02..0.02),
                        rng.random_range(-0.02..0.02),
                    ],
                };
                let s = self.gaussian_scale;
                let jitter = |rng: &mut ChaCha8Rng| {
                    let k: f32 = rng.random_range(-0.12..0.12);
                    k
                };
                let color = [
                    (self.color[0] + jitter(rng)).clamp(0.0, 1.0) as f64,
                    (self.color[1] + jitter(rng)).clamp(0.0, 1.0) as f64,
                    (self.color[2] + jitter(rng)).clamp(0.0, 1.0) as f64,
                ];
                Gaussian {
                    center: add(self.center, offset),
                    scale: [
                        s * rng.random_range(0.6..1.4),
                        s * rng.random_range(0.6..1.4),
                        s * rng.random_range(0.6..1.4),
                    ],
                    rotation: quat_normalize([
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ]),
                    opacity: rng.random_range(0.6..0.95),
                    color,
                }
            })
            .collect()
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

impl MotionTrack {
    fn apply(&self, gs: &mut [Gaussian<f64>], t: f64) {
        match self {
            MotionTrack::Static => {}
            MotionTrack::Orbit {
                axis,
                degrees_per_second,
            } => {
                let q = quat_axis_angle(*axis, (degrees_per_second * t).to_radians());
                let r = quat_to_mat(q);
                for g in gs.iter_mut() {
                    g.center = mat_vec(&r, g.center);
                    g.rotation = quat_normalize(quat_mul(q, g.rotation));
                }
            }
            MotionTrack::Translate {
                direction,
                speed,
                sinusoidal,
            } => {
                let d = crate::math::normalize(*direction);
                let dist = if *sinusoidal {
                    let w = std::f64::consts::TAU * OSCILLATION_HZ;
                    speed / w * (w * t).sin()
                } else {
                    speed * t
                };
                for g in gs.iter_mut() {
                    g.center = add(g.center, scale(d, dist));
                }
            }
            MotionTrack::PulseScale { amplitude, period } => {
                let m = 1.0 + amplitude * (std::f64::consts::TAU * t / period).sin();
                let n = gs.len().max(1) as f64;
                let centroid = gs.iter().fold([0.0; 3], |acc, g| add(acc, scale(g.center, 1.0 / n)));
                for g in gs.iter_mut() {
                    g.center = add(centroid, scale(sub(g.center, centroid), m));
                    g.scale = scale(g.scale, m);
                }
            }
            MotionTrack::Compose(tracks) => {
                for tr in tracks {
                    tr.apply(gs, t);
                }
            }
        }
    }
}

impl SceneSpec {
    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps as f64).round() as usize
    }

    pub fn total_gaussians(&self) -> usize {
        self.parts.iter().map(|p| p.cluster.count).sum()
    }

    /// Base (time-zero) Gaussians of every part, deterministic in the seed.
    pub fn base_gaussians(&self) -> Vec<Vec<Gaussian<f64>>> {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1)));
                p.cluster.sample(&mut rng)
            })
            .collect()
    }

    /// Scene state at time `t` seconds.
    pub fn evaluate(&self, base: &[Vec<Gaussian<f64>>], t: f64) -> Result<Vec<Gaussian<f64>>> {
        let mut out = Vec::with_capacity(self.total_gaussians());
        for (part, gs) in self.parts.iter().zip(base) {
            let mut gs = gs.clone();
            part.motion.apply(&mut gs, t);
            for g in &gs {
                let r = norm(g.center) + g.scale.iter().cloned().fold(0.0, f64::max);
                if !(r <= BOUNDING_RADIUS) {
                    return Err(Error::OutOfBounds {
                        part: part.name.clone(),
                        time: t,
                        radius: r,
                    });
                }
            }
            out.extend(gs);
        }
        Ok(out)
    }
}

/// Evaluates every part's track at each frame time.
pub fn generate_scene(spec: &SceneSpec) -> Result<GaussianSequence> {
    if spec.parts.is_empty() {
        return Err(Error::invalid("scene has no parts"));
    }
    if !(spec.fps > 0.0) || !(spec.duration > 0.0) {
        return Err(Error::invalid("scene duration and fps must be positive"));
    }
    let base = spec.base_gaussians();
    let frames = (0..spec.frame_count())
        .map(|k| {
            let t = k as f64 / spec.fps as f64;
            let gs = spec.evaluate(&base, t)?;
            // Colours of member Gaussians are clamped at construction.
            let gs = gs.iter().map(|g| g.cast::<f32>()).collect();
            Ok(GaussianFrame::new(k as u32, gs))
        })
        .collect::<Result<Vec<_>>>()?;
    GaussianSequence::new(spec.fps, frames)
}

/// Number of built-in scene templates.
pub const TEMPLATE_COUNT: usize = 12;

pub const TEMPLATE_NAMES: [&str; TEMPLATE_COUNT] = [
    "orbiting_dumbbell",
    "pulsing_blob",
    "translating_box",
    "spinning_ring",
    "bobbing_pair",
    "swinging_rod",
    "satellite",
    "pulsing_orbit_box",
    "tumbling_box",
    "carousel",
    "wobbling_blob",
    "static_pair",
];

fn palette(rng: &mut ChaCha8Rng) -> [f32; 3] {
    let h: f32 = rng.random_range(0.0..6.0);
    let x = 1.0 - ((h % 2.0) - 1.0).abs();
    let (r, g, b) = match h as usize {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    let lift = 0.15;
    [lift + (1.0 - lift) * r * 0.85, lift + (1.0 - lift) * g * 0.85, lift + (1.0 - lift) * b * 0.85]
}

impl SceneSpec {
    /// One of the [`TEMPLATE_COUNT`] parametric scenes; geometry, colours and
    /// speeds are drawn from `seed`.
    pub fn template(index: usize, seed: u64, duration: f64, fps: f32) -> SceneSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(index as u64));
        let cl = |shape, center: [f64; 3], size: f64, count: usize, gscale: f64, rng: &mut ChaCha8Rng| ClusterTemplate {
            shape,
            center,
            size,
            count,
            color: palette(rng),
            gaussian_scale: gscale,
        };
        let speed = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
            let s: f64 = rng.random_range(lo..hi);
            if rng.random_bool(0.5) { s } else { -s }
        };
        let y = [0.0, 1.0, 0.0];
        let part = |name: &str, cluster, motion| ScenePart {
            name: name.to_string(),
            cluster,
            motion,
        };
        let parts = match index % TEMPLATE_COUNT {
            0 => {
                let w = speed(&mut rng, 60.0, 120.0);
                let orbit = MotionTrack::Orbit { axis: y, degrees_per_second: w };
                vec![
                    part("left", cl(ClusterShape::Ball, [-0.4, 0.0, 0.0], 0.16, 40, 0.05, &mut rng), orbit.clone()),
                    part("right", cl(ClusterShape::Ball, [0.4, 0.0, 0.0], 0.16, 40, 0.05, &mut rng), orbit.clone()),
                    part("bar", cl(ClusterShape::Rod, [0.0, 0.0, 0.0], 0.3, 16, 0.03, &mut rng), orbit),
                ]
            }
            1 => vec![part(
                "blob",
                cl(ClusterShape::Ball, [0.0, 0.0, 0.0], 0.3, 90, 0.07, &mut rng),
                MotionTrack::PulseScale { amplitude: rng.random_range(0.2..0.35), period: 1.25 },
            )],
            2 => vec![part(
                "box",
                cl(ClusterShape::Box, [0.0, 0.0, 0.0], 0.2, 80, 0.05, &mut rng),
                MotionTrack::Translate { direction: [1.0, 0.0, rng.random_range(-0.3..0.3)], speed: rng.random_range(1.5..2.5), sinusoidal: true },
            )],
            3 => vec![part(
                "ring",
                cl(ClusterShape::Ring, [0.0, 0.0, 0.0], 0.45, 48, 0.05, &mut rng),
                MotionTrack::Orbit { axis: [1.0, 0.0, 0.0], degrees_per_second: speed(&mut rng, 40.0, 90.0) },
            )],
            4 => {
                let s = rng.random_range(1.5..2.5);
                vec![
                    part("upper", cl(ClusterShape::Ball, [-0.3, 0.0, 0.0], 0.18, 45, 0.05, &mut rng),
                        MotionTrack::Translate { direction: y, speed: s, sinusoidal: true }),
                    part("lower", cl(ClusterShape::Ball, [0.3, 0.0, 0.0], 0.18, 45, 0.05, &mut rng),
                        MotionTrack::Translate { direction: [0.0, -1.0, 0.0], speed: s, sinusoidal: true }),
                ]
            }
            5 => vec![part(
                "rod",
                cl(ClusterShape::Rod, [0.0, 0.0, 0.0], 0.6, 40, 0.045, &mut rng),
                MotionTrack::Orbit { axis: [0.0, 0.0, 1.0], degrees_per_second: speed(&mut rng, 50.0, 100.0) },
            )],
            6 => vec![
                part("planet", cl(ClusterShape::Ball, [0.0, 0.0, 0.0], 0.22, 60, 0.06, &mut rng), MotionTrack::Static),
                part("moon", cl(ClusterShape::Ball, [0.55, 0.1, 0.0], 0.1, 25, 0.04, &mut rng),
                    MotionTrack::Orbit { axis: y, degrees_per_second: speed(&mut rng, 90.0, 150.0) }),
            ],
            7 => vec![part(
                "box",
                cl(ClusterShape::Box, [0.35, 0.0, 0.0], 0.15, 60, 0.045, &mut rng),
                MotionTrack::Compose(vec![
                    MotionTrack::PulseScale { amplitude: 0.25, period: 1.25 },
                    MotionTrack::Orbit { axis: y, degrees_per_second: speed(&mut rng, 60.0, 110.0) },
                ]),
            )],
            8 => vec![part(
                "box",
                cl(ClusterShape::Box, [0.0, 0.15, 0.0], 0.22, 80, 0.05, &mut rng),
                MotionTrack::Orbit { axis: [1.0, 0.0, 0.2], degrees_per_second: speed(&mut rng, 60.0, 120.0) },
            )],
            9 => {
                let w = speed(&mut rng, 70.0, 130.0);
                (0..3)
                    .map(|k| {
                        let a = std::f64::consts::TAU * k as f64 / 3.0;
                        part(
                            &format!("rider{k}"),
                            cl(ClusterShape::Ball, [0.45 * a.cos(), 0.0, 0.45 * a.sin()], 0.12, 30, 0.045, &mut rng),
                            MotionTrack::Orbit { axis: y, degrees_per_second: w },
                        )
                    })
                    .collect()
            }
            10 => vec![part(
                "blob",
                cl(ClusterShape::Ball, [0.0, 0.0, 0.0], 0.25, 80, 0.06, &mut rng),
                MotionTrack::Compose(vec![
                    MotionTrack::PulseScale { amplitude: 0.2, period: 0.625 },
                    MotionTrack::Translate { direction: [0.3, 1.0, 0.0], speed: rng.random_range(1.2..2.0), sinusoidal: true },
                ]),
            )],
            _ => vec![
                part("left", cl(ClusterShape::Ball, [-0.3, 0.0, 0.0], 0.2, 45, 0.06, &mut rng), MotionTrack::Static),
                part("right", cl(ClusterShape::Box, [0.3, 0.0, 0.1], 0.15, 45, 0.05, &mut rng), MotionTrack::Static),
            ],
        };
        SceneSpec {
            parts,
            duration,
            fps,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rot_y;

    fn single(motion: MotionTrack, count: usize) -> SceneSpec {
        SceneSpec {
            parts: vec![ScenePart {
                name: "p".into(),
                cluster: ClusterTemplate {
                    shape: ClusterShape::Ball,
                    center: [0.3, 0.1, -0.2],
                    size: 0.2,
                    count,
                    color: [0.8, 0.3, 0.2],
                    gaussian_scale: 0.05,
                },
                motion,
            }],
            duration: 1.0,
            fps: 4.0,
            seed: 11,
        }
    }

    #[test]
    fn static_track_gives_identical_frames() {
        let seq = generate_scene(&single(MotionTrack::Static, 20)).unwrap();
        assert_eq!(seq.len(), 4);
        for f in &seq.frames[1..] {
            assert_eq!(f.gaussians, seq.frames[0].gaussians);
        }
    }

    #[test]
    fn orbit_matches_rotation_matrix_oracle() {
        let spec = single(MotionTrack::Orbit { axis: [0.0, 1.0, 0.0], degrees_per_second: 90.0 }, 10);
        let seq = generate_scene(&spec).unwrap();
        let base = &spec.base_gaussians()[0];
        for (k, angle) in [0.0f64, 22.5, 45.0, 67.5].iter().enumerate() {
            let r = rot_y(angle.to_radians());
            for (g, b) in seq.frames[k].gaussians.iter().zip(base) {
                let want = mat_vec(&r, b.center);
                for i in 0..3 {
                    assert!((g.center[i] as f64 - want[i]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SceneSpec::template(3, 99, 1.0, 8.0);
        assert_eq!(generate_scene(&spec).unwrap(), generate_scene(&spec).unwrap());
        let other = SceneSpec::template(3, 100, 1.0, 8.0);
        assert_ne!(generate_scene(&spec).unwrap(), generate_scene(&other).unwrap());
    }

    #[test]
    fn out_of_bounds_names_part() {
        let spec = single(
            MotionTrack::Translate { direction: [1.0, 0.0, 0.0], speed: 3.0, sinusoidal: false },
            5,
        );
        match generate_scene(&spec) {
            Err(Error::OutOfBounds { part, .. }) => assert_eq!(part, "p"),
            other => panic!("expected bounds error, got {other:?}"),
        }
    }

    #[test]
    fn all_templates_stay_in_bounds() {
        for k in 0..TEMPLATE_COUNT {
            for seed in 0..6 {
                let spec = SceneSpec::template(k, seed, 2.0, 24.0);
                let seq = generate_scene(&spec).unwrap_or_else(|e| panic!("template {k} seed {seed}: {e}"));
                assert_eq!(seq.len(), 48);
                for f in &seq.frames {
                    for g in &f.gaussians {
                        g.validate().unwrap();
                    }
                }
            }
        }
    }
}
