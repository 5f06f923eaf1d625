//! Core of the gauss4d toolkit: per-frame 3D Gaussian sets, the camera
//! conventions every other crate relies on, a differentiable tile-based
//! splat rasterizer with a brute-force oracle, procedural 4D scenes, the
//! reconstruction losses and evaluation metrics.
//!
//! Coordinate convention: right-handed world, `+y` up, azimuth measured about
//! `+y` starting from the `+z` axis. Cameras use x-right / y-down / z-forward
//! in camera space and sample rays through pixel centres.

pub mod camera;
pub mod error;
pub mod eval;
pub mod gaussian;
pub mod gradcheck;
pub mod image;
pub mod io;
pub mod losses;
pub mod math;
pub mod par;
pub mod plucker;
pub mod render;
pub mod synth;

pub use camera::{make_camera, Camera, CameraPose, CameraRig};
pub use error::{Error, Result};
pub use gaussian::{Gaussian, GaussianFrame, GaussianSequence};
pub use image::{Image, ImageGrid};
pub use math::Real;
pub use render::{RenderConfig, RenderGradients};
