//! Feed-forward reconstruction network: an asymmetric U-Net over the
//! `(T, V)` multiview grid with cross-view and temporal self-attention,
//! decoding one Gaussian per output pixel and view.
//!
//! Everything is hand-written (NHWC tensors, im2col convolutions, explicit
//! backward passes) and generic over `f32` / `f64` so gradients can be
//! checked against central differences in double precision.

pub mod checkpoint;
pub mod config;
pub mod decode;
pub mod gradcheck;
pub mod layers;
pub mod params;
pub mod rearrange;
pub mod tensor;
pub mod unet;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use config::ModelConfig;
pub use decode::{decode_gaussians, DecodeConfig};
pub use params::{Layout, ModelParams};
pub use tensor::Tensor;
pub use unet::{extend_temporal, is_temporal_param, ForwardCache, Model};
