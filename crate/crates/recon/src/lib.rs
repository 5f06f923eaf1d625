//! Training and inference on top of the reconstruction network: batch
//! sampling with grid distortion, Adam with warmup + cosine decay, the
//! pretrain / 4D / interpolation stages, chunked autoregressive
//! reconstruction, azimuth alignment and 3x frame-rate interpolation.

pub mod grid;
pub mod pipeline;
pub mod train;

pub use train::{pretrain_3d, train_base, train_interp, Hooks, TrainConfig, TrainLog, Trained};
