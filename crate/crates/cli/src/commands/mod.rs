pub mod recon;
pub mod synth;
pub mod train;
