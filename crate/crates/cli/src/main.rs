mod commands;
mod failure;
mod header;
mod video;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::failure::Failure;

/// Feed-forward 4D Gaussian reconstruction on procedural scenes.
#[derive(Parser, Debug)]
#[command(name = "gauss4d", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads for all internal parallelism (default: all cores). 1 runs serially.
    #[arg(long, global = true, env = "GAUSS4D_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthetic dataset generation and motion filtering.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Training stages.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Reconstruct a Gaussian sequence from a static-camera video.
    Reconstruct(commands::recon::ReconstructArgs),
    /// Triple the frame rate of a Gaussian sequence.
    Interpolate(commands::recon::InterpolateArgs),
    /// Render a Gaussian sequence from one camera into a video directory.
    Render(commands::recon::RenderArgs),
    /// Find the 0-elevation azimuth that best explains an image.
    Align(commands::recon::AlignArgs),
    /// Compare two Gaussian sequences over a set of cameras.
    Eval(commands::recon::EvalArgs),
}

#[derive(Subcommand, Debug)]
pub enum SynthCommand {
    /// Generate scenes, multiview renders and the manifest.
    Gen(commands::synth::GenArgs),
    /// Re-apply the motion filter to a manifest in place.
    Filter(commands::synth::FilterArgs),
}

#[derive(Subcommand, Debug)]
pub enum TrainCommand {
    /// Static 3D pretraining (T = 1, no temporal attention).
    #[command(name = "pretrain3d")]
    Pretrain3d(TrainArgs),
    /// 4D training from a pretrain checkpoint.
    Base(TrainArgs),
    /// Interpolation fine-tune from a base checkpoint.
    Interp(TrainArgs),
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    /// Dataset directory written by `synth gen`.
    #[arg(long)]
    pub data: std::path::PathBuf,
    /// Output directory for checkpoints, log and the merged config.
    #[arg(long)]
    pub out: std::path::PathBuf,
    /// `key=value` lines; train keys as-is, model keys prefixed with `model.`.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Initial checkpoint (required for `base` and `interp` unless --random-init).
    #[arg(long)]
    pub init: Option<std::path::PathBuf>,
    /// Override a config key, e.g. `--set lr=5e-4` or `--set model.heads=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Train only the temporal attention layers.
    #[arg(long)]
    pub freeze_backbone: bool,
    /// Drop the temporal attention layers.
    #[arg(long)]
    pub no_temporal: bool,
    /// Start from freshly initialised parameters.
    #[arg(long)]
    pub random_init: bool,
    /// Total optimiser steps (sets epochs = 1).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Number of epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Peak learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Root seed for initialisation and clip/pose sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop once a training step reaches this supervision PSNR (dB).
    #[arg(long)]
    pub stop_at_psnr: Option<f64>,
    /// Print every n-th step record to stderr (0 = never).
    #[arg(long, default_value_t = 10)]
    pub log_every: usize,
}

fn configure_threads(threads: Option<usize>) -> Result<usize, Failure> {
    use gauss4d_core::par::{set_mode, ExecMode};
    let n = match threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    set_mode(if n == 1 { ExecMode::Sequential } else { ExecMode::Parallel });
    Ok(n)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = configure_threads(cli.threads)?;
    let mut header = header::Header::new(threads);
    match cli.command {
        Command::Synth(SynthCommand::Gen(a)) => commands::synth::gen(a, &mut header),
        Command::Synth(SynthCommand::Filter(a)) => commands::synth::filter(a, &mut header),
        Command::Train(TrainCommand::Pretrain3d(a)) => commands::train::run(commands::train::Which::Pretrain3d, a, &mut header),
        Command::Train(TrainCommand::Base(a)) => commands::train::run(commands::train::Which::Base, a, &mut header),
        Command::Train(TrainCommand::Interp(a)) => commands::train::run(commands::train::Which::Interp, a, &mut header),
        Command::Reconstruct(a) => commands::recon::reconstruct(a, &mut header),
        Command::Interpolate(a) => commands::recon::interpolate(a, &mut header),
        Command::Render(a) => commands::recon::render(a, &mut header),
        Command::Align(a) => commands::recon::align(a, &mut header),
        Command::Eval(a) => commands::recon::eval(a, &mut header),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
