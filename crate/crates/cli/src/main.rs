use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod io;

#[derive(Parser)]
#[command(name = "pano", version, about = "Panorama projection, padding, fusion and depth-evaluation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Boundary {
    Clamp,
    Padded,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PadMode {
    Circular,
    Cube,
    Spherical,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Module {
    Concat,
    Biproj,
    Cee,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LutKind {
    C2e,
    E2c,
    Tangent,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBase {
    #[value(name = "10")]
    Ten,
    #[value(name = "e")]
    E,
}

#[derive(Subcommand)]
enum Command {
    /// Split an equirectangular RGB image into six cube faces.
    E2c {
        input: PathBuf,
        outdir: PathBuf,
        /// Face side in pixels; defaults to half the image height.
        #[arg(long)]
        face_size: Option<usize>,
    },
    /// Reassemble six cube faces into an equirectangular image.
    C2e {
        /// A directory holding B.png .. U.png, or six face images in B,D,F,L,R,U order.
        #[arg(required = true, num_args = 1..=6)]
        faces: Vec<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        /// Output height; defaults to twice the face side.
        #[arg(long)]
        height: Option<usize>,
        #[arg(long, value_enum, default_value = "padded")]
        boundary: Boundary,
    },
    /// Compare a predicted depth map against ground truth.
    Eval {
        pred: PathBuf,
        gt: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        min_depth: f64,
        #[arg(long, default_value_t = 10.0)]
        max_depth: f64,
        /// Rows dropped from both the top and the bottom.
        #[arg(long, default_value_t = 0)]
        crop: usize,
        #[arg(long, value_enum, default_value = "10")]
        log_base: LogBase,
        /// Meters per raw unit for 16-bit PNG inputs.
        #[arg(long, default_value_t = 1.0 / 4000.0)]
        scale: f64,
    },
    /// Pad an ERP tensor `[C,H,W]` or a cube tensor `[6,C,r,r]`.
    Pad {
        input: PathBuf,
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: PadMode,
        #[arg(long = "pad", short)]
        pad: usize,
    },
    /// Run one seeded skip-connection fusion stage and summarize the output.
    FuseDemo {
        #[arg(long, value_enum)]
        module: Module,
        #[arg(long, default_value_t = 64)]
        channels: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print a human-readable summary before the key=value lines.
        #[arg(long)]
        report: bool,
    },
    /// Export a precomputed sampling grid as a tensor container.
    Lut {
        #[arg(long = "type", value_enum)]
        kind: LutKind,
        #[arg(long, default_value_t = 512)]
        height: usize,
        /// Face side for c2e/e2c grids; defaults to half the height.
        #[arg(long)]
        face_size: Option<usize>,
        /// Kernel size for tangent grids.
        #[arg(long, default_value_t = 3)]
        kernel: usize,
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::E2c { input, outdir, face_size } => commands::e2c(&input, &outdir, face_size),
        Command::C2e { faces, out, height, boundary } => commands::c2e(&faces, &out, height, boundary),
        Command::Eval { pred, gt, min_depth, max_depth, crop, log_base, scale } => {
            commands::eval(&pred, &gt, min_depth, max_depth, crop, log_base, scale)
        }
        Command::Pad { input, out, mode, pad } => commands::pad(&input, &out, mode, pad),
        Command::FuseDemo { module, channels, height, seed, report } => {
            commands::fuse_demo(module, channels, height, seed, report)
        }
        Command::Lut { kind, height, face_size, kernel, out } => commands::lut(kind, height, face_size, kernel, &out),
    }
}
