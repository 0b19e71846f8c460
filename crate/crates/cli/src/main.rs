//! `multiverse`: Stern-Gerlach splitting and branch counting from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver
//! error, 4 end-to-end self-check failure.

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multiverse_core::branching::Mode;

use crate::config::WeightArg;
use crate::output::Format;

#[derive(Parser)]
#[command(
    name = "multiverse",
    version,
    about = "Stern-Gerlach splitting and weighted branch counting"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalArgs {
    /// key = value config file; command-line flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// output directory [default: .]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// csv, json or both [default: both]
    #[arg(long, global = true)]
    format: Option<Format>,
    /// also write an SVG plot
    #[arg(long, global = true)]
    svg: bool,
    /// seed for sampled histories [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the wavepacket and write the branch trajectories
    Evolve(EvolveArgs),
    /// Count histories by number of plus results
    Branch(BranchArgs),
    /// Compare naive and weighted counting for a spin angle
    Compare(CompareArgs),
    /// Simulate, read off the Born weight and count branches
    #[command(name = "end-to-end")]
    EndToEnd(EndToEndArgs),
}

#[derive(Args, Clone, Default)]
pub struct AngleArgs {
    /// spin angle from the measurement axis, degrees
    #[arg(long = "theta-deg", allow_negative_numbers = true)]
    theta_deg: Option<f64>,
    /// spin angle from the measurement axis, radians
    #[arg(long = "theta-rad", allow_negative_numbers = true)]
    theta_rad: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct SgArgs {
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    coupling: Option<f64>,
    /// uniform field B0
    #[arg(long, allow_negative_numbers = true)]
    field: Option<f64>,
    /// field gradient dB/dy
    #[arg(long, allow_negative_numbers = true)]
    gradient: Option<f64>,
    /// initial packet width
    #[arg(long)]
    sigma0: Option<f64>,
    /// grid length L
    #[arg(long)]
    length: Option<f64>,
    /// grid points (power of two)
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-final")]
    t_final: Option<f64>,
}

#[derive(Args, Clone)]
pub struct EvolveArgs {
    #[command(flatten)]
    angle: AngleArgs,
    #[command(flatten)]
    sg: SgArgs,
    /// interval between recorded rows [default: 0.1]
    #[arg(long = "record-every")]
    record_every: Option<f64>,
}

#[derive(Args, Clone)]
pub struct BranchArgs {
    /// number of runs
    #[arg(long = "N")]
    runs: Option<u32>,
    /// Born weight as a decimal or an exact fraction such as 1/3
    #[arg(long)]
    q: Option<WeightArg>,
    /// naive or weighted [default: weighted]
    #[arg(long)]
    mode: Option<Mode>,
    /// walk all 2^N histories instead of using the closed form (N <= 24)
    #[arg(long)]
    enumerate: bool,
    #[command(flatten)]
    angle: AngleArgs,
}

#[derive(Args, Clone)]
pub struct CompareArgs {
    #[command(flatten)]
    angle: AngleArgs,
    #[arg(long = "N")]
    runs: Option<u32>,
    /// number of sampled histories (0 = none, otherwise at least 100)
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Clone)]
pub struct EndToEndArgs {
    #[command(flatten)]
    angle: AngleArgs,
    #[command(flatten)]
    sg: SgArgs,
    #[arg(long = "N")]
    runs: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
    /// largest accepted |q_numeric - cos^2(theta/2)| [default: 1e-4]
    #[arg(long = "self-check-tolerance")]
    self_check_tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evolve(args) => commands::cmd_evolve(&cli.global, args),
        Command::Branch(args) => commands::cmd_branch(&cli.global, args),
        Command::Compare(args) => commands::cmd_compare(&cli.global, args),
        Command::EndToEnd(args) => commands::cmd_end_to_end(&cli.global, args),
    };
    match result {
        Ok(out) => {
            commands::report_written(&out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
