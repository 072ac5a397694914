use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod plan;

use plan::{DutyChoice, PartitionChoice};

/// Capacity planning for single-gateway LoRa uplinks.
#[derive(Debug, Parser)]
#[command(name = "lora-maxmin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-SF bit rate, SNR threshold, max range and equal-area range.
    Ranges(Common),
    /// Closed-form per-zone report for a partition and duty plan.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Monte-Carlo estimates alongside the closed form.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Max-min boundary balancing with per-zone duty optimisation.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Write the resulting partition and duties as a plan file.
        #[arg(long, value_name = "PATH")]
        plan_out: Option<PathBuf>,
    },
    /// Fixed-power, 1% duty reference schemes over a finite population.
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
        /// 1: equal-area zones, 2: max-range zones.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        scheme: Option<u8>,
        /// Radial bin width of the throughput profile (m).
        #[arg(long, value_name = "M")]
        bin_width: Option<f64>,
        /// Write the radial throughput profile here.
        #[arg(long, value_name = "PATH")]
        profile_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file; defaults apply to anything it leaves out.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV destination (stdout if absent).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// equal-area, max-range or file:<path>
    #[arg(long)]
    partition: Option<PartitionChoice>,
    /// optimal, fixed:<duty>, sweep:<points> or file:<path>
    #[arg(long)]
    duty: Option<DutyChoice>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
