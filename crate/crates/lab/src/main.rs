use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jmgt_lab::commands::{execute, Command};
use jmgt_lab::config::{parse_config, Overrides};
use jmgt_lab::LabError;

/// Spectral-Galerkin experiments for the JMGT equation and its Westervelt limit.
#[derive(Parser, Debug)]
#[command(name = "jmgt-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Single run; writes the energy trajectory.
    Simulate(Common),
    /// JMGT vs Westervelt distance over the τ grid.
    SweepTau(Common),
    /// Decay-rate fits over the τ grid plus the Westervelt decay check.
    SweepDecay(Common),
    /// Bisection for the decay/no-decay amplitude threshold.
    Threshold(Common),
    /// Temporal order on a manufactured solution.
    Mms(Common),
    /// Picard (mild solution) vs ETD stepping.
    Picard(Common),
    /// Runs the acceptance suite.
    Selftest(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    /// Any configuration key, e.g. `--set tau_grid.count=4` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn run(cli: Cli) -> Result<(), LabError> {
    let (cmd, common) = match cli.command {
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::SweepTau(c) => (Command::SweepTau, c),
        Cmd::SweepDecay(c) => (Command::SweepDecay, c),
        Cmd::Threshold(c) => (Command::Threshold, c),
        Cmd::Mms(c) => (Command::Mms, c),
        Cmd::Picard(c) => (Command::Picard, c),
        Cmd::Selftest(c) => (Command::Selftest, c),
    };
    let overrides = Overrides {
        dt: common.dt,
        t_end: common.t_end,
        tau: common.tau,
        stride: common.stride,
        set: common.set,
    };
    let (cfg, warnings) = parse_config(common.config.as_deref(), &overrides)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    execute(cmd, &cfg, &common.out_dir)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
