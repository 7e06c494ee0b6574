use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use infolim_cli::commands::{self, Case, TailOpts};
use infolim_cli::report::{Format, Report};
use infolim_cli::scenario;
use infolim_cli::sweep;

/// Information-theoretic limits for remote inference under channel and
/// compute noise: capacities, task demands, architecture supplies, finite
/// blocklength benchmarks, tail sizing, throughput, and Monte Carlo checks.
#[derive(Parser)]
#[command(name = "infolim", version, propagate_version = true)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Channel and gate capacities plus first-order information supplies
    Capacity { scenario: PathBuf },
    /// Task demand and the distortion it buys back
    Demand {
        scenario: PathBuf,
        /// Override the scenario's distortion target
        #[arg(long)]
        distortion: Option<f64>,
    },
    /// Architecture cuts and the binding supply
    Supply { scenario: PathBuf },
    /// Compute-graph min-cut with its max-flow certificate
    Mincut { scenario: PathBuf },
    /// Word and message outcome split, hash sizing, replica sizing
    Tail {
        scenario: PathBuf,
        /// Duplicate-and-compare replica count
        #[arg(long, default_value_t = 2)]
        replicas: u32,
        /// Message length in bits
        #[arg(long, default_value_t = 64)]
        message_bits: u64,
        /// Word size override (defaults to the primitive's word size)
        #[arg(long)]
        word_bits: Option<u64>,
        /// Undetected-error budget for the whole block
        #[arg(long, default_value_t = 1e-6)]
        tail_budget: f64,
        /// Block length override
        #[arg(long)]
        block_len: Option<u64>,
    },
    /// Normal-approximation feasibility and distortion benchmarks
    Fbl {
        scenario: PathBuf,
        /// Block length override
        #[arg(long)]
        block_len: Option<u64>,
        /// Exit 2 when the target is infeasible
        #[arg(long)]
        strict: bool,
    },
    /// Per-instance budgets and maximum instance rates
    Throughput { scenario: PathBuf },
    /// Monte Carlo run of the scenario's simulation block
    Simulate { scenario: PathBuf },
    /// Demand versus architecture supply at the distortion target
    Feasible {
        scenario: PathBuf,
        /// Exit 2 when the target is infeasible
        #[arg(long)]
        strict: bool,
    },
    /// Rebuild a built-in worked example
    Reproduce {
        #[arg(long, value_enum)]
        case: Case,
    },
    /// Sweep one numeric scenario field and print CSV
    Sweep {
        scenario: PathBuf,
        /// Field to vary: block_len, gate_budget, channel_uses, lambda, or distortion_target
        #[arg(long)]
        axis: String,
        /// Grid: comma list, lo:hi:count, or lo:hi:count:log
        #[arg(long)]
        grid: String,
    },
}

fn report_for(cmd: &Cmd) -> infolim_core::error::Result<(Report, bool)> {
    let load = |p: &PathBuf| scenario::load(p);
    match cmd {
        Cmd::Capacity { scenario } => Ok((commands::capacity(&load(scenario)?)?, false)),
        Cmd::Demand { scenario, distortion } => {
            Ok((commands::demand(&load(scenario)?, *distortion)?, false))
        }
        Cmd::Supply { scenario } => Ok((commands::supply(&load(scenario)?)?, false)),
        Cmd::Mincut { scenario } => Ok((commands::mincut(&load(scenario)?)?, false)),
        Cmd::Tail { scenario, replicas, message_bits, word_bits, tail_budget, block_len } => {
            let opts = TailOpts {
                replicas: *replicas,
                message_bits: *message_bits,
                word_bits: *word_bits,
                tail_budget: *tail_budget,
                block_len: *block_len,
            };
            Ok((commands::tail(&load(scenario)?, &opts)?, false))
        }
        Cmd::Fbl { scenario, block_len, strict } => {
            Ok((commands::fbl(&load(scenario)?, *block_len)?, *strict))
        }
        Cmd::Throughput { scenario } => Ok((commands::throughput(&load(scenario)?)?, false)),
        Cmd::Simulate { scenario } => Ok((commands::simulate(&load(scenario)?)?, false)),
        Cmd::Feasible { scenario, strict } => {
            Ok((commands::feasible(&load(scenario)?)?, *strict))
        }
        Cmd::Reproduce { case } => Ok((commands::reproduce(*case)?, false)),
        Cmd::Sweep { .. } => unreachable!("sweep is handled before report rendering"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };

    if let Cmd::Sweep { scenario, axis, grid } = &cli.cmd {
        let run = scenario::load(scenario)
            .and_then(|l| Ok((sweep::parse_grid(grid)?, l)))
            .and_then(|(g, l)| sweep::run_sweep(&l, axis, &g));
        return match run {
            Ok(csv) => {
                print!("{csv}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }

    match report_for(&cli.cmd) {
        Ok((report, strict)) => {
            print!("{}", report.render(cli.format));
            if strict && report.infeasible {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
