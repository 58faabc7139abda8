// SPDX-License-Identifier: Apache-2.0

//! `synth`: run, validate and inspect pulse-synthesis experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use clap::{Parser, Subcommand};

use transmon_synth::experiment::{annotate_spectrum, run_experiment, ExperimentConfig};
use transmon_synth::gates::{gate_csv, GateName};
use transmon_synth::optimize::comb_schedule;
use transmon_synth::SynthError;

#[derive(Parser)]
#[command(name = "synth", version, about = "Optimal-control pulse synthesis for transmon-encoded qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every config and write its artifacts.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output root; each experiment writes into its own subdirectory.
        #[arg(long, env = "SYNTH_OUT_DIR", default_value = "synth-out")]
        out: PathBuf,
        /// Experiments run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Parse and check configs without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Print the Stark-shifted resonances of a config's initial drive as CSV.
    Spectrum { config: PathBuf },
    /// Ideal target gates.
    Gates {
        #[command(subcommand)]
        command: GatesCommand,
    },
}

#[derive(Subcommand)]
enum GatesCommand {
    /// Names and dimensions of every gate.
    List,
    /// Matrix of one gate as CSV.
    Show { name: String },
}

/// Exit status of a single experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Reached = 0,
    NotReached = 2,
    Invalid = 1,
}

impl Status {
    fn severity(self) -> u8 {
        match self {
            Status::Reached => 0,
            Status::NotReached => 1,
            Status::Invalid => 2,
        }
    }
}

fn run_one(path: &Path, out: &Path) -> Status {
    let config = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Status::Invalid;
        }
    };
    let dir = out.join(config.output_dir.clone().unwrap_or_else(|| config.name.clone()));
    log::info!("running {} into {}", config.name, dir.display());
    match run_experiment(&config, &dir) {
        Ok(report) => {
            println!(
                "{}: goal {:.4e} (threshold {:.1e}), {} evaluations, {:.1} s -> {}",
                config.name,
                report.final_goal,
                report.threshold,
                report.optimization.evaluations,
                report.wall_time_s,
                if report.reached { "reached" } else { "not reached" }
            );
            if report.reached {
                Status::Reached
            } else {
                Status::NotReached
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            Status::Invalid
        }
    }
}

fn run_all(configs: &[PathBuf], out: &Path, jobs: usize) -> Status {
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(Status::Reached);
    thread::scope(|s| {
        for _ in 0..jobs.clamp(1, configs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = configs.get(i) else { break };
                let status = run_one(path, out);
                let mut w = worst.lock().expect("status lock");
                if status.severity() > w.severity() {
                    *w = status;
                }
            });
        }
    });
    worst.into_inner().expect("status lock")
}

fn validate(configs: &[PathBuf]) -> Status {
    let mut status = Status::Reached;
    for path in configs {
        match ExperimentConfig::load(path) {
            Ok(c) => println!("{}: ok ({} on {} transmon(s))", path.display(), c.target, c.device.transmons.len()),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                status = Status::Invalid;
            }
        }
    }
    status
}

fn spectrum(path: &Path) -> Result<String, SynthError> {
    let config = ExperimentConfig::load(path)?;
    let schedule = match &config.pruning {
        Some(p) => comb_schedule(&config.device_spec()?, p, config.schedule.gate_time.value(), config.schedule.sample_dt)?,
        None => config.initial_schedule()?,
    };
    annotate_spectrum(&config, &schedule)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run { configs, out, jobs } => run_all(&configs, &out, jobs),
        Command::Validate { configs } => validate(&configs),
        Command::Spectrum { config } => match spectrum(&config) {
            Ok(csv) => {
                print!("{csv}");
                Status::Reached
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                Status::Invalid
            }
        },
        Command::Gates { command: GatesCommand::List } => {
            for g in GateName::ALL {
                println!("{g}\t{}x{}", g.dim(), g.dim());
            }
            Status::Reached
        }
        Command::Gates { command: GatesCommand::Show { name } } => match name.parse::<GateName>() {
            Ok(g) => {
                print!("{}", gate_csv(g));
                Status::Reached
            }
            Err(e) => {
                eprintln!("{e}");
                Status::Invalid
            }
        },
    };
    ExitCode::from(status as u8)
}
