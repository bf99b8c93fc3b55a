//! `smdamp`: run shear-flow experiments with the damped Smagorinsky model.
//!
//! Exit status: 0 on success, 1 when a verification check, a sweep point or
//! the run itself fails, 2 when the configuration is invalid.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smdamp_core::{run_experiment, Error, ExperimentConfig, InitialCondition, Mode};

#[derive(Parser, Debug)]
#[command(name = "smdamp", version, about = "Damped Smagorinsky shear-flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one configuration and compare its dissipation with the bounds.
    Run(Common),
    /// Run the Cartesian product of the [sweep] axes.
    Sweep(Common),
    /// Tabulate the dissipation bounds without running the solver.
    Bounds(Common),
    /// Sample damping profiles on [0, L].
    DampingTable(Common),
    /// Run the built-in property checks.
    Verify(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file ([section] headers with key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the perturbed initial condition.
    #[arg(long)]
    seed: Option<u64>,
    /// Force fixed-order reductions.
    #[arg(long)]
    deterministic: bool,
}

fn load(mode: Mode, args: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path).map_err(|e| match e {
            Error::Io(io) => Error::Config { line: 0, reason: format!("cannot read {}: {io}", path.display()) },
            other => other,
        })?,
        None => ExperimentConfig::default(),
    };
    cfg.mode = mode;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if args.deterministic {
        cfg.solver.deterministic_reduction = true;
    }
    if let Some(seed) = args.seed {
        match &mut cfg.solver.initial_condition {
            InitialCondition::Perturbed { seed: s, .. } => *s = seed,
            _ => eprintln!("note: --seed only affects perturbed starts"),
        }
    }
    if mode == Mode::Sweep && cfg.sweep.is_empty() {
        return Err(Error::Config { line: 0, reason: "sweep needs at least one non-empty [sweep] axis".into() });
    }
    // catch bad parameter combinations before any work starts
    let domain = cfg.build_domain()?;
    cfg.build_grid(&domain)?;
    cfg.profile()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Run(a) => (Mode::Run, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Bounds(a) => (Mode::Bounds, a),
        Command::DampingTable(a) => (Mode::DampingTable, a),
        Command::Verify(a) => (Mode::Verify, a),
    };
    let cfg = match load(mode, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(art) => {
            print!("{}", art.summary);
            for f in &art.files {
                println!("wrote {}", f.display());
            }
            if art.failures > 0 {
                ExitCode::from(1)
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
