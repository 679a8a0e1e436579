use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsubgrad::experiment::{self, ExperimentConfig, RunOptions, RunStatus, OUT_DIR_ENV};
use dsubgrad::validation::Status;
use dsubgrad::Error;

#[derive(Parser)]
#[command(version, about = "Distributed projected subgradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every assumption for a config file.
    Validate { path: PathBuf },
    /// Run a config file and write its artifacts.
    Run {
        path: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the bundled presets.
    Presets,
    /// Run a bundled preset.
    RunPreset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(clap::Args)]
struct Overrides {
    /// Output root; artifacts go to <DIR>/<name>/.
    #[arg(long, value_name = "DIR", env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rounds: Option<usize>,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)
}

fn run(cfg: ExperimentConfig, o: Overrides) -> ExitCode {
    let opts = RunOptions {
        out_root: o.out,
        seed: o.seed,
        rounds: o.rounds,
    };
    match experiment::run_experiment(&cfg, &opts) {
        Ok(out) => {
            let s = &out.trace.summary;
            println!("{}: {}", cfg.name, out.status);
            println!("  consensus diameter {:.3e}", s.final_consensus_diameter);
            if let Some(g) = s.projected_objective_gap {
                println!("  objective gap      {g:.3e}");
            }
            println!("  artifacts in {}", out.dir.display());
            match out.status {
                RunStatus::Success | RunStatus::ExpectedFailureConfirmed => ExitCode::SUCCESS,
                RunStatus::ThresholdFailure => ExitCode::from(3),
            }
        }
        Err(e @ (Error::Validation(_) | Error::Config(_))) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("run aborted: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { path } => {
            let report = match load(&path) {
                Ok(cfg) => experiment::validate_config(&cfg),
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(1);
                }
            };
            for c in &report.checks {
                let tag = match c.status {
                    Status::Pass => "ok  ",
                    Status::Fail => "FAIL",
                    Status::Waived => "wvd ",
                    Status::Warn => "warn",
                };
                println!("{tag} {:<26} {}", c.name, c.detail);
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                for v in report.violations() {
                    eprintln!("{v}");
                }
                ExitCode::from(1)
            }
        }
        Command::Run { path, overrides } => match load(&path) {
            Ok(cfg) => run(cfg, overrides),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                ExitCode::from(1)
            }
        },
        Command::Presets => {
            for p in experiment::list_presets() {
                println!("{:<28} {}", p.name, p.description());
            }
            ExitCode::SUCCESS
        }
        Command::RunPreset { name, overrides } => match experiment::preset(&name) {
            Ok(cfg) => run(cfg, overrides),
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        },
    }
}
