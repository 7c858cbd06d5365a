use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crasim_cli::{run, ConfigError, ExperimentConfig, SCENARIOS};

#[derive(Parser)]
#[command(name = "crasim", version, about = "Circular-Rydberg tweezer array simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its data files and report.
    Run {
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration file and print it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    ListScenarios,
}

fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, ConfigError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for s in SCENARIOS {
                println!("{s}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(Some(&config)) {
            Ok(cfg) => {
                print!("{}", cfg.echo());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprint!("{e}");
                ExitCode::from(2)
            }
        },
        Command::Run { scenario, config, seed, out } => {
            if !SCENARIOS.contains(&scenario.as_str()) {
                eprintln!("unknown scenario '{scenario}' (known: {})", SCENARIOS.join(", "));
                return ExitCode::from(2);
            }
            let mut cfg = match load(config.as_ref()) {
                Ok(c) => c,
                Err(e) => {
                    eprint!("{e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o.to_string_lossy().into_owned();
            }
            let dir = PathBuf::from(&cfg.output_dir);
            match run(&scenario, &cfg, &dir) {
                Ok(outcome) => {
                    for c in &outcome.checks {
                        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
                    }
                    if cfg.checks && !outcome.passed() {
                        ExitCode::from(1)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
