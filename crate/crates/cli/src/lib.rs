//! Configuration, scenario orchestration and output for `crasim`.

pub mod config;
pub mod report;
pub mod scenarios;
pub mod setup;

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

pub use config::{ConfigError, ExperimentConfig};
pub use report::{Check, Outcome};
pub use scenarios::{run_scenario, SCENARIOS};

/// Runs one scenario and writes `report.txt` and `timings.txt` into `out`.
/// Wall-clock times stay out of the report so that it is reproducible.
pub fn run(name: &str, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let start = Instant::now();
    let outcome = run_scenario(name, cfg, out)?;
    let elapsed = start.elapsed().as_secs_f64();
    std::fs::write(out.join("report.txt"), report::render(cfg, &outcome, cfg.checks)).context("writing report.txt")?;
    std::fs::write(out.join("timings.txt"), format!("{name} {elapsed:.3} s\n")).context("writing timings.txt")?;
    eprintln!("{name}: {elapsed:.2} s");
    Ok(outcome)
}
