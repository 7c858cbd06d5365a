//! Scenario outcomes and the plain-text run report.

use std::fmt::Write as _;

use crasim::FitResult;

use crate::config::ExperimentConfig;

/// One pass/fail comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, target: format!("[{lo}, {hi}]"), pass: value >= lo && value <= hi }
    }

    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, target: format!("< {limit}"), pass: value < limit }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, target: format!("> {limit}"), pass: value > limit }
    }

    pub fn near(name: &str, value: f64, expected: f64, rel: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: format!("{expected:.6e} ± {}%", rel * 100.0),
            pass: ((value - expected) / expected).abs() <= rel,
        }
    }
}

/// An output file and a description of its columns.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub schema: String,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub scenario: String,
    pub files: Vec<OutputFile>,
    /// Named scalar results with their unit.
    pub values: Vec<(String, f64, String)>,
    pub fits: Vec<(String, FitResult)>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn new(scenario: &str) -> Self {
        Self { scenario: scenario.into(), ..Self::default() }
    }

    pub fn file(&mut self, name: &str, schema: &str) {
        self.files.push(OutputFile { name: name.into(), schema: schema.into() });
    }

    pub fn value(&mut self, name: &str, v: f64, unit: &str) {
        self.values.push((name.into(), v, unit.into()));
    }

    pub fn fit(&mut self, label: &str, fit: FitResult) {
        self.fits.push((label.into(), fit));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.0 == name).map(|v| v.1)
    }
}

/// Deterministic report: the same configuration and seed give the same bytes.
pub fn render(cfg: &ExperimentConfig, outcome: &Outcome, checks_enabled: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# crasim run report");
    let _ = writeln!(s, "scenario = {}", outcome.scenario);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    s.push_str("\n## files\n");
    for f in &outcome.files {
        let _ = writeln!(s, "{}: {}", f.name, f.schema);
    }
    s.push_str("\n## results\n");
    for (name, v, unit) in &outcome.values {
        let _ = writeln!(s, "{name} = {v:.9e} {unit}");
    }
    if !outcome.fits.is_empty() {
        s.push_str("\n## fits\n");
        for (label, fit) in &outcome.fits {
            s.push_str(&fit.to_block(label));
        }
    }
    s.push_str("\n## checks\n");
    if checks_enabled {
        for c in &outcome.checks {
            let _ = writeln!(s, "{} {} = {:.6e} target {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.target);
        }
    } else {
        s.push_str("disabled\n");
    }
    s.push_str("\n## config\n");
    s.push_str(&cfg.echo());
    s
}
