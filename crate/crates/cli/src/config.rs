//! Run configuration: a TOML file with one table per concern and explicit
//! units in every key name. Unknown keys are errors; missing keys take the
//! defaults below.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: String,
    /// Evaluate the pass/fail checks of each scenario.
    pub checks: bool,
    pub pupil: PupilSection,
    pub array: ArraySection,
    pub powers: PowerSection,
    pub bob: BobSection,
    pub temperatures: TemperatureSection,
    pub timing: TimingSection,
    pub dynamics: DynamicsSection,
    pub rates: RateSection,
    pub detection: DetectionSection,
    pub rabi: RabiSection,
    pub fit: FitSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: "out".into(),
            checks: true,
            pupil: PupilSection::default(),
            array: ArraySection::default(),
            powers: PowerSection::default(),
            bob: BobSection::default(),
            temperatures: TemperatureSection::default(),
            timing: TimingSection::default(),
            dynamics: DynamicsSection::default(),
            rates: RateSection::default(),
            detection: DetectionSection::default(),
            rabi: RabiSection::default(),
            fit: FitSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PupilSection {
    pub tweezer_grid: usize,
    pub bob_grid: usize,
    pub slm_extent_mm: f64,
    pub wavelength_nm: f64,
    pub focal_length_mm: f64,
    pub bob_input_waist_mm: f64,
    pub efficiency: f64,
}

impl Default for PupilSection {
    fn default() -> Self {
        Self {
            tweezer_grid: 1024,
            bob_grid: 256,
            slm_extent_mm: 12.8,
            wavelength_nm: 820.0,
            focal_length_mm: 16.3,
            bob_input_waist_mm: 11.2,
            efficiency: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub rows: usize,
    pub cols: usize,
    pub pitch_um: f64,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self { rows: 3, cols: 6, pitch_um: 15.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    #[serde(rename = "tweezer_mW")]
    pub tweezer_mw: f64,
    pub tweezer_waist_um: f64,
    #[serde(rename = "bob_mW")]
    pub bob_mw: f64,
    /// Per-site BOB power for the oscillation scenario.
    #[serde(rename = "bob_oscillation_mW")]
    pub bob_oscillation_mw: f64,
    /// Relative r.m.s. spread of the per-site BOB power.
    pub bob_power_disorder: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        Self { tweezer_mw: 2.6, tweezer_waist_um: 1.2, bob_mw: 20.0, bob_oscillation_mw: 19.9, bob_power_disorder: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BobSection {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub half_width_um: f64,
    pub transverse_step_um: f64,
    pub half_length_um: f64,
    pub axial_step_um: f64,
    /// Smaller volume used while searching for the best ratio and for dynamics.
    pub search_half_width_um: f64,
    pub search_half_length_um: f64,
    pub search_axial_step_um: f64,
}

impl Default for BobSection {
    fn default() -> Self {
        Self {
            ratio_min: 0.6,
            ratio_max: 0.8,
            half_width_um: 3.0,
            transverse_step_um: 0.1,
            half_length_um: 15.0,
            axial_step_um: 0.25,
            search_half_width_um: 2.0,
            search_half_length_um: 8.0,
            search_axial_step_um: 0.4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemperatureSection {
    /// Atoms loaded after adiabatic cooling.
    #[serde(rename = "cold_uK")]
    pub cold_uk: f64,
    /// Atoms without adiabatic cooling.
    #[serde(rename = "hot_uK")]
    pub hot_uk: f64,
    #[serde(rename = "thermometry_uK")]
    pub thermometry_uk: f64,
    #[serde(rename = "environment_K")]
    pub environment_k: f64,
}

impl Default for TemperatureSection {
    fn default() -> Self {
        Self { cold_uk: 7.0, hot_uk: 23.0, thermometry_uk: 6.6, environment_k: 300.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingSection {
    pub transfer_us: f64,
    pub tau_min_us: f64,
    pub off_window_us: f64,
    pub oscillation_tau_us: f64,
    pub delay_start_us: f64,
    pub delay_stop_us: f64,
    pub delay_step_us: f64,
    pub decay_tau_max_ms: f64,
    pub decay_tau_step_us: f64,
    pub release_max_us: f64,
    pub release_step_us: f64,
}

impl Default for TimingSection {
    fn default() -> Self {
        Self {
            transfer_us: 15.0,
            tau_min_us: 32.0,
            off_window_us: 15.0,
            oscillation_tau_us: 210.0,
            delay_start_us: 20.0,
            delay_stop_us: 190.0,
            delay_step_us: 2.0,
            decay_tau_max_ms: 5.0,
            decay_tau_step_us: 100.0,
            release_max_us: 150.0,
            release_step_us: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub atoms: usize,
    pub release_atoms: usize,
    /// Integration steps per period of the fastest trap frequency.
    pub steps_per_period: f64,
    pub bob_offset_nm: f64,
    pub kick_mm_per_s: f64,
    /// "x", "y" or "z".
    pub kick_axis: String,
    pub gravity: bool,
    pub bobs_enabled: bool,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            atoms: 1000,
            release_atoms: 4000,
            steps_per_period: 100.0,
            bob_offset_nm: 300.0,
            kick_mm_per_s: 6.0,
            kick_axis: "x".into(),
            gravity: false,
            bobs_enabled: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateSection {
    pub n_min: u32,
    pub n_max: u32,
    pub level: u32,
    pub anchor_n: u32,
    pub anchor_lifetime_ms: f64,
    pub leak_rate_per_s: f64,
}

impl Default for RateSection {
    fn default() -> Self {
        Self { n_min: 40, n_max: 64, level: 52, anchor_n: 50, anchor_lifetime_ms: 30.0, leak_rate_per_s: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    pub fill: f64,
    pub preparation: f64,
    pub purity: f64,
    pub optical: f64,
    pub background: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let d = crasim::populations::DetectionModel::<f64>::default();
        Self { fill: d.fill, preparation: d.preparation, purity: d.purity, optical: d.optical, background: d.background }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiSection {
    #[serde(rename = "gradient_MHz_per_mm")]
    pub gradient_mhz_per_mm: f64,
    #[serde(rename = "base_kHz")]
    pub base_khz: f64,
    /// Distance of the field node before the first column.
    pub node_offset_um: f64,
    pub damping_per_ms: f64,
    pub t_max_us: f64,
    pub t_step_us: f64,
}

impl Default for RabiSection {
    fn default() -> Self {
        Self { gradient_mhz_per_mm: 1.18, base_khz: 0.0, node_offset_um: 15.0, damping_per_ms: 0.0, t_max_us: 150.0, t_step_us: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    #[serde(rename = "temperature_min_uK")]
    pub temperature_min_uk: f64,
    #[serde(rename = "temperature_max_uK")]
    pub temperature_max_uk: f64,
    pub temperature_points: usize,
    /// Trapping-time fit uses τ at or beyond this.
    pub trapping_fit_start_ms: f64,
    /// Trap loss applied on top of the simulated dynamics.
    pub trap_loss_time_ms: f64,
    pub trap_loss_onset_ms: f64,
    pub background_shift: f64,
    /// Repetitions per point for synthetic measured curves.
    pub shots: usize,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            temperature_min_uk: 1.0,
            temperature_max_uk: 15.0,
            temperature_points: 29,
            trapping_fit_start_ms: 1.0,
            trap_loss_time_ms: 5.0,
            trap_loss_onset_ms: 1.0,
            background_shift: 3e-4,
            shots: 1000,
        }
    }
}

/// One problem in a configuration file.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    /// 1-based line of the offending key, when known.
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Line of `key` inside `[section]` (or at top level when `section` is empty).
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(source, s.start));
            ConfigError {
                diagnostics: vec![Diagnostic { line, key: "config".into(), message: e.message().trim().to_string() }],
            }
        })?;
        let problems = cfg.problems();
        if problems.is_empty() {
            return Ok(cfg);
        }
        Err(ConfigError {
            diagnostics: problems
                .into_iter()
                .map(|(path, message)| {
                    let (section, key) = path.rsplit_once('.').unwrap_or(("", path.as_str()));
                    Diagnostic { line: locate(source, section, key), key: path.clone(), message }
                })
                .collect(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
            diagnostics: vec![Diagnostic { line: None, key: path.display().to_string(), message: e.to_string() }],
        })?;
        Self::parse(&source)
    }

    /// Fully resolved configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Semantic checks; each entry is `(section.key, message)`.
    pub fn problems(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut positive = |key: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                out.push((key.to_string(), format!("must be positive, got {v}")));
            }
        };
        let p = &self.pupil;
        positive("pupil.slm_extent_mm", p.slm_extent_mm);
        positive("pupil.wavelength_nm", p.wavelength_nm);
        positive("pupil.focal_length_mm", p.focal_length_mm);
        positive("pupil.bob_input_waist_mm", p.bob_input_waist_mm);
        positive("pupil.efficiency", p.efficiency);
        positive("array.pitch_um", self.array.pitch_um);
        let w = &self.powers;
        positive("powers.tweezer_mW", w.tweezer_mw);
        positive("powers.tweezer_waist_um", w.tweezer_waist_um);
        positive("powers.bob_mW", w.bob_mw);
        positive("powers.bob_oscillation_mW", w.bob_oscillation_mw);
        let b = &self.bob;
        positive("bob.ratio_min", b.ratio_min);
        positive("bob.ratio_max", b.ratio_max);
        positive("bob.half_width_um", b.half_width_um);
        positive("bob.transverse_step_um", b.transverse_step_um);
        positive("bob.half_length_um", b.half_length_um);
        positive("bob.axial_step_um", b.axial_step_um);
        positive("bob.search_half_width_um", b.search_half_width_um);
        positive("bob.search_half_length_um", b.search_half_length_um);
        positive("bob.search_axial_step_um", b.search_axial_step_um);
        let t = &self.temperatures;
        positive("temperatures.cold_uK", t.cold_uk);
        positive("temperatures.hot_uK", t.hot_uk);
        positive("temperatures.thermometry_uK", t.thermometry_uk);
        let s = &self.timing;
        positive("timing.transfer_us", s.transfer_us);
        positive("timing.tau_min_us", s.tau_min_us);
        positive("timing.off_window_us", s.off_window_us);
        positive("timing.oscillation_tau_us", s.oscillation_tau_us);
        positive("timing.delay_stop_us", s.delay_stop_us);
        positive("timing.delay_step_us", s.delay_step_us);
        positive("timing.decay_tau_max_ms", s.decay_tau_max_ms);
        positive("timing.decay_tau_step_us", s.decay_tau_step_us);
        positive("timing.release_max_us", s.release_max_us);
        positive("timing.release_step_us", s.release_step_us);
        let d = &self.dynamics;
        positive("dynamics.steps_per_period", d.steps_per_period);
        positive("dynamics.bob_offset_nm", d.bob_offset_nm);
        let r = &self.rates;
        positive("rates.anchor_lifetime_ms", r.anchor_lifetime_ms);
        let f = &self.fit;
        positive("fit.temperature_max_uK", f.temperature_max_uk);
        positive("fit.trapping_fit_start_ms", f.trapping_fit_start_ms);
        positive("fit.trap_loss_time_ms", f.trap_loss_time_ms);
        positive("rabi.t_max_us", self.rabi.t_max_us);
        positive("rabi.t_step_us", self.rabi.t_step_us);

        let mut non_negative = |key: &str, v: f64| {
            if !(v >= 0.0 && v.is_finite()) {
                out.push((key.to_string(), format!("must be non-negative, got {v}")));
            }
        };
        non_negative("powers.bob_power_disorder", w.bob_power_disorder);
        non_negative("temperatures.environment_K", t.environment_k);
        non_negative("timing.delay_start_us", s.delay_start_us);
        non_negative("dynamics.kick_mm_per_s", d.kick_mm_per_s);
        non_negative("rates.leak_rate_per_s", r.leak_rate_per_s);
        non_negative("rabi.base_kHz", self.rabi.base_khz);
        non_negative("rabi.damping_per_ms", self.rabi.damping_per_ms);
        non_negative("rabi.node_offset_um", self.rabi.node_offset_um);
        non_negative("fit.temperature_min_uK", f.temperature_min_uk);
        non_negative("fit.trap_loss_onset_ms", f.trap_loss_onset_ms);
        non_negative("fit.background_shift", f.background_shift);

        let mut fraction = |key: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) {
                out.push((key.to_string(), format!("must lie in [0, 1], got {v}")));
            }
        };
        fraction("pupil.efficiency", p.efficiency);
        fraction("detection.fill", self.detection.fill);
        fraction("detection.preparation", self.detection.preparation);
        fraction("detection.purity", self.detection.purity);
        fraction("detection.optical", self.detection.optical);
        fraction("detection.background", self.detection.background);

        let mut count = |key: &str, v: usize, min: usize| {
            if v < min {
                out.push((key.to_string(), format!("must be at least {min}, got {v}")));
            }
        };
        count("array.rows", self.array.rows, 1);
        count("array.cols", self.array.cols, 1);
        count("dynamics.atoms", d.atoms, 1);
        count("dynamics.release_atoms", d.release_atoms, 1);
        count("fit.temperature_points", f.temperature_points, 3);
        count("fit.shots", f.shots, 1);
        for (key, n) in [("pupil.tweezer_grid", p.tweezer_grid), ("pupil.bob_grid", p.bob_grid)] {
            if n < 64 || !n.is_power_of_two() {
                out.push((key.into(), format!("must be a power of two ≥ 64, got {n}")));
            }
        }

        if b.ratio_min >= b.ratio_max || b.ratio_max >= 1.0 {
            out.push(("bob.ratio_max".into(), "need ratio_min < ratio_max < 1".into()));
        }
        if s.delay_start_us >= s.delay_stop_us {
            out.push(("timing.delay_stop_us".into(), "must exceed delay_start_us".into()));
        }
        if s.delay_stop_us + s.off_window_us > s.oscillation_tau_us {
            out.push(("timing.oscillation_tau_us".into(), "must cover the last delay plus the off window".into()));
        }
        if s.tau_min_us < 2.0 * s.transfer_us {
            out.push(("timing.tau_min_us".into(), "must be at least twice transfer_us".into()));
        }
        if f.temperature_min_uk >= f.temperature_max_uk {
            out.push(("fit.temperature_max_uK".into(), "must exceed temperature_min_uK".into()));
        }
        if !["x", "y", "z"].contains(&d.kick_axis.as_str()) {
            out.push(("dynamics.kick_axis".into(), format!("must be \"x\", \"y\" or \"z\", got \"{}\"", d.kick_axis)));
        }
        if r.n_min > 48 || r.n_max < 56 || r.n_min < 3 {
            out.push(("rates.n_min".into(), "level range must contain 48..=56".into()));
        }
        if r.level <= r.n_min || r.level >= r.n_max {
            out.push(("rates.level".into(), "prepared level must lie inside the range".into()));
        }
        if r.anchor_n < 2 {
            out.push(("rates.anchor_n".into(), "must be at least 2".into()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&c.echo()).unwrap(), c);
    }

    #[test]
    fn negative_power_names_the_key_and_line() {
        let err = ExperimentConfig::parse("seed = 3\n\n[powers]\nbob_mW = -1.0\n").unwrap_err();
        assert_eq!(err.diagnostics.len(), 1);
        assert_eq!(err.diagnostics[0].key, "powers.bob_mW");
        assert_eq!(err.diagnostics[0].line, Some(4));
    }

    #[test]
    fn unknown_key_is_rejected_with_its_line() {
        let err = ExperimentConfig::parse("[timing]\ntransfer_us = 15.0\nbogus = 1\n").unwrap_err();
        assert_eq!(err.diagnostics[0].line, Some(3));
        assert!(err.diagnostics[0].message.contains("bogus"), "{}", err);
    }

    #[test]
    fn wrong_type_is_rejected() {
        assert!(ExperimentConfig::parse("[array]\nrows = \"three\"\n").is_err());
    }
}
