//! Builds core objects from a configuration.

use anyhow::Result;
use crasim::dynamics::{GaussianTweezer, RecoilKick, ReleaseRecaptureConfig, ThermalSpec};
use crasim::optics::{bob_volume, optimize_bob_ratio, ArrayGeometry, BobMaskParams, BobRatioOptimum, BobVolumeSpec, PupilSpec};
use crasim::populations::{build_rate_model, DetectionModel, RateModel, SpontaneousAnchor};
use crasim::potentials::{characterize, default_ground_polarizability, ponderomotive_potential, TrapCharacterization, TrapPotential};
use crasim::{Volume, CODATA};

use crate::config::ExperimentConfig;

pub const UM: f64 = 1e-6;
pub const US: f64 = 1e-6;

pub fn mass() -> f64 {
    CODATA.rb87_mass
}

pub fn bob_pupil(cfg: &ExperimentConfig) -> PupilSpec<f64> {
    let p = &cfg.pupil;
    PupilSpec {
        grid_size: p.bob_grid,
        physical_extent: p.slm_extent_mm * 1e-3,
        wavelength: p.wavelength_nm * 1e-9,
        focal_length: p.focal_length_mm * 1e-3,
        input_waist: p.bob_input_waist_mm * 1e-3,
        efficiency: p.efficiency,
    }
}

/// Illumination sized so the focused spot has the configured waist.
pub fn tweezer_pupil(cfg: &ExperimentConfig) -> PupilSpec<f64> {
    let p = &cfg.pupil;
    let (lambda, f) = (p.wavelength_nm * 1e-9, p.focal_length_mm * 1e-3);
    PupilSpec {
        grid_size: p.tweezer_grid,
        physical_extent: p.slm_extent_mm * 1e-3,
        wavelength: lambda,
        focal_length: f,
        input_waist: f * lambda / (std::f64::consts::PI * cfg.powers.tweezer_waist_um * UM),
        efficiency: p.efficiency,
    }
}

pub fn geometry(cfg: &ExperimentConfig) -> ArrayGeometry<f64> {
    ArrayGeometry::new(cfg.array.rows, cfg.array.cols, cfg.array.pitch_um * UM)
}

pub fn volume_spec(cfg: &ExperimentConfig, power_mw: f64) -> BobVolumeSpec<f64> {
    let b = &cfg.bob;
    BobVolumeSpec {
        power: power_mw * 1e-3,
        half_width: b.half_width_um * UM,
        transverse_spacing: b.transverse_step_um * UM,
        half_length: b.half_length_um * UM,
        axial_spacing: b.axial_step_um * UM,
    }
}

pub fn search_spec(cfg: &ExperimentConfig, power_mw: f64) -> BobVolumeSpec<f64> {
    let b = &cfg.bob;
    BobVolumeSpec {
        power: power_mw * 1e-3,
        half_width: b.search_half_width_um * UM,
        transverse_spacing: b.transverse_step_um * UM,
        half_length: b.search_half_length_um * UM,
        axial_spacing: b.search_axial_step_um * UM,
    }
}

pub fn optimize(cfg: &ExperimentConfig, power_mw: f64) -> Result<BobRatioOptimum<f64>> {
    let pupil = bob_pupil(cfg);
    Ok(optimize_bob_ratio(&pupil, [cfg.bob.ratio_min, cfg.bob.ratio_max], &search_spec(cfg, power_mw))?)
}

/// Bottle beam at `ratio` sampled on `spec`, its potential and its
/// characterization.
pub struct Bob {
    pub volume: Volume,
    pub potential: TrapPotential<f64>,
    pub trap: TrapCharacterization<f64>,
}

pub fn bob(cfg: &ExperimentConfig, ratio: f64, spec: &BobVolumeSpec<f64>) -> Result<Bob> {
    let pupil = bob_pupil(cfg);
    let params = BobMaskParams::with_ratio(&pupil, ratio);
    let volume = bob_volume(&pupil, &params, spec)?;
    let potential = ponderomotive_potential(&volume, pupil.wavelength)?;
    let trap = characterize(&potential, &[0.0; 3], mass())?;
    Ok(Bob { volume, potential, trap })
}

pub fn tweezer(cfg: &ExperimentConfig) -> GaussianTweezer<f64> {
    GaussianTweezer::from_power(
        cfg.powers.tweezer_mw * 1e-3,
        cfg.powers.tweezer_waist_um * UM,
        cfg.pupil.wavelength_nm * 1e-9,
        default_ground_polarizability(),
    )
}

/// Atoms at `temperature_uk` in the harmonic bottom of the tweezer.
pub fn thermal(cfg: &ExperimentConfig, temperature_uk: f64) -> ThermalSpec<f64> {
    let t = tweezer(cfg);
    ThermalSpec { temperature: temperature_uk * 1e-6, frequencies: t.harmonic_frequencies(mass()), center: t.center, mass: mass() }
}

pub fn axis(cfg: &ExperimentConfig) -> [f64; 3] {
    match cfg.dynamics.kick_axis.as_str() {
        "y" => [0.0, 1.0, 0.0],
        "z" => [0.0, 0.0, 1.0],
        _ => [1.0, 0.0, 0.0],
    }
}

pub fn kick(cfg: &ExperimentConfig) -> Option<RecoilKick<f64>> {
    (cfg.dynamics.kick_mm_per_s > 0.0).then(|| RecoilKick { speed: cfg.dynamics.kick_mm_per_s * 1e-3, direction: axis(cfg), time: 0.0 })
}

/// `n` evenly spaced values from `start` to at most `stop`.
pub fn span(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|k| start + k as f64 * step).collect()
}

pub fn release_config(cfg: &ExperimentConfig, kicked: bool) -> ReleaseRecaptureConfig<f64> {
    let t = &cfg.timing;
    ReleaseRecaptureConfig {
        off_times: span(0.0, t.release_max_us, t.release_step_us).into_iter().map(|v| v * US).collect(),
        tweezer: tweezer(cfg),
        atoms_per_point: cfg.dynamics.release_atoms,
        recoil: if kicked { kick(cfg) } else { None },
        gravity: cfg.dynamics.gravity.then_some([0.0, 0.0, -9.80665]),
    }
}

/// Integration step for a trap whose fastest frequency is `nu_max`.
pub fn time_step(cfg: &ExperimentConfig, nu_max: f64) -> f64 {
    1.0 / (cfg.dynamics.steps_per_period * nu_max)
}

pub fn rate_model(cfg: &ExperimentConfig, temperature: f64) -> Result<RateModel<f64>> {
    let r = &cfg.rates;
    Ok(build_rate_model(
        (r.n_min, r.n_max),
        temperature,
        SpontaneousAnchor { n: r.anchor_n, lifetime: r.anchor_lifetime_ms * 1e-3 },
        r.leak_rate_per_s,
    )?)
}

pub fn detection(cfg: &ExperimentConfig) -> DetectionModel<f64> {
    let d = &cfg.detection;
    DetectionModel { fill: d.fill, preparation: d.preparation, purity: d.purity, optical: d.optical, background: d.background }
}
