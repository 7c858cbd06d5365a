//! The six reproduced experiments.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use crasim::dynamics::{
    atom_rng, bob_oscillation_experiment, hold_recapture, release_recapture, rms_drift_time, sample_thermal, HarmonicTrap,
    OscillationConfig, Scaled,
};
use crasim::fitting::{
    background_sensitivity, dominant_frequency, fit_damped_sine, fit_exponential, fit_temperature, linear_regression,
    temperature_chi2_profile, Background, DampedSineGuess, TemperatureGrid,
};
use crasim::optics::{
    angular_spectrum_step, find_spots, make_tweezer_mask, propagate_to_focus, pupil_field, write_potential, write_slice_csv,
    write_volume, FocalWindow, PhaseMask, SliceAxis,
};
use crasim::populations::{
    collapse_revival, decay_reference_curve, evolve_populations, one_over_e_time, rabi_signal, thermal_occupation,
    transition_frequency, PopulationVector, RabiArrayModel,
};
use crasim::potentials::{characterize, default_ground_polarizability, dipole_potential, TrapCharacterization};
use crasim::{Curve, FitResult, CODATA};
use rand_distr::{Binomial, Distribution, Normal};

use crate::config::ExperimentConfig;
use crate::report::{Check, Outcome};
use crate::setup::{self, mass, UM, US};

pub const SCENARIOS: [&str; 6] = ["bob_profile", "trap_character", "rabi_array", "decay_trapping", "bob_oscillation", "thermometry"];

// Independent random streams drawn from the run seed.
const STREAM_DISORDER: u64 = u64::MAX - 1;
const STREAM_SHOTS: u64 = u64::MAX - 2;

pub fn run_scenario(name: &str, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut o = Outcome::new(name);
    match name {
        "bob_profile" => bob_profile(cfg, out, &mut o)?,
        "trap_character" => trap_character(cfg, out, &mut o)?,
        "rabi_array" => rabi_array(cfg, out, &mut o)?,
        "decay_trapping" => decay_trapping(cfg, out, &mut o)?,
        "bob_oscillation" => bob_oscillation(cfg, out, &mut o)?,
        "thermometry" => thermometry(cfg, out, &mut o)?,
        _ => bail!("unknown scenario '{name}' (known: {})", SCENARIOS.join(", ")),
    }
    Ok(o)
}

fn emit(out: &Path, o: &mut Outcome, name: &str, schema: &str, contents: &str) -> Result<()> {
    fs::write(out.join(name), contents).with_context(|| format!("writing {name}"))?;
    o.file(name, schema);
    Ok(())
}

fn emit_curve(out: &Path, o: &mut Outcome, name: &str, what: &str, curve: &Curve) -> Result<()> {
    emit(out, o, name, &format!("{} ({what})", Curve::CSV_HEADER), &curve.to_csv())
}

/// Relative power of each site: `1 + δ` with `δ ~ N(0, disorder)`.
pub fn power_factors(cfg: &ExperimentConfig, n: usize) -> Result<Vec<f64>> {
    let sigma = cfg.powers.bob_power_disorder;
    if sigma == 0.0 {
        return Ok(vec![1.0; n]);
    }
    let normal = Normal::new(1.0, sigma)?;
    let mut rng = atom_rng(cfg.seed, STREAM_DISORDER);
    Ok((0..n).map(|_| normal.sample(&mut rng).max(0.0)).collect())
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}

fn bob_profile(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let opt = setup::optimize(cfg, cfg.powers.bob_mw)?;
    o.value("optimal_ratio", opt.ratio, "");
    o.value("search_depth", CODATA.joules_to_microkelvin(opt.depth), "uK");
    let b = setup::bob(cfg, opt.ratio, &setup::volume_spec(cfg, cfg.powers.bob_mw))?;
    let grid = &b.volume.grid;

    write_volume(&out.join("bob_volume.grid"), &b.volume)?;
    o.file("bob_volume.grid", "intensity volume, W/m^2");
    write_potential(&out.join("bob_potential.grid"), &b.potential)?;
    o.file("bob_potential.grid", "ponderomotive potential, J");

    let center_idx = grid.nearest(&b.trap.center).context("trap center outside the volume")?;
    write_slice_csv(&out.join("bob_slice_xz.csv"), grid, SliceAxis::Y, center_idx[1])?;
    o.file("bob_slice_xz.csv", "x,y,z,intensity (m, W/m^2; plane through the trap center)");
    write_slice_csv(&out.join("bob_slice_xy.csv"), grid, SliceAxis::Z, center_idx[2])?;
    o.file("bob_slice_xy.csv", "x,y,z,intensity (m, W/m^2; focal plane through the trap center)");

    let axial = b.volume.axial_profile(b.trap.center[0], b.trap.center[1]).context("axis outside the volume")?;
    let mut s = String::from("z_um,intensity\n");
    for (z, v) in grid.axis(2).iter().zip(&axial) {
        let _ = writeln!(s, "{:.4},{:e}", z / UM, v);
    }
    emit(out, o, "bob_axial.csv", "z_um,intensity (W/m^2 along the beam axis)", &s)?;
    let chars = format!("{}\n{}\n", TrapCharacterization::<f64>::CSV_HEADER, b.trap.csv_row(0));
    emit(out, o, "bob_trap.csv", TrapCharacterization::<f64>::CSV_HEADER, &chars)?;

    let dark = grid.get(center_idx[0], center_idx[1], center_idx[2]) / grid.max_value();
    let depth = b.trap.depth_microkelvin();
    o.value("dark_ratio", dark, "");
    o.value("depth", depth, "uK");
    for (k, nu) in b.trap.frequencies.iter().enumerate() {
        o.value(&format!("nu_{}", ["x", "y", "z"][k]), nu / 1e3, "kHz");
    }
    o.check(Check::below("center/shell intensity", dark, 0.02));
    o.check(Check::within("depth_uK", depth, 50.0, 90.0));
    o.check(Check::below("shell open", f64::from(u8::from(b.trap.open)), 0.5));

    // free-space step of the pupil field: power must be conserved
    let pupil = setup::bob_pupil(cfg);
    let field = pupil_field(&pupil, &PhaseMask::zeros(pupil.grid_size), cfg.powers.bob_mw * 1e-3, None)?;
    let stepped = angular_spectrum_step(&field, 1e-3, pupil.wavelength)?;
    let drift = ((stepped.power() - field.power()) / field.power()).abs();
    o.value("propagation_power_drift", drift, "");
    o.check(Check::below("propagation power drift", drift, 1e-9));
    Ok(())
}

fn trap_character(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    // one tweezer from the hologram pupil, against the Gaussian-beam formula
    let pupil = setup::tweezer_pupil(cfg);
    let single = pupil_field(&pupil, &PhaseMask::zeros(pupil.grid_size), cfg.powers.tweezer_mw * 1e-3, None)?;
    let z: Vec<f64> = (0..41).map(|k| (-6.0 + 0.3 * k as f64) * UM).collect();
    let vol = propagate_to_focus(&single, &pupil, &FocalWindow::square([0.0, 0.0], 0.1 * UM, 49), &z)?;
    let pot = dipole_potential(&vol, default_ground_polarizability())?;
    let tw = characterize(&pot, &[0.0; 3], mass())?;
    let analytic = setup::tweezer(cfg);
    let nu_a = analytic.harmonic_frequencies(mass());
    o.value("tweezer_depth", tw.depth_microkelvin(), "uK");
    o.value("tweezer_depth_gaussian", analytic.depth_microkelvin(), "uK");
    o.value("tweezer_nu_r", tw.frequencies[0] / 1e3, "kHz");
    o.value("tweezer_nu_r_gaussian", nu_a[0] / 1e3, "kHz");
    o.value("tweezer_nu_z", tw.frequencies[2] / 1e3, "kHz");
    o.value("tweezer_nu_z_gaussian", nu_a[2] / 1e3, "kHz");
    o.check(Check::near("tweezer depth vs Gaussian beam", tw.depth_microkelvin(), analytic.depth_microkelvin(), 0.1));

    // focal plane of the whole array hologram
    let geom = setup::geometry(cfg);
    let sites = geom.sites();
    let mask = make_tweezer_mask(&pupil, &geom)?;
    let field = pupil_field(&pupil, &mask, cfg.powers.tweezer_mw * 1e-3 * sites.len() as f64, None)?;
    let (cols, rows) = (cfg.array.cols as f64, cfg.array.rows as f64);
    let step = 0.5 * UM;
    let span = |k: f64| (((k + 1.0) * cfg.array.pitch_um * UM / step).ceil() as usize) | 1;
    let window = FocalWindow { center: [0.0, 0.0], spacing: step, shape: [span(cols), span(rows)] };
    let plane = propagate_to_focus(&field, &pupil, &window, &[0.0])?;
    let spots = find_spots(&plane.grid, 0, 0.3)?;
    let mut s = String::from("x_um,y_um,peak\n");
    for p in &spots {
        let _ = writeln!(s, "{:.4},{:.4},{:e}", p.x / UM, p.y / UM, p.peak);
    }
    emit(out, o, "spots.csv", "x_um,y_um,peak (focal-plane maxima of the array hologram, W/m^2)", &s)?;
    let peaks: Vec<f64> = spots.iter().map(|p| p.peak).collect();
    let uniformity = peaks.iter().copied().fold(f64::INFINITY, f64::min) / peaks.iter().copied().fold(0.0, f64::max);
    let placement = sites
        .iter()
        .map(|t| spots.iter().map(|p| (p.x - t[0]).hypot(p.y - t[1])).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    o.value("spot_count", spots.len() as f64, "");
    o.value("spot_uniformity", uniformity, "");
    o.value("spot_placement_error", placement / UM, "um");
    o.check(Check::within("spot count", spots.len() as f64, sites.len() as f64, sites.len() as f64));
    o.check(Check::below("spot placement error (um)", placement / UM, 0.1));

    // bottle beam at the oscillation power, and at four times that power
    let opt = setup::optimize(cfg, cfg.powers.bob_mw)?;
    let b = setup::bob(cfg, opt.ratio, &setup::volume_spec(cfg, cfg.powers.bob_oscillation_mw))?;
    let strong = b.volume.scaled_to_power(4.0 * b.volume.total_power);
    let strong_pot = crasim::potentials::ponderomotive_potential(&strong, strong.wavelength)?;
    let strong_trap = characterize(&strong_pot, &b.trap.center, mass())?;
    let nu = b.trap.frequencies[0] / 1e3;
    let ratio = strong_trap.frequencies[0] / b.trap.frequencies[0];
    o.value("bob_ratio", opt.ratio, "");
    o.value("bob_depth", b.trap.depth_microkelvin(), "uK");
    o.value("bob_nu_x", nu, "kHz");
    o.value("bob_nu_y", b.trap.frequencies[1] / 1e3, "kHz");
    o.value("bob_nu_z", b.trap.frequencies[2] / 1e3, "kHz");
    o.value("bob_nu_4p_ratio", ratio, "");
    o.check(Check::within("bob nu_x (kHz)", nu, 12.6, 19.0));
    o.check(Check::near("nu(4P)/nu(P)", ratio, 2.0, 0.01));

    // one row per site: the single-beam trap scaled by that site's power
    let factors = power_factors(cfg, sites.len())?;
    let mut s = format!("{},power_factor\n", TrapCharacterization::<f64>::CSV_HEADER);
    let mut nus = Vec::with_capacity(sites.len());
    for (i, (site, f)) in sites.iter().zip(&factors).enumerate() {
        let t = TrapCharacterization {
            center: [site[0] + b.trap.center[0], site[1] + b.trap.center[1], site[2] + b.trap.center[2]],
            depth: b.trap.depth * f,
            open: b.trap.open,
            frequencies: b.trap.frequencies.map(|v| v * f.sqrt()),
        };
        nus.push(t.frequencies[0] / 1e3);
        let _ = writeln!(s, "{},{f:.6}", t.csv_row(i));
    }
    emit(out, o, "traps.csv", &format!("{},power_factor (one bottle beam per site)", TrapCharacterization::<f64>::CSV_HEADER), &s)?;
    let (m, sd) = mean_std(&nus);
    o.value("site_nu_x_mean", m, "kHz");
    o.value("site_nu_x_std", sd, "kHz");
    Ok(())
}

fn rabi_array(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let r = &cfg.rabi;
    let geom = setup::geometry(cfg);
    let mut model = RabiArrayModel::from_geometry(&geom);
    let first = model.sites.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
    model.gradient = r.gradient_mhz_per_mm * 1e9;
    model.base = r.base_khz * 1e3;
    model.node_x = first - r.node_offset_um * UM;
    model.damping = vec![r.damping_per_ms * 1e3; model.sites.len()];
    let times: Vec<f64> = setup::span(0.0, r.t_max_us, r.t_step_us).into_iter().map(|t| t * US).collect();
    let signal = rabi_signal(&model, &times)?;

    let mut s = String::from("time_us");
    for i in 0..model.sites.len() {
        let _ = write!(s, ",site_{i}");
    }
    s.push_str(",average\n");
    for (k, t) in times.iter().enumerate() {
        let _ = write!(s, "{:.4}", t / US);
        for site in &signal.per_site {
            let _ = write!(s, ",{:.9}", site[k]);
        }
        let _ = writeln!(s, ",{:.9}", signal.average[k]);
    }
    emit(out, o, "rabi_signal.csv", "time_us,site_0..site_N,average (P52 per site and array mean)", &s)?;

    let detection = setup::detection(cfg);
    let mut s = String::from("time_us,p52,p_recap\n");
    for (t, p) in times.iter().zip(&signal.average) {
        let _ = writeln!(s, "{:.4},{:.9},{:.9}", t / US, p, detection.predict(*p)?);
    }
    emit(out, o, "rabi_detected.csv", "time_us,p52,p_recap (array mean through the detection model)", &s)?;

    // per-site flopping frequencies against position
    let freqs = model.frequencies();
    let mut fitted = Vec::with_capacity(freqs.len());
    let mut s = String::from("site_id,x_um,frequency_model_kHz,frequency_fit_kHz,frequency_sigma_kHz\n");
    for (i, site) in signal.per_site.iter().enumerate() {
        let fit = fit_damped_sine(&Curve::from_xy(times.clone(), site.clone())?, None)?;
        let f = fit.value("frequency");
        let _ = writeln!(
            s,
            "{i},{:.4},{:.6},{:.6},{:.3e}",
            model.sites[i][0] / UM,
            freqs[i] / 1e3,
            f / 1e3,
            fit.sigma("frequency") / 1e3
        );
        fitted.push(f);
    }
    emit(out, o, "rabi_sites.csv", "site_id,x_um,frequency_model_kHz,frequency_fit_kHz,frequency_sigma_kHz", &s)?;
    let xs: Vec<f64> = model.sites.iter().map(|p| p[0]).collect();
    let line = linear_regression(&xs, &fitted, None)?;
    let g = line.slope / 1e9;
    o.value("fitted_gradient", g, "MHz/mm");
    o.check(Check::near("fitted gradient (MHz/mm)", g, r.gradient_mhz_per_mm, 0.05));

    let expected = 1.0 / (model.gradient * cfg.array.pitch_um * UM);
    o.value("revival_expected", expected / US, "us");
    match collapse_revival(&times, &signal.average) {
        Some(cr) => {
            o.value("collapse", cr.collapse / US, "us");
            o.value("revival", cr.revival / US, "us");
            o.value("revival_contrast", cr.revival_contrast, "");
            o.check(Check::near("revival time (us)", cr.revival / US, expected / US, 0.05));
        }
        None => o.check(Check { name: "revival found".into(), value: 0.0, target: "present".into(), pass: false }),
    }
    Ok(())
}

fn decay_trapping(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let (tm, rc, fit) = (&cfg.timing, &cfg.rates, &cfg.fit);
    let model = setup::rate_model(cfg, cfg.temperatures.environment_k)?;
    emit(out, o, "rates.csv", "from,to,rate_per_s (level 0 is the sink)", &model.to_csv())?;
    let lifetime = model.lifetime(rc.level)?;
    let ladder = one_over_e_time(&model, rc.level)?;
    let nbar = thermal_occupation(transition_frequency::<f64>(rc.level), cfg.temperatures.environment_k);
    o.value("lifetime", lifetime / US, "us");
    o.value("ladder_one_over_e", ladder / US, "us");
    o.value("nbar_level", nbar, "");
    o.check(Check::within("lifetime (us)", lifetime / US, 100.0, 165.0));
    let cold = setup::rate_model(cfg, 0.0)?;
    let anchor = rc.anchor_lifetime_ms * 1e-3;
    let anchored = cold.lifetime(rc.anchor_n)?;
    o.value("anchor_lifetime_t0", anchored * 1e3, "ms");
    o.check(Check::within("anchor lifetime at 0 K, |Δ|/τ", ((anchored - anchor) / anchor).abs(), 0.0, 0.0));

    // lifetime-limited reference
    let detection = setup::detection(cfg);
    let eta = detection.efficiency();
    let (tau_min, te) = (tm.tau_min_us * US, tm.transfer_us * US);
    let taus: Vec<f64> = setup::span(tm.tau_min_us, tm.decay_tau_max_ms * 1e3, tm.decay_tau_step_us).into_iter().map(|t| t * US).collect();
    let reference = decay_reference_curve(&model, rc.level, &taus, tau_min, te, eta)?;
    emit_curve(out, o, "decay_reference.csv", "tau s, eta * P52", &reference)?;

    // P(τ)/P(τ_min): one evolution from the start against two chained ones
    let i = model.index(rc.level)?;
    let p0 = PopulationVector::pure(&model, rc.level)?;
    let at_min = evolve_populations(&model, &p0, &[tau_min - 2.0 * te])?.remove(0);
    let later: Vec<f64> = taus.iter().map(|t| t - tau_min).collect();
    let chained = evolve_populations(&model, &at_min, &later)?;
    let factorization = reference
        .y
        .iter()
        .zip(&chained)
        .map(|(r, c)| (r / reference.y[0] - c.probabilities[i] / at_min.probabilities[i]).abs())
        .fold(0.0, f64::max);
    o.value("factorization_error", factorization, "");
    o.check(Check::below("factorized decay, max |Δ|", factorization, 1e-9));

    // BOBs off: free flight from the tweezer
    let radius = cfg.powers.tweezer_waist_um * UM;
    let mut curves = Vec::new();
    for (label, t_uk) in [("hot", cfg.temperatures.hot_uk), ("cold", cfg.temperatures.cold_uk)] {
        let spec = setup::thermal(cfg, t_uk);
        let rr = release_recapture(&setup::release_config(cfg, false), &spec, cfg.seed)?;
        emit_curve(out, o, &format!("release_{label}.csv"), "off time s, recapture probability", &rr)?;
        let atoms = sample_thermal(&spec, cfg.dynamics.release_atoms, cfg.seed)?;
        let drift = rms_drift_time(&atoms, &spec.center, radius)?;
        o.value(&format!("rms_drift_{label}"), drift / US, "us");
        curves.push(drift / US);
    }
    o.check(Check::near("rms drift at hot temperature (us)", curves[0], 10.0, 0.4));
    o.check(Check::near("rms drift at cold temperature (us)", curves[1], 19.0, 0.4));

    // BOBs on: the Rydberg atom held in the bottle beam
    let holds: Vec<f64> = setup::span(0.0, fit.trapping_fit_start_ms * 1e3, tm.decay_tau_step_us).into_iter().map(|t| t * US).collect();
    let held = if cfg.dynamics.bobs_enabled {
        let opt = setup::optimize(cfg, cfg.powers.bob_mw)?;
        let b = setup::bob(cfg, opt.ratio, &setup::volume_spec(cfg, cfg.powers.bob_mw))?;
        let fastest = b.trap.frequencies.iter().copied().fold(0.0, f64::max);
        let spec = setup::thermal(cfg, cfg.temperatures.cold_uk);
        hold_recapture(&b.potential, &setup::tweezer(cfg), &spec, &holds, cfg.dynamics.atoms, setup::time_step(cfg, fastest), cfg.seed)?
    } else {
        let zeros = vec![0.0; holds.len()];
        Curve::new(holds.clone(), zeros.clone(), zeros, vec![cfg.dynamics.atoms; holds.len()])?
    };
    emit_curve(out, o, "hold_survival.csv", "hold time s, fraction kept by the bottle beam", &held)?;
    let flat = held.y.iter().copied().fold(f64::INFINITY, f64::min);
    o.value("hold_survival_min", flat, "");
    if !cfg.dynamics.bobs_enabled {
        return Ok(());
    }
    o.check(Check::above("survival over the first hold window", flat, 0.95));

    // synthetic trapping-time measurement
    let tau_c = fit.trap_loss_time_ms * 1e-3;
    let onset = fit.trap_loss_onset_ms * 1e-3;
    let kept = held.y[held.len() - 1];
    let survival = |t: f64| kept * (-(t - onset).max(0.0) / tau_c).exp();
    let binom_rng = &mut atom_rng(cfg.seed, STREAM_SHOTS);
    let shots = fit.shots;
    let mut measured = Vec::with_capacity(taus.len());
    for (t, r) in taus.iter().zip(&reference.y) {
        let p = (r * survival(*t) + detection.background).clamp(0.0, 1.0);
        let k = Binomial::new(shots as u64, p)?.sample(binom_rng);
        measured.push(k as f64 / shots as f64);
    }
    let mut s = String::from("tau_ms,p_recap,reference\n");
    for ((t, m), r) in taus.iter().zip(&measured).zip(&reference.y) {
        let _ = writeln!(s, "{:.4},{:.9},{:.9}", t * 1e3, m, r);
    }
    emit(out, o, "decay_measured.csv", "tau_ms,p_recap,reference (simulated detection and its lifetime reference)", &s)?;

    let start = fit.trapping_fit_start_ms * 1e-3;
    let trapping = |b: f64| -> crasim::Result<Curve> {
        let (mut x, mut y, mut e) = (Vec::new(), Vec::new(), Vec::new());
        for ((t, m), r) in taus.iter().zip(&measured).zip(&reference.y) {
            if *t < start {
                continue;
            }
            let err = (m.max(1.0 / shots as f64) * (1.0 - m) / shots as f64).sqrt();
            x.push(*t);
            y.push((m - b) / r);
            e.push(err / r);
        }
        let n = x.len();
        Curve::new(x, y, e, vec![shots; n])
    };
    let nominal = trapping(detection.background)?;
    emit_curve(out, o, "trapping_survival.csv", "tau s, Pn = (P_recap - B) / reference", &nominal)?;
    let trap_fit = fit_exponential(&nominal, Background::Fixed(0.0))?;
    let found = trap_fit.value("decay_time");
    o.value("trapping_time", found * 1e3, "ms");
    o.check(Check::near("trapping time (ms)", found * 1e3, tau_c * 1e3, 0.3));
    o.fit("trapping_time", trap_fit);
    let sens = background_sensitivity(trapping, detection.background, fit.background_shift, Background::Fixed(0.0))?;
    o.value("background_shift_decay_time", sens.shifted_decay_time * 1e3, "ms");
    o.value("background_relative_shift", sens.relative_shift, "");
    o.check(Check::above("|relative shift| under background perturbation", sens.relative_shift.abs(), 0.2));
    Ok(())
}

fn bob_oscillation(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let (tm, d) = (&cfg.timing, &cfg.dynamics);
    let opt = setup::optimize(cfg, cfg.powers.bob_mw)?;
    let b = setup::bob(cfg, opt.ratio, &setup::volume_spec(cfg, cfg.powers.bob_oscillation_mw))?;
    let axis = setup::axis(cfg);
    let a = axis.iter().position(|&v| v == 1.0).unwrap_or(0);
    let nu = b.trap.frequencies[a];
    o.value("trap_nu", nu / 1e3, "kHz");

    let tweezer = setup::tweezer(cfg);
    let spec = setup::thermal(cfg, cfg.temperatures.cold_uk);
    let fastest = b.trap.frequencies.iter().copied().fold(0.0, f64::max);
    let osc = OscillationConfig {
        bob_offset: axis.map(|v| v * d.bob_offset_nm * 1e-9),
        off_window: tm.off_window_us * US,
        delays: setup::span(tm.delay_start_us, tm.delay_stop_us, tm.delay_step_us).into_iter().map(|t| t * US).collect(),
        total: tm.oscillation_tau_us * US,
        atoms: d.atoms,
        dt: setup::time_step(cfg, fastest * 1.1),
        recoil: setup::kick(cfg),
    };
    let n_sites = cfg.array.rows * cfg.array.cols;
    let factors = power_factors(cfg, n_sites)?;

    // every site shares the atoms' random numbers; only its power differs
    let mut site_curves = Vec::with_capacity(n_sites);
    let mut surrogate_curves = Vec::with_capacity(n_sites);
    for f in &factors {
        let field = Scaled { inner: &b.potential, factor: *f };
        site_curves.push(bob_oscillation_experiment(&osc, &field, &tweezer, &spec, cfg.seed)?);
        let harmonic = HarmonicTrap::from_frequencies(b.trap.frequencies.map(|v| v * f.sqrt()), mass(), b.trap.center)
            .with_depth(b.trap.depth * f);
        surrogate_curves.push(bob_oscillation_experiment(&osc, &harmonic, &tweezer, &spec, cfg.seed)?);
    }
    let average = average_curve(&site_curves)?;
    emit_curve(out, o, "oscillation_average.csv", "switch-off delay s, array-mean recapture probability", &average)?;
    let mut s = String::from("delay_us");
    for i in 0..n_sites {
        let _ = write!(s, ",site_{i}");
    }
    s.push('\n');
    for k in 0..average.len() {
        let _ = write!(s, "{:.4}", average.x[k] / US);
        for c in &site_curves {
            let _ = write!(s, ",{:.6}", c.y[k]);
        }
        s.push('\n');
    }
    emit(out, o, "oscillation_sites.csv", "delay_us,site_0..site_N (recapture probability per site)", &s)?;

    let peak = dominant_frequency(&average).map_or(0.0, |p| p.0);
    o.value("average_peak", peak / 1e3, "kHz");
    o.check(Check::near("dominant peak / 2 nu", peak / (2.0 * nu), 1.0, 0.05));
    let avg_fit = fit_damped_sine(&average, None)?;
    let (fits, table) = site_fits(&site_curves, &factors, nu, &avg_fit)?;
    o.fit("oscillation_average", avg_fit);
    emit(out, o, "oscillation_fits.csv", SITE_SCHEMA, &table)?;
    let (m, sd) = mean_std(&fits);
    o.value("site_nu_mean", m / 1e3, "kHz");
    o.value("site_nu_std", sd / 1e3, "kHz");

    // harmonic stand-in at the characterized frequencies and depth
    let sur_avg = average_curve(&surrogate_curves)?;
    emit_curve(out, o, "surrogate_average.csv", "switch-off delay s, array-mean recapture probability (harmonic traps)", &sur_avg)?;
    let sur_peak = dominant_frequency(&sur_avg).map_or(0.0, |p| p.0);
    o.value("surrogate_peak", sur_peak / 1e3, "kHz");
    o.check(Check::near("harmonic dominant peak / 2 nu", sur_peak / (2.0 * nu), 1.0, 0.05));
    let sur_fit = fit_damped_sine(&sur_avg, None)?;
    let (sur_fits, table) = site_fits(&surrogate_curves, &factors, nu, &sur_fit)?;
    o.fit("surrogate_average", sur_fit);
    emit(out, o, "surrogate_fits.csv", SITE_SCHEMA, &table)?;
    let (m, sd) = mean_std(&sur_fits);
    let configured: Vec<f64> = factors.iter().map(|f| nu * f.sqrt()).collect();
    let (cm, csd) = mean_std(&configured);
    o.value("surrogate_nu_mean", m / 1e3, "kHz");
    o.value("surrogate_nu_std", sd / 1e3, "kHz");
    o.value("configured_nu_std", csd / 1e3, "kHz");
    o.check(Check::near("harmonic site mean nu (kHz)", m / 1e3, cm / 1e3, 0.03));
    let spread = if csd > 0.0 { sd / csd } else { 1.0 };
    o.value("surrogate_std_ratio", spread, "");
    o.check(Check::within("harmonic site std / disorder std", spread, 0.5, 2.0));
    Ok(())
}

const SITE_SCHEMA: &str = "site_id,power_factor,nu_expected_kHz,nu_fit_kHz,nu_fit_sigma_kHz (fitted oscillation frequency / 2)";

/// Per-site fits started from the fit of the array mean.
fn site_fits(curves: &[Curve], factors: &[f64], nu: f64, mean: &FitResult) -> Result<(Vec<f64>, String)> {
    let guess = DampedSineGuess {
        offset: mean.value("offset"),
        amplitude: mean.value("amplitude"),
        decay_rate: mean.value("decay_rate"),
        frequency: mean.value("frequency"),
        phase: mean.value("phase"),
    };
    let mut s = String::from("site_id,power_factor,nu_expected_kHz,nu_fit_kHz,nu_fit_sigma_kHz\n");
    let mut out = Vec::with_capacity(curves.len());
    for (i, (c, f)) in curves.iter().zip(factors).enumerate() {
        let fit = fit_damped_sine(c, Some(&guess))?;
        let v = fit.value("frequency") / 2.0;
        let _ = writeln!(s, "{i},{f:.6},{:.4},{:.4},{:.4}", nu * f.sqrt() / 1e3, v / 1e3, fit.sigma("frequency") / 2e3);
        out.push(v);
    }
    Ok((out, s))
}

fn average_curve(curves: &[Curve]) -> Result<Curve> {
    let n = curves.len() as f64;
    let first = &curves[0];
    let y = (0..first.len()).map(|k| curves.iter().map(|c| c.y[k]).sum::<f64>() / n).collect();
    let e = (0..first.len())
        .map(|k| curves.iter().map(|c| c.stderr[k].powi(2)).sum::<f64>().sqrt() / n)
        .collect();
    let samples = (0..first.len()).map(|k| curves.iter().map(|c| c.n_samples[k]).sum()).collect();
    Ok(Curve::new(first.x.clone(), y, e, samples)?)
}

fn thermometry(cfg: &ExperimentConfig, out: &Path, o: &mut Outcome) -> Result<()> {
    let f = &cfg.fit;
    let t_true = cfg.temperatures.thermometry_uk;
    let rr = setup::release_config(cfg, false);
    let measured = release_recapture(&rr, &setup::thermal(cfg, t_true), cfg.seed)?;
    emit_curve(out, o, "release_measured.csv", "off time s, recapture probability", &measured)?;
    let grid = TemperatureGrid { min: f.temperature_min_uk * 1e-6, max: f.temperature_max_uk * 1e-6, points: f.temperature_points };
    let model_seed = cfg.seed.wrapping_add(1);
    let (temps, chi2) = temperature_chi2_profile(&measured, &rr, &grid, mass(), model_seed)?;
    let mut s = String::from("temperature_uK,chi2\n");
    for (t, c) in temps.iter().zip(&chi2) {
        let _ = writeln!(s, "{:.4},{:.6e}", t * 1e6, c);
    }
    emit(out, o, "chi2_profile.csv", "temperature_uK,chi2 (Monte Carlo model against the measured curve)", &s)?;
    let fitted = fit_temperature(&measured, &rr, &grid, mass(), model_seed)?;
    let t_fit = fitted.value("temperature") * 1e6;
    o.value("temperature", t_fit, "uK");
    o.check(Check::within("fitted temperature (uK)", t_fit, t_true - 1.0, t_true + 1.0));
    o.fit("temperature", fitted);

    // the same atoms given the excitation kick, read back with the kick-free model
    if cfg.dynamics.kick_mm_per_s > 0.0 {
        let kicked = release_recapture(&setup::release_config(cfg, true), &setup::thermal(cfg, t_true), cfg.seed)?;
        emit_curve(out, o, "release_kicked.csv", "off time s, recapture probability after the kick", &kicked)?;
        let apparent = fit_temperature(&kicked, &rr, &grid, mass(), model_seed)?;
        o.value("kicked_apparent_temperature", apparent.value("temperature") * 1e6, "uK");
        o.fit("kicked_apparent_temperature", apparent);
    }

    let thermal_speed = (CODATA.boltzmann * cfg.temperatures.cold_uk * 1e-6 / mass()).sqrt();
    let recoil = cfg.dynamics.kick_mm_per_s * 1e-3 / thermal_speed;
    o.value("kick_over_thermal_speed", recoil, "");
    o.check(Check::within("kick / sqrt(kT/m)", recoil, 0.22, 0.24));
    Ok(())
}
