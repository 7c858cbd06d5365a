use super::{AtomSample, ForceField};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Recorded time history of one atom.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub positions: Vec<[T; 3]>,
    pub velocities: Vec<[T; 3]>,
    /// The atom left the force field's domain; the record stops there.
    pub escaped: bool,
}

/// Ballistic motion for `t` seconds, with an optional uniform acceleration.
pub fn free_flight<T: Real>(atom: &mut AtomSample<T>, t: T, gravity: Option<[T; 3]>) {
    let g = gravity.unwrap_or([T::zero(); 3]);
    let half = T::of(0.5) * t * t;
    for a in 0..3 {
        atom.position[a] = atom.position[a] + atom.velocity[a] * t + g[a] * half;
        atom.velocity[a] = atom.velocity[a] + g[a] * t;
    }
}

fn checked<T: Real>(duration: T, dt: T) -> Result<()> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter("time step must be positive".into()));
    }
    if !(duration >= T::zero()) || !duration.is_finite() {
        return Err(Error::InvalidParameter("duration must be non-negative".into()));
    }
    Ok(())
}

/// Velocity-Verlet steps covering exactly `duration`, each at most `dt`.
/// Returns `false` if the atom left the field's domain (its state is then
/// the last one inside).
pub fn evolve<T: Real, F: ForceField<T> + ?Sized>(atom: &mut AtomSample<T>, field: &F, dt: T, duration: T) -> bool {
    if duration <= T::zero() {
        return field.force(&atom.position).is_some();
    }
    let steps = (duration / dt).ceil().to_usize().unwrap_or(1).max(1);
    let h = duration / T::of_usize(steps);
    let half = T::of(0.5) * h / atom.mass;
    let Some(mut f) = field.force(&atom.position) else {
        return false;
    };
    for _ in 0..steps {
        let v = [0, 1, 2].map(|a| atom.velocity[a] + half * f[a]);
        let r = [0, 1, 2].map(|a| atom.position[a] + h * v[a]);
        match field.force(&r) {
            Some(nf) => f = nf,
            None => return false,
        }
        atom.position = r;
        atom.velocity = [0, 1, 2].map(|a| v[a] + half * f[a]);
    }
    true
}

/// Integrates one atom for `duration`, recording every step. Without a field
/// the motion is free flight, evaluated exactly at the same sample times.
pub fn integrate_trajectory<T: Real>(
    atom: &AtomSample<T>,
    field: Option<&dyn ForceField<T>>,
    dt: T,
    duration: T,
) -> Result<Trajectory<T>> {
    checked(duration, dt)?;
    let steps = (duration / dt).ceil().to_usize().unwrap_or(0);
    let h = if steps > 0 { duration / T::of_usize(steps) } else { T::zero() };
    let mut tr = Trajectory {
        times: vec![T::zero()],
        positions: vec![atom.position],
        velocities: vec![atom.velocity],
        escaped: false,
    };
    let mut state = atom.clone();
    for k in 1..=steps {
        let t = h * T::of_usize(k);
        match field {
            None => {
                state = atom.clone();
                free_flight(&mut state, t, None);
            }
            Some(f) => {
                if !evolve(&mut state, f, h, h) {
                    tr.escaped = true;
                    break;
                }
            }
        }
        tr.times.push(t);
        tr.positions.push(state.position);
        tr.velocities.push(state.velocity);
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::HarmonicTrap;

    #[test]
    fn free_flight_is_exact() {
        let a = AtomSample { position: [1e-6, 0.0, -1e-6], velocity: [0.01, -0.02, 0.03], mass: 1.4e-25 };
        let tr = integrate_trajectory(&a, None, 3.3e-6, 100e-6).unwrap();
        for (t, r) in tr.times.iter().zip(&tr.positions) {
            for k in 0..3 {
                assert_eq!(r[k], a.position[k] + a.velocity[k] * t);
            }
        }
    }

    #[test]
    fn harmonic_energy_is_bounded() {
        let m = 1.443e-25;
        let trap = HarmonicTrap::from_frequencies([15.8e3, 12e3, 7e3], m, [0.0; 3]);
        let mut a = AtomSample { position: [300e-9, 100e-9, 0.0], velocity: [0.0, 0.01, 0.02], mass: m };
        let e = |a: &AtomSample<f64>| a.kinetic_energy() + trap.energy(&a.position).unwrap();
        let e0 = e(&a);
        let dt = 1.0 / (100.0 * 15.8e3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            assert!(evolve(&mut a, &trap, dt, 100.0 * dt));
            worst = worst.max((e(&a) - e0).abs() / e0);
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn escape_stops_the_record() {
        let trap = HarmonicTrap::from_frequencies([1e3; 3], 1.0, [0.0; 3]).with_escape_radius(1e-6);
        let a = AtomSample { position: [0.0; 3], velocity: [1.0, 0.0, 0.0], mass: 1.0 };
        let tr = integrate_trajectory(&a, Some(&trap), 1e-7, 1e-3).unwrap();
        assert!(tr.escaped);
        assert!(tr.times.len() < 100);
    }
}
