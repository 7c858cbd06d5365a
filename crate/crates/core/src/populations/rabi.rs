use crate::error::{Error, Result};
use crate::optics::ArrayGeometry;
use crate::scalar::Real;

/// Two-photon Rabi drive across an array in a microwave field gradient.
///
/// Site `i` flops at `Ω_i = 2π (base + gradient · (x_i − node_x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct RabiArrayModel<T> {
    /// Site positions, meters.
    pub sites: Vec<[T; 3]>,
    /// Hz per meter.
    pub gradient: T,
    /// x position of the field node, meters.
    pub node_x: T,
    /// Rabi frequency at the node, hertz.
    pub base: T,
    /// Contrast decay rate per site, s⁻¹.
    pub damping: Vec<T>,
}

impl<T: Real> RabiArrayModel<T> {
    /// Sites of `geometry`, 1.18 MHz/mm, node one pitch before the first
    /// column, zero base frequency and no damping.
    pub fn from_geometry(geometry: &ArrayGeometry<T>) -> Self {
        let sites = geometry.sites();
        let first = sites.iter().map(|s| s[0]).fold(T::infinity(), |a, b| a.min(b));
        let n = sites.len();
        Self { sites, gradient: T::of(1.18e9), node_x: first - geometry.pitch, base: T::zero(), damping: vec![T::zero(); n] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites.is_empty() {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        if self.damping.len() != self.sites.len() {
            return Err(Error::ShapeMismatch("one damping rate per site".into()));
        }
        if self.damping.iter().any(|&g| !(g >= T::zero())) {
            return Err(Error::InvalidParameter("damping rates must be non-negative".into()));
        }
        if self.frequencies().iter().any(|&f| !(f >= T::zero())) {
            return Err(Error::InvalidParameter("Rabi frequency negative at some site".into()));
        }
        Ok(())
    }

    /// `Ω_i / 2π` per site, hertz.
    pub fn frequencies(&self) -> Vec<T> {
        self.sites.iter().map(|s| self.base + self.gradient * (s[0] - self.node_x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RabiSignal<T> {
    pub times: Vec<T>,
    /// `per_site[i][k]` is P₅₂ of site `i` at `times[k]`.
    pub per_site: Vec<Vec<T>>,
    pub average: Vec<T>,
}

/// `P₅₂(t) = ½ (1 + e^{−γ_i t} cos Ω_i t)` per site and its array mean.
pub fn rabi_signal<T: Real>(model: &RabiArrayModel<T>, times: &[T]) -> Result<RabiSignal<T>> {
    model.validate()?;
    let half = T::of(0.5);
    let per_site: Vec<Vec<T>> = model
        .frequencies()
        .iter()
        .zip(&model.damping)
        .map(|(&f, &g)| times.iter().map(|&t| half * (T::one() + (-g * t).exp() * (T::TAU() * f * t).cos())).collect())
        .collect();
    let n = T::of_usize(per_site.len());
    let average = (0..times.len()).map(|k| per_site.iter().map(|s| s[k]).sum::<T>() / n).collect();
    Ok(RabiSignal { times: times.to_vec(), per_site, average })
}

/// Collapse and revival of an averaged flopping signal.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseRevival<T> {
    /// Time of the smallest contrast peak before the revival.
    pub collapse: T,
    pub revival: T,
    /// Contrast `2P − 1` at the revival.
    pub revival_contrast: T,
}

/// Locates collapse and revival in `P(t)` from the peaks of `|2P − 1|`.
/// The revival is the largest peak after the contrast has first dropped
/// below half its initial value, and must itself exceed half of it.
pub fn collapse_revival<T: Real>(times: &[T], signal: &[T]) -> Option<CollapseRevival<T>> {
    let n = times.len();
    if n < 5 || signal.len() != n {
        return None;
    }
    let c: Vec<T> = signal.iter().map(|&p| T::of(2.0) * p - T::one()).collect();
    let a: Vec<T> = c.iter().map(|v| v.abs()).collect();
    let peaks: Vec<usize> = (1..n - 1).filter(|&k| a[k] >= a[k - 1] && a[k] > a[k + 1]).collect();
    let c0 = a[0];
    let half = c0 / T::of(2.0);
    let start = *peaks.iter().find(|&&k| a[k] < half)?;
    let rev = *peaks.iter().filter(|&&k| k > start).max_by(|&&i, &&j| a[i].partial_cmp(&a[j]).unwrap())?;
    if a[rev] < half {
        return None;
    }
    let collapse = *peaks.iter().filter(|&&k| k < rev).min_by(|&&i, &&j| a[i].partial_cmp(&a[j]).unwrap())?;
    // parabola through the revival sample and its neighbours
    let (y0, y1, y2) = (a[rev - 1], a[rev], a[rev + 1]);
    let den = y0 - T::of(2.0) * y1 + y2;
    let h = times[rev + 1] - times[rev];
    let shift = if den < T::zero() { (y0 - y2) / (T::of(2.0) * den) } else { T::zero() };
    Some(CollapseRevival { collapse: times[collapse], revival: times[rev] + shift * h, revival_contrast: c[rev] })
}
