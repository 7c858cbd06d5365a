//! Plain-text grid files.
//!
//! The first line is a header of `key=value` pairs describing the grid;
//! the values follow one per line with `x` varying fastest.
//!
//! ```text
//! # crasim-grid kind=intensity nx=61 ny=61 nz=121 dx=1e-7 ... wavelength=8.2e-7 power=0.02
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::IntensityVolume;
use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::potentials::{Species, TrapPotential};
use crate::scalar::Real;

const MAGIC: &str = "# crasim-grid";

fn write_grid<T: Real>(path: &Path, grid: &Grid3<T>, kind: &str, extra: &[(&str, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "{MAGIC} kind={kind} nx={} ny={} nz={}", grid.shape[0], grid.shape[1], grid.shape[2])?;
    for (k, a) in [("dx", 0), ("dy", 1), ("dz", 2)] {
        write!(w, " {k}={:e}", grid.spacing[a].as_f64())?;
    }
    for (k, a) in [("x0", 0), ("y0", 1), ("z0", 2)] {
        write!(w, " {k}={:e}", grid.origin[a].as_f64())?;
    }
    for (k, v) in extra {
        write!(w, " {k}={v:e}")?;
    }
    writeln!(w)?;
    for v in &grid.values {
        writeln!(w, "{:e}", v.as_f64())?;
    }
    w.flush()?;
    Ok(())
}

fn read_grid<T: Real>(path: &Path) -> Result<(Grid3<T>, HashMap<String, String>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))??;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Parse(format!("missing '{MAGIC}' header")))?;
    let mut meta = HashMap::new();
    for pair in rest.split_whitespace() {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field '{pair}'")))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let num = |k: &str| -> Result<f64> {
        meta.get(k)
            .ok_or_else(|| Error::Parse(format!("header lacks '{k}'")))?
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("header field '{k}': {e}")))
    };
    let count = |k: &str| -> Result<usize> {
        meta.get(k)
            .ok_or_else(|| Error::Parse(format!("header lacks '{k}'")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("header field '{k}': {e}")))
    };
    let shape = [count("nx")?, count("ny")?, count("nz")?];
    let spacing = [T::of(num("dx")?), T::of(num("dy")?), T::of(num("dz")?)];
    let origin = [T::of(num("x0")?), T::of(num("y0")?), T::of(num("z0")?)];
    let mut values = Vec::with_capacity(shape.iter().product());
    for (i, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|e| Error::Parse(format!("value line {}: {e}", i + 2)))?;
        values.push(T::of(v));
    }
    Ok((Grid3::new(shape, spacing, origin, values)?, meta))
}

pub fn write_volume<T: Real>(path: &Path, volume: &IntensityVolume<T>) -> Result<()> {
    write_grid(
        path,
        &volume.grid,
        "intensity",
        &[("wavelength", volume.wavelength.as_f64()), ("power", volume.total_power.as_f64())],
    )
}

pub fn read_volume<T: Real>(path: &Path) -> Result<IntensityVolume<T>> {
    let (grid, meta) = read_grid(path)?;
    if meta.get("kind").map(String::as_str) != Some("intensity") {
        return Err(Error::Parse("not an intensity grid".into()));
    }
    let get = |k: &str| -> Result<T> {
        let v = meta.get(k).ok_or_else(|| Error::Parse(format!("header lacks '{k}'")))?;
        Ok(T::of(v.parse::<f64>().map_err(|e| Error::Parse(format!("header field '{k}': {e}")))?))
    };
    Ok(IntensityVolume { grid, wavelength: get("wavelength")?, total_power: get("power")? })
}

pub fn write_potential<T: Real>(path: &Path, pot: &TrapPotential<T>) -> Result<()> {
    let kind = match pot.species {
        Species::GroundDipole => "ground_dipole",
        Species::RydbergPonderomotive => "rydberg_ponderomotive",
    };
    write_grid(path, &pot.grid, kind, &[])
}

pub fn read_potential<T: Real>(path: &Path) -> Result<TrapPotential<T>> {
    let (grid, meta) = read_grid(path)?;
    let species = match meta.get("kind").map(String::as_str) {
        Some("ground_dipole") => Species::GroundDipole,
        Some("rydberg_ponderomotive") => Species::RydbergPonderomotive,
        other => return Err(Error::Parse(format!("not a potential grid (kind {other:?})"))),
    };
    TrapPotential::new(grid, species)
}

/// Plane of a grid to export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceAxis {
    /// The y–z plane at sample `index` along x.
    X,
    Y,
    Z,
}

/// Writes one plane of `grid` as CSV rows `x,y,z,intensity`.
pub fn write_slice_csv<T: Real>(path: &Path, grid: &Grid3<T>, axis: SliceAxis, index: usize) -> Result<()> {
    let a = match axis {
        SliceAxis::X => 0,
        SliceAxis::Y => 1,
        SliceAxis::Z => 2,
    };
    if index >= grid.shape[a] {
        return Err(Error::InvalidParameter(format!("slice {index} outside axis of {} samples", grid.shape[a])));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y,z,intensity")?;
    for iz in 0..grid.shape[2] {
        for iy in 0..grid.shape[1] {
            for ix in 0..grid.shape[0] {
                let idx = [ix, iy, iz];
                if idx[a] != index {
                    continue;
                }
                let p = grid.position(idx);
                writeln!(
                    w,
                    "{:e},{:e},{:e},{:e}",
                    p[0].as_f64(),
                    p[1].as_f64(),
                    p[2].as_f64(),
                    grid.get(ix, iy, iz).as_f64()
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
