//! Simulation toolkit for circular-Rydberg-atom tweezer arrays: holographic
//! trap synthesis, focal propagation, trapping potentials, atom dynamics,
//! blackbody-driven level populations and curve fitting.
//!
//! The numerical core is generic over the floating-point type; the aliases
//! below fix it to `f64` (and `f32` with the `32` suffix).

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod grid;
pub mod linalg;
pub mod optics;
pub mod populations;
pub mod potentials;
mod scalar;

pub use constants::{PhysicalConstants, CODATA};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = grid::Grid3<f64>;
pub type Grid32 = grid::Grid3<f32>;
pub type Pupil = optics::PupilSpec<f64>;
pub type Pupil32 = optics::PupilSpec<f32>;
pub type Mask = optics::PhaseMask<f64>;
pub type Mask32 = optics::PhaseMask<f32>;
pub type Field = optics::ComplexField<f64>;
pub type Field32 = optics::ComplexField<f32>;
pub type Volume = optics::IntensityVolume<f64>;
pub type Volume32 = optics::IntensityVolume<f32>;
pub type Potential = potentials::TrapPotential<f64>;
pub type Potential32 = potentials::TrapPotential<f32>;
pub type Curve = fitting::Curve<f64>;
pub type Curve32 = fitting::Curve<f32>;
pub type FitResult = fitting::FitResult<f64>;
pub type FitResult32 = fitting::FitResult<f32>;
pub type Atom = dynamics::AtomSample<f64>;
pub type Atom32 = dynamics::AtomSample<f32>;
pub type Tweezer = dynamics::GaussianTweezer<f64>;
pub type Tweezer32 = dynamics::GaussianTweezer<f32>;
pub type Rates = populations::RateModel<f64>;
pub type Rates32 = populations::RateModel<f32>;
