//! Backward extension of diagonalizable linear semigroups.
//!
//! States of a semigroup `T_t = exp(tA)` with diagonal generator are stored
//! spectrally in sign / log-magnitude form, so backward evolution by
//! `exp(n²π²t)` never overflows. On top of that representation the crate
//! computes how far back each trajectory extends, builds the extended space
//! on which `T_t` becomes a group, and provides the associated norms, the
//! affine (Duhamel) semigroup, and the duality between the backward-complete
//! states and the extended space.

pub mod density;
pub mod duality;
pub mod error;
pub mod extended;
pub mod inhomogeneous;
pub mod io;
pub mod logamp;
pub mod reversibility;
pub mod series;
pub mod shift;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
pub use extended::ExtendedState;
pub use logamp::LogAmplitude;
pub use reversibility::{Class, Classification, Horizon};
pub use spectral::{make_heat_spectrum, SpectralState, Spectrum, SpectrumKind, TailModel, TailTerm};
