//! Low-light transmission spectra of a driven optical cavity containing N
//! harmonically trapped two-level atoms, restricted to the lowest two
//! excitation manifolds, and the atom-counting limits those spectra imply.
//!
//! Everything is expressed in dimensionless units: energies in units of the
//! single-atom coupling g (ħ = 1), positions as u = kx so the cavity mode is
//! cos(u). The physical knobs are the atom number N, the wavepacket size η
//! (equivalently the tightness ε = e^{−2η²}), the recoil-to-coupling ratio
//! r, and the extrinsic linewidth κ′/g.
//!
//! Module map:
//! - [`params`]: validated parameter sets and the unit conventions.
//! - [`geometry`]: the collective-coupling functionals χ(u), ζ(u) and the
//!   analytic bright pair at fixed atom positions.
//! - [`hamiltonian`]: the single-excitation manifold operator over a Fock or
//!   position-grid motional basis, plus the initial photon state.
//! - [`spectra`]: golden-rule stick spectra, sideband splitting, Lorentzian
//!   broadening, spectral moments.
//! - [`moments`]: Monte Carlo χ/ζ expectations, the first-order perturbative
//!   sideband formulas, and the closed-form 1/N series and limits.
//! - [`counting`]: sideband separation vs. width, distinguishability, and
//!   the maximum countable atom number.
//! - [`cli`]: the `cavspec` binary (spectrum | moments | count | fig3 |
//!   fig4 | validate).

pub mod cli;
pub mod counting;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod moments;
pub mod output;
pub mod params;
pub mod sparse;
pub mod spectra;
pub mod validate;

pub use error::{Error, Result};
