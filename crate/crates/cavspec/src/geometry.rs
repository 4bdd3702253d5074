//! Pointwise algebra of the atom-cavity coupling at frozen positions.
//!
//! For atoms pinned at scaled positions u_i = k·x_i the single-excitation
//! coupling matrix V(u) on the internal basis {|0⟩, |1⟩, …, |N⟩} has
//! elements cos(u_i) between the photon state |0⟩ and each single-atom
//! excitation |i⟩. Its spectrum is {+χ, −χ, 0×(N−1)} with
//! χ(u) = √(Σᵢ cos²uᵢ); the two coupled (bright) eigenvectors are written
//! down in closed form here, which keeps Monte Carlo loops free of
//! eigensolver calls.

use crate::error::{Error, Result};
use crate::spectra::{SpectrumOrigin, StickSpectrum};

/// Default χ² cutoff below which node-singular quantities refuse to divide.
pub const DEFAULT_CHI2_CUTOFF: f64 = 1e-12;

/// Scaled atom positions u_i = k·x_i.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomPositions(pub Vec<f64>);

impl AtomPositions {
    pub fn new(u: Vec<f64>) -> Self {
        AtomPositions(u)
    }

    pub fn n_atoms(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// The two coupled internal eigenvectors of V(u) and their eigenvalue χ.
///
/// `plus_vector` and `minus_vector` have eigenvalues +χ and −χ (units of g);
/// the remaining `dark_dim` = N−1 directions are null and carry no photon
/// component.
#[derive(Debug, Clone)]
pub struct BrightPair {
    pub chi: f64,
    pub plus_vector: Vec<f64>,
    pub minus_vector: Vec<f64>,
    pub dark_dim: usize,
}

/// Collective coupling χ(u) = √(Σᵢ cos²uᵢ) ∈ [0, √N].
pub fn chi(positions: &AtomPositions) -> f64 {
    chi_squared(positions).sqrt()
}

/// χ²(u) = Σᵢ cos²uᵢ.
pub fn chi_squared(positions: &AtomPositions) -> f64 {
    positions.0.iter().map(|&u| u.cos().powi(2)).sum()
}

/// Nonadiabatic correction functional
/// ζ(u) = −(N−1)/χ² + 1 − Σᵢ cos⁴uᵢ / χ⁴.
///
/// Diverges on the nodal set χ → 0; positions with χ² below `cutoff`
/// return a node-singularity error (Monte Carlo callers count these as
/// clipped samples).
pub fn zeta_with_cutoff(positions: &AtomPositions, cutoff: f64) -> Result<f64> {
    let chi2 = chi_squared(positions);
    if chi2 < cutoff {
        return Err(Error::NodeSingularity { chi2, cutoff });
    }
    Ok(zeta_from_parts(positions.n_atoms(), chi2, cos4_sum(positions)))
}

/// [`zeta_with_cutoff`] at the default cutoff.
pub fn zeta(positions: &AtomPositions) -> Result<f64> {
    zeta_with_cutoff(positions, DEFAULT_CHI2_CUTOFF)
}

pub(crate) fn cos4_sum(positions: &AtomPositions) -> f64 {
    positions.0.iter().map(|&u| u.cos().powi(4)).sum()
}

pub(crate) fn zeta_from_parts(n_atoms: usize, chi2: f64, cos4: f64) -> f64 {
    let n = n_atoms as f64;
    -(n - 1.0) / chi2 + 1.0 - cos4 / (chi2 * chi2)
}

/// Closed-form bright eigenvectors of V(u).
///
/// Component 0 is the photon state; component i is atom i excited, with
/// amplitude ±cos(uᵢ)/χ scaled by 1/√2. Positions on the nodal set
/// (χ² < `cutoff`) are rejected.
pub fn bright_pair_with_cutoff(positions: &AtomPositions, cutoff: f64) -> Result<BrightPair> {
    let chi2 = chi_squared(positions);
    if chi2 < cutoff {
        return Err(Error::NodeSingularity { chi2, cutoff });
    }
    let chi = chi2.sqrt();
    let n = positions.n_atoms();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = Vec::with_capacity(n + 1);
    let mut minus = Vec::with_capacity(n + 1);
    plus.push(inv_sqrt2);
    minus.push(inv_sqrt2);
    for &u in &positions.0 {
        let c = u.cos() / chi * inv_sqrt2;
        plus.push(c);
        minus.push(-c);
    }
    Ok(BrightPair { chi, plus_vector: plus, minus_vector: minus, dark_dim: n - 1 })
}

/// [`bright_pair_with_cutoff`] at the default cutoff.
pub fn bright_pair(positions: &AtomPositions) -> Result<BrightPair> {
    bright_pair_with_cutoff(positions, DEFAULT_CHI2_CUTOFF)
}

/// Fixed-atom (all atoms at antinodes) two-line spectrum: delta lines at
/// ±√N with weight 1/2 each, in units of g relative to the empty-cavity
/// resonance.
pub fn tavis_cummings_sticks(n_atoms: usize) -> StickSpectrum {
    let shift = (n_atoms as f64).sqrt();
    StickSpectrum::from_lines(
        vec![(-shift, 0.5), (shift, 0.5)],
        SpectrumOrigin::TavisCummings,
    )
}
