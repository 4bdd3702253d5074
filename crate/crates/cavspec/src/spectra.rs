//! Golden-rule transmission spectra from the assembled manifold operator.
//!
//! A stick spectrum is the set of lines (ω_j, w_j) with ω_j the eigenvalue
//! detuning from the empty-cavity resonance E₀ (units of g) and
//! w_j = |⟨Ψ_j|Ψ_I⟩|² the golden-rule weight. Small operators are handled
//! by dense eigendecomposition, large ones by Lanczos tridiagonalization
//! seeded with Ψ_I (whose Ritz sticks match the exact spectral moments up
//! to order 2·iterations − 1), with identical output shape. Downstream:
//! red/blue sideband summaries, Lorentzian broadening with the extrinsic
//! width κ′, and weighted spectral moments.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::ManifoldOperator;
use crate::linalg::sym_eig;

/// Lines below this fraction of the total weight are dark-state rounding
/// dust and are dropped.
pub const WEIGHT_DROP_CUTOFF: f64 = 1e-12;
/// A sideband with less weight than this is reported as empty.
pub const EMPTY_SIDE_CUTOFF: f64 = 1e-6;
/// Largest operator sent to the dense eigensolver.
pub const DENSE_DIM_CAP: usize = 10_000;
/// Lanczos depth used when the dense route is unavailable.
pub const DEFAULT_LANCZOS_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumOrigin {
    ExactDiag,
    LanczosSeed,
    TavisCummings,
}

/// Weighted delta lines, sorted by detuning.
#[derive(Debug, Clone)]
pub struct StickSpectrum {
    lines: Vec<(f64, f64)>,
    pub origin: SpectrumOrigin,
}

impl StickSpectrum {
    /// Sorts the (omega, weight) pairs. Weights must be nonnegative and
    /// sum to at most 1 (plus rounding).
    pub fn from_lines(mut lines: Vec<(f64, f64)>, origin: SpectrumOrigin) -> Self {
        lines.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut total = 0.0;
        for &(omega, weight) in &lines {
            assert!(omega.is_finite() && weight >= 0.0, "bad line ({omega}, {weight})");
            total += weight;
        }
        assert!(total <= 1.0 + 1e-9, "weights sum to {total} > 1");
        Self { lines, origin }
    }

    pub fn lines(&self) -> &[(f64, f64)] {
        &self.lines
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|l| l.1).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMethod {
    Spectrum,
    PerturbativeMc,
    Series,
}

/// Weight, mean and variance of one sideband, normalized by the side's
/// own weight. `empty` marks a side carrying less than
/// [`EMPTY_SIDE_CUTOFF`]; its mean and variance are zeroed, never NaN.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SidebandSummary {
    pub side: Side,
    pub method: SummaryMethod,
    pub total_weight: f64,
    pub mean: f64,
    pub variance: f64,
    pub empty: bool,
}

impl SidebandSummary {
    fn empty(side: Side, method: SummaryMethod, total_weight: f64) -> Self {
        Self { side, method, total_weight, mean: 0.0, variance: 0.0, empty: true }
    }
}

/// Stick spectrum of the operator seeded with `psi_i`, via dense
/// eigendecomposition up to [`DENSE_DIM_CAP`] and seeded Lanczos above it.
pub fn stick_spectrum(op: &ManifoldOperator, psi_i: &[f64]) -> Result<StickSpectrum> {
    check_seed(op, psi_i)?;
    if op.dim() <= DENSE_DIM_CAP {
        dense_spectrum(op, psi_i)
    } else {
        lanczos_spectrum(op, psi_i, DEFAULT_LANCZOS_ITERATIONS)
    }
}

fn check_seed(op: &ManifoldOperator, psi_i: &[f64]) -> Result<()> {
    if psi_i.len() != op.dim() {
        return Err(Error::Dimension(format!(
            "seed state has length {}, operator dimension is {}",
            psi_i.len(),
            op.dim()
        )));
    }
    let norm2: f64 = psi_i.iter().map(|a| a * a).sum();
    if (norm2 - 1.0).abs() > 1e-9 {
        return Err(Error::Dimension(format!("seed state norm² = {norm2}, expected 1")));
    }
    Ok(())
}

fn dense_spectrum(op: &ManifoldOperator, psi_i: &[f64]) -> Result<StickSpectrum> {
    let eig = sym_eig(&op.matrix.to_dense())?;
    let overlaps = eig.vectors.transpose() * DVector::from_column_slice(psi_i);
    let lines = collect_lines(
        eig.values.iter().map(|&e| e - op.e_zero),
        overlaps.iter().map(|&o| o * o),
    );
    Ok(StickSpectrum::from_lines(lines, SpectrumOrigin::ExactDiag))
}

/// Seeded Lanczos with full reorthogonalization; returns Ritz lines and
/// first-component² weights.
pub fn lanczos_spectrum(
    op: &ManifoldOperator,
    psi_i: &[f64],
    iterations: usize,
) -> Result<StickSpectrum> {
    check_seed(op, psi_i)?;
    let dim = op.dim();
    let steps = iterations.clamp(1, dim);

    let mut alphas: Vec<f64> = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    let mut vectors: Vec<Vec<f64>> = vec![psi_i.to_vec()];
    let mut w = vec![0.0f64; dim];
    let mut scale = 1.0f64;

    for k in 0..steps {
        op.matrix.mul_into(&vectors[k], &mut w);
        let alpha: f64 = vectors[k].iter().zip(&w).map(|(a, b)| a * b).sum();
        alphas.push(alpha);
        scale = scale.max(alpha.abs());
        for (wi, qi) in w.iter_mut().zip(&vectors[k]) {
            *wi -= alpha * qi;
        }
        if k > 0 {
            let beta_prev = betas[k - 1];
            for (wi, qi) in w.iter_mut().zip(&vectors[k - 1]) {
                *wi -= beta_prev * qi;
            }
        }
        // Full reorthogonalization: one classical pass over the basis.
        for q in &vectors {
            let overlap: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= overlap * qi;
            }
        }
        if k + 1 == steps {
            break;
        }
        let beta = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if beta <= 1e-12 * scale {
            break; // exact invariant subspace reached
        }
        betas.push(beta);
        scale = scale.max(beta);
        vectors.push(w.iter().map(|a| a / beta).collect());
    }

    let k = alphas.len();
    let mut tri = DMatrix::zeros(k, k);
    for i in 0..k {
        tri[(i, i)] = alphas[i];
        if i + 1 < k {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let eig = sym_eig(&tri)?;
    let lines = collect_lines(
        eig.values.iter().map(|&e| e - op.e_zero),
        (0..k).map(|j| {
            let c = eig.vectors[(0, j)];
            c * c
        }),
    );
    Ok(StickSpectrum::from_lines(lines, SpectrumOrigin::LanczosSeed))
}

fn collect_lines(
    omegas: impl Iterator<Item = f64>,
    weights: impl Iterator<Item = f64>,
) -> Vec<(f64, f64)> {
    let raw: Vec<(f64, f64)> = omegas.zip(weights).collect();
    let total: f64 = raw.iter().map(|l| l.1).sum();
    let cutoff = WEIGHT_DROP_CUTOFF * total;
    raw.into_iter().filter(|l| l.1 >= cutoff).collect()
}

/// Split into (red, blue) summaries by the sign of the detuning. Lines at
/// exactly ω = 0 belong to neither side (they cannot occur for g ≫ r·ζ,
/// the regime where sign classification is meaningful).
pub fn split_sidebands(s: &StickSpectrum) -> (SidebandSummary, SidebandSummary) {
    let side_summary = |side: Side| {
        let picked: Vec<(f64, f64)> = s
            .lines
            .iter()
            .copied()
            .filter(|&(omega, _)| match side {
                Side::Red => omega < 0.0,
                Side::Blue => omega > 0.0,
            })
            .collect();
        let weight: f64 = picked.iter().map(|l| l.1).sum();
        if weight < EMPTY_SIDE_CUTOFF {
            return SidebandSummary::empty(side, SummaryMethod::Spectrum, weight);
        }
        let mean: f64 = picked.iter().map(|&(o, w)| w * o).sum::<f64>() / weight;
        let variance: f64 =
            picked.iter().map(|&(o, w)| w * (o - mean) * (o - mean)).sum::<f64>() / weight;
        SidebandSummary {
            side,
            method: SummaryMethod::Spectrum,
            total_weight: weight,
            mean,
            variance,
            empty: false,
        }
    };
    (side_summary(Side::Red), side_summary(Side::Blue))
}

/// Uniform evaluation grid for [`convolve`].
#[derive(Debug, Clone, Copy)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridRange {
    /// Grid padding the spectrum's support by `pad` on both sides.
    pub fn spanning(s: &StickSpectrum, pad: f64, points: usize) -> Self {
        let (lo, hi) = s
            .lines
            .iter()
            .fold((0.0f64, 0.0f64), |(lo, hi), &(o, _)| (lo.min(o), hi.max(o)));
        Self { min: lo - pad, max: hi + pad, points }
    }
}

/// Stick spectrum convolved with extrinsic Lorentzians.
#[derive(Debug, Clone)]
pub struct BroadenedSpectrum {
    pub omega_grid: Vec<f64>,
    pub intensity: Vec<f64>,
    /// Half width at half maximum κ′, units of g.
    pub kernel_width: f64,
    /// False when some weight-carrying line lies outside the grid.
    pub covers_all_lines: bool,
}

/// Superpose a unit-area Lorentzian of HWHM `kappa_ext` (peak 1/(πκ′)) on
/// every line.
// Negated comparisons reject NaN inputs alongside nonpositive ones.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn convolve(s: &StickSpectrum, kappa_ext: f64, grid: &GridRange) -> Result<BroadenedSpectrum> {
    if !(kappa_ext > 0.0) || !kappa_ext.is_finite() {
        return Err(Error::config("kappa_ext", "broadening needs kappa_ext > 0"));
    }
    if grid.points < 2 || !(grid.max > grid.min) {
        return Err(Error::config("grid", "need at least 2 points and max > min"));
    }
    let h = (grid.max - grid.min) / (grid.points - 1) as f64;
    let omega_grid: Vec<f64> = (0..grid.points).map(|i| grid.min + i as f64 * h).collect();
    let mut intensity = vec![0.0f64; grid.points];
    for &(center, weight) in &s.lines {
        for (inten, &omega) in intensity.iter_mut().zip(&omega_grid) {
            let d = omega - center;
            *inten += weight * kappa_ext / (std::f64::consts::PI * (d * d + kappa_ext * kappa_ext));
        }
    }
    let covers_all_lines =
        s.lines.iter().all(|&(o, _)| o >= grid.min && o <= grid.max);
    Ok(BroadenedSpectrum { omega_grid, intensity, kernel_width: kappa_ext, covers_all_lines })
}

impl BroadenedSpectrum {
    /// Trapezoid mass; approaches the stick weight as the grid widens
    /// (Lorentzian tails put ~2κ′/(π·span) outside any finite window).
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.omega_grid.len() {
            acc += 0.5
                * (self.intensity[i] + self.intensity[i - 1])
                * (self.omega_grid[i] - self.omega_grid[i - 1]);
        }
        acc
    }
}

/// Normalized weighted moments: raw[k] = ⟨ωᵏ⟩, central[k] = ⟨(ω−⟨ω⟩)ᵏ⟩.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralMoments {
    pub total_weight: f64,
    pub raw: Vec<f64>,
    pub central: Vec<f64>,
}

/// Moments of the full spectrum and of each side (sides absent when their
/// weight is below [`EMPTY_SIDE_CUTOFF`]).
#[derive(Debug, Clone, Serialize)]
pub struct MomentsReport {
    pub full: SpectralMoments,
    pub red: Option<SpectralMoments>,
    pub blue: Option<SpectralMoments>,
}

/// Raw and central weighted moments through `order` ≤ 4.
pub fn spectral_moments(s: &StickSpectrum, order: usize) -> MomentsReport {
    assert!(order <= 4, "moments are meaningful through order 4 only");
    let moments = |lines: &[(f64, f64)]| -> Option<SpectralMoments> {
        let total: f64 = lines.iter().map(|l| l.1).sum();
        if total < EMPTY_SIDE_CUTOFF {
            return None;
        }
        let mut raw = vec![0.0f64; order + 1];
        for &(o, w) in lines {
            let mut p = 1.0;
            for slot in raw.iter_mut() {
                *slot += w * p;
                p *= o;
            }
        }
        for slot in raw.iter_mut() {
            *slot /= total;
        }
        let mean = if order >= 1 { raw[1] } else { 0.0 };
        let mut central = vec![0.0f64; order + 1];
        for &(o, w) in lines {
            let mut p = 1.0;
            for slot in central.iter_mut() {
                *slot += w * p;
                p *= o - mean;
            }
        }
        for slot in central.iter_mut() {
            *slot /= total;
        }
        Some(SpectralMoments { total_weight: total, raw, central })
    };

    let red: Vec<(f64, f64)> = s.lines.iter().copied().filter(|l| l.0 < 0.0).collect();
    let blue: Vec<(f64, f64)> = s.lines.iter().copied().filter(|l| l.0 > 0.0).collect();
    MomentsReport {
        full: moments(&s.lines).unwrap_or(SpectralMoments {
            total_weight: 0.0,
            raw: vec![0.0; order + 1],
            central: vec![0.0; order + 1],
        }),
        red: moments(&red),
        blue: moments(&blue),
    }
}
