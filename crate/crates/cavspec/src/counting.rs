//! Atom-counting verdicts: sideband separation between N and N+1,
//! combined intrinsic + extrinsic width, and the counting ceiling N_max.
//!
//! Counting works off the red sideband: its center moves by
//! ≈ √((1+ε)/8N) per atom, and the atoms are countable while that step
//! exceeds the peak width. The intrinsic width (spatial inhomogeneity of
//! the coupling) and the extrinsic half-linewidth κ′ (cavity decay and
//! everything else) add in quadrature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, initial_state, MotionalBasis};
use crate::moments::series_sideband;
use crate::params::SystemParams;
use crate::spectra::{split_sidebands, stick_spectrum, Side};

/// Grid resolution of the bisection refining the figure-3 crossover.
const CROSSOVER_TOL: f64 = 1e-9;

/// Red-sideband mean separation between N and N+1 atoms, in g units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Separation {
    /// Difference of the closed-form series means; used for verdicts.
    pub exact: f64,
    /// Leading large-N step √((1+ε)/8N); diverges from `exact` at small N.
    pub asymptotic: f64,
}

/// Which branch of the counting formula caps N_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingRegime {
    /// Width dominated by spatial inhomogeneity of the coupling.
    Intrinsic,
    /// Width dominated by the extrinsic half-linewidth κ′.
    ExtrinsicLimited,
}

/// Counting ceiling with its regime label. `value` is +∞ when both
/// widths vanish (κ′ = 0 in the fixed-atom limit ε = 1).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NMax {
    pub value: f64,
    pub regime: CountingRegime,
}

/// How a [`CountingReport`] obtained its widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingMethod {
    Series,
    PerturbativeMc,
    Spectrum,
}

/// Distinguishability verdict for N vs N+1 atoms.
///
/// `combined_width² == intrinsic_width² + extrinsic_width²` and, at the
/// default width multiplier 1.0, `distinguishable == (separation >
/// combined_width)` with the widths read as RMS (one standard deviation).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CountingReport {
    pub n_atoms: usize,
    pub separation: f64,
    pub intrinsic_width: f64,
    pub extrinsic_width: f64,
    pub combined_width: f64,
    pub distinguishable: bool,
    pub method: CountingMethod,
}

/// One ε row of the figure-3 band sweep: red-sideband centers and
/// half-widths (±√variance/2) for the two atom numbers.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Figure3Row {
    pub epsilon: f64,
    pub mean_lower: f64,
    pub half_width_lower: f64,
    pub mean_upper: f64,
    pub half_width_upper: f64,
    pub overlap: bool,
}

/// Figure-3 sweep output: band rows over the ε grid plus the refined
/// crossover ε* where the bands first touch (None if the grid never
/// brackets one).
#[derive(Debug, Clone, Serialize)]
pub struct Figure3 {
    pub n_pair: (usize, usize),
    pub recoil_ratio: f64,
    pub rows: Vec<Figure3Row>,
    pub crossover: Option<f64>,
}

/// Figure-4 sweep output: N_max tabulated over ε for each κ′.
#[derive(Debug, Clone, Serialize)]
pub struct Figure4 {
    pub kappa_over_g: Vec<f64>,
    pub rows: Vec<Figure4Row>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure4Row {
    pub epsilon: f64,
    pub n_max: Vec<f64>,
}

/// Red-sideband mean separation between `n` and `n + 1` atoms.
///
/// Both forms are reported; verdicts use `exact`. The recoil shift of the
/// series mean is N-independent and cancels in the difference.
pub fn separation(n: usize, params: &SystemParams) -> Result<Separation> {
    if n < 1 {
        return Err(Error::config("n", "separation needs n >= 1"));
    }
    let exact = red_mean_gap(n, params);
    let asymptotic = ((1.0 + params.epsilon) / (8.0 * n as f64)).sqrt();
    Ok(Separation { exact, asymptotic })
}

fn red_mean_gap(n: usize, params: &SystemParams) -> f64 {
    let lower = series_sideband(Side::Red, &with_n(params, n)).mean;
    let upper = series_sideband(Side::Red, &with_n(params, n + 1)).mean;
    lower - upper
}

fn with_n(params: &SystemParams, n: usize) -> SystemParams {
    let mut p = params.clone();
    p.n_atoms = n;
    p
}

/// Counting ceiling N_max(ε, κ′) = (1+ε) / (8κ′² + ½(1−ε)²(1+ε)).
///
/// Evaluated as 1/(8κ′²/(1+ε) + ½(1−ε)²) so that the κ′ = 0 case reduces
/// to 2/(1−ε)² exactly, not merely to rounding. κ′ = 0 at ε = 1 has no
/// ceiling and returns +∞.
pub fn n_max(epsilon: f64, kappa_over_g: f64) -> Result<NMax> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::config("epsilon", "n_max needs epsilon in [0, 1]"));
    }
    if !kappa_over_g.is_finite() || kappa_over_g < 0.0 {
        return Err(Error::config("kappa_ext", "kappa must be >= 0"));
    }
    let w = 1.0 - epsilon;
    let value = 1.0 / (8.0 * kappa_over_g * kappa_over_g / (1.0 + epsilon) + 0.5 * w * w);
    let regime = if 16.0 * kappa_over_g * kappa_over_g > w * w {
        CountingRegime::ExtrinsicLimited
    } else {
        CountingRegime::Intrinsic
    };
    Ok(NMax { value, regime })
}

/// Closed-form counting verdict for distinguishing `n` from `n + 1`.
///
/// Intrinsic width is the RMS width of the n-atom red sideband from the
/// large-N series; extrinsic width is κ′ from `params`. `multiplier`
/// scales the width the separation must beat (1.0 = RMS convention).
pub fn series_report(n: usize, params: &SystemParams, multiplier: f64) -> Result<CountingReport> {
    if !multiplier.is_finite() || multiplier <= 0.0 {
        return Err(Error::config("multiplier", "width multiplier must be > 0"));
    }
    let sep = separation(n, params)?;
    // The series variance is first order in r and can go slightly
    // negative for large recoil; widths are clamped at zero.
    let var = series_sideband(Side::Red, &with_n(params, n)).variance.max(0.0);
    Ok(build_report(n, sep.exact, var.sqrt(), params.kappa_ext, multiplier, CountingMethod::Series))
}

/// Counting verdict with the intrinsic width taken from Monte Carlo
/// moments instead of the closed-form series. The separation stays the
/// series difference; only the width estimate changes.
pub fn mc_report(
    n: usize,
    params: &SystemParams,
    multiplier: f64,
    n_samples: u64,
    seed: u64,
) -> Result<CountingReport> {
    if !multiplier.is_finite() || multiplier <= 0.0 {
        return Err(Error::config("multiplier", "width multiplier must be > 0"));
    }
    let sep = separation(n, params)?;
    let p = with_n(params, n);
    let moments = crate::moments::mc_moments(&p, n_samples, seed)?;
    let var = crate::moments::perturbative_sideband(Side::Red, &p, &moments)?.variance.max(0.0);
    Ok(build_report(
        n,
        sep.exact,
        var.sqrt(),
        params.kappa_ext,
        multiplier,
        CountingMethod::PerturbativeMc,
    ))
}

/// Counting verdict from explicit diagonalization of the n and n+1
/// operators. Exact but exponential in n; intended for cross-checking
/// [`series_report`] at small atom numbers.
pub fn spectrum_report(
    n: usize,
    params: &SystemParams,
    multiplier: f64,
) -> Result<CountingReport> {
    if !multiplier.is_finite() || multiplier <= 0.0 {
        return Err(Error::config("multiplier", "width multiplier must be > 0"));
    }
    let lower = red_summary(&with_n(params, n))?;
    let upper = red_summary(&with_n(params, n + 1))?;
    let sep = lower.0 - upper.0;
    Ok(build_report(n, sep, lower.1.max(0.0).sqrt(), params.kappa_ext, multiplier, CountingMethod::Spectrum))
}

fn red_summary(params: &SystemParams) -> Result<(f64, f64)> {
    let basis = MotionalBasis::fock_auto(params)?;
    let op = assemble(params, &basis)?;
    let psi = initial_state(params, &basis)?;
    let sticks = stick_spectrum(&op, &psi)?;
    let (red, _) = split_sidebands(&sticks);
    if red.empty {
        return Err(Error::Dimension(
            "red sideband carries no weight; cannot form a counting verdict".into(),
        ));
    }
    Ok((red.mean, red.variance))
}

fn build_report(
    n: usize,
    separation: f64,
    intrinsic: f64,
    extrinsic: f64,
    multiplier: f64,
    method: CountingMethod,
) -> CountingReport {
    let combined = intrinsic.hypot(extrinsic);
    CountingReport {
        n_atoms: n,
        separation,
        intrinsic_width: intrinsic,
        extrinsic_width: extrinsic,
        combined_width: combined,
        distinguishable: separation > multiplier * combined,
        method,
    }
}

/// Band sweep behind figure 3: red-sideband bands (mean ± √variance/2)
/// for two atom numbers over an ε grid at fixed recoil.
///
/// Bands overlap when |Δmean| ≤ hw₁ + hw₂. The crossover is refined by
/// bisection between the two grid points where the flag flips.
pub fn figure3_sweep(
    params: &SystemParams,
    n_pair: (usize, usize),
    epsilon_grid: &[f64],
) -> Result<Figure3> {
    let (n1, n2) = n_pair;
    if n1 < 1 || n2 <= n1 {
        return Err(Error::config("n_pair", "need 1 <= n1 < n2"));
    }
    if epsilon_grid.is_empty() {
        return Err(Error::config("epsilon_grid", "epsilon grid is empty"));
    }
    for &eps in epsilon_grid {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::config("epsilon_grid", "epsilon grid points must lie in (0, 1]"));
        }
    }
    let rows: Vec<Figure3Row> =
        epsilon_grid.iter().map(|&eps| band_row(eps, n_pair, params)).collect();

    // Bands separate as the trap tightens; refine the first flip.
    let mut crossover = None;
    for pair in rows.windows(2) {
        if pair[0].overlap != pair[1].overlap {
            crossover = Some(bisect_touch(pair[0].epsilon, pair[1].epsilon, n_pair, params));
            break;
        }
    }
    Ok(Figure3 { n_pair, recoil_ratio: params.recoil_ratio, rows, crossover })
}

fn band_row(epsilon: f64, n_pair: (usize, usize), params: &SystemParams) -> Figure3Row {
    let at = |n: usize| {
        let p = SystemParams::from_epsilon(n, epsilon, params.recoil_ratio)
            .expect("epsilon validated in (0, 1]");
        let s = series_sideband(Side::Red, &p);
        (s.mean, 0.5 * s.variance.max(0.0).sqrt())
    };
    let (mean_lower, half_width_lower) = at(n_pair.0);
    let (mean_upper, half_width_upper) = at(n_pair.1);
    let gap = (mean_lower - mean_upper).abs();
    Figure3Row {
        epsilon,
        mean_lower,
        half_width_lower,
        mean_upper,
        half_width_upper,
        overlap: gap <= half_width_lower + half_width_upper,
    }
}

fn bisect_touch(mut lo: f64, mut hi: f64, n_pair: (usize, usize), params: &SystemParams) -> f64 {
    let gap = |eps: f64| {
        let row = band_row(eps, n_pair, params);
        (row.mean_lower - row.mean_upper).abs() - (row.half_width_lower + row.half_width_upper)
    };
    let mut f_lo = gap(lo);
    while hi - lo > CROSSOVER_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = gap(mid);
        if (f_mid <= 0.0) == (f_lo <= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// N_max tabulated over an ε grid for each κ′ (figure 4).
pub fn figure4_sweep(kappa_list: &[f64], epsilon_grid: &[f64]) -> Result<Figure4> {
    if kappa_list.is_empty() {
        return Err(Error::config("kappa_list", "kappa list is empty"));
    }
    if epsilon_grid.is_empty() {
        return Err(Error::config("epsilon_grid", "epsilon grid is empty"));
    }
    let mut rows = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let mut values = Vec::with_capacity(kappa_list.len());
        for &kappa in kappa_list {
            values.push(n_max(eps, kappa)?.value);
        }
        rows.push(Figure4Row { epsilon: eps, n_max: values });
    }
    Ok(Figure4 { kappa_over_g: kappa_list.to_vec(), rows })
}

impl Figure4 {
    /// Per-κ check that N_max rises with ε (strictly among finite values).
    pub fn monotone_columns(&self) -> Vec<bool> {
        (0..self.kappa_over_g.len())
            .map(|k| {
                self.rows.windows(2).all(|pair| {
                    let (a, b) = (pair[0].n_max[k], pair[1].n_max[k]);
                    b > a || (a.is_infinite() && b.is_infinite())
                })
            })
            .collect()
    }
}
