//! Monte Carlo moments of χ and ζ over the motional ground state, and the
//! sideband predictions built from them.
//!
//! Sampling the ground-state position distribution (uᵢ ~ N(0, η²),
//! independent per atom) turns the first-order sideband formulas into five
//! scalar estimates: ⟨χ⟩, ⟨χ²⟩, ⟨ζ⟩, ⟨ζχ⟩, ⟨ζχ²⟩. This route costs O(N)
//! per sample and is the only one that reaches large atom numbers; the
//! operator route in [`crate::spectra`] serves as its small-N cross-check.
//!
//! ζ diverges on the nodal set χ → 0, so samples with χ² below a cutoff
//! are excluded from the five main estimators and counted. A winsorized
//! ⟨ζ⟩ (χ² clipped from below at the cutoff) is carried alongside as a
//! sensitivity diagnostic: for N ≥ 3 the nodal region contributes
//! negligibly and the two agree, for N = 2 the tail of ζ is only
//! log-integrable and the winsorized value shifts with the cutoff.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::zeta_from_parts;
use crate::params::SystemParams;
use crate::spectra::Side;

/// Default χ² cutoff, as a fraction of N (the maximum of χ²).
pub const DEFAULT_CHI2_CUTOFF_FACTOR: f64 = 1e-6;
/// Number of independent RNG streams. Standard errors come from the
/// scatter of per-stream means, so this is also the batch count.
pub const N_BATCHES: u64 = 100;
/// Fewer samples than this cannot support a batch-means error estimate.
pub const MIN_SAMPLES: u64 = 1000;

/// A scalar Monte Carlo estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// The five ground-state moments feeding the sideband formulas, plus the
/// winsorized ⟨ζ⟩ diagnostic and the clipping bookkeeping.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentEstimates {
    pub e_chi: Estimate,
    pub e_chi2: Estimate,
    pub e_zeta: Estimate,
    pub e_zeta_chi: Estimate,
    pub e_zeta_chi2: Estimate,
    /// ⟨ζ⟩ over all samples with χ² clipped from below at `cutoff`.
    pub e_zeta_winsorized: Estimate,
    /// Samples actually drawn (the request is rounded up to a whole
    /// number of batches).
    pub n_samples: u64,
    /// Samples excluded from the five main estimators.
    pub n_clipped: u64,
    /// χ² clipping threshold in effect.
    pub cutoff: f64,
}

/// How a [`SidebandPrediction`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMethod {
    /// First-order formulas evaluated on Monte Carlo moments.
    PerturbativeMc,
    /// Closed-form large-N series in the tightness ε.
    #[serde(rename = "series_1_over_n")]
    Series1OverN,
    /// Leading behaviour for η → 0 (ε → 1).
    TightLimit,
    /// Leading behaviour for ε → 0.
    LooseLimit,
}

/// Predicted center and squared width of one sideband, in units of g
/// relative to the empty-cavity resonance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SidebandPrediction {
    pub side: Side,
    pub method: PredictionMethod,
    pub mean: f64,
    pub variance: f64,
    /// Propagated Monte Carlo error; `None` for closed forms.
    pub mean_std_error: Option<f64>,
    pub variance_std_error: Option<f64>,
}

/// [`mc_moments_with_cutoff`] at the default cutoff `1e-6 · N`.
pub fn mc_moments(params: &SystemParams, n_samples: u64, seed: u64) -> Result<MomentEstimates> {
    let cutoff = DEFAULT_CHI2_CUTOFF_FACTOR * params.n_atoms as f64;
    mc_moments_with_cutoff(params, n_samples, seed, cutoff)
}

/// Estimate the ground-state moments from at least `n_samples` draws.
///
/// The request is rounded up to [`N_BATCHES`] equal batches, one ChaCha
/// stream per batch, so results are bitwise reproducible for a given seed
/// regardless of thread count. Values are pooled over all kept samples;
/// standard errors are the scatter of per-batch means over √B.
pub fn mc_moments_with_cutoff(
    params: &SystemParams,
    n_samples: u64,
    seed: u64,
    cutoff: f64,
) -> Result<MomentEstimates> {
    params.require_numeric()?;
    if n_samples < MIN_SAMPLES {
        return Err(Error::MonteCarlo(format!(
            "need at least {MIN_SAMPLES} samples for a batch-means error estimate, \
             got {n_samples}"
        )));
    }
    if !cutoff.is_finite() || cutoff <= 0.0 {
        return Err(Error::config("cutoff", "chi^2 cutoff must be positive and finite"));
    }

    let batch_size = n_samples.div_ceil(N_BATCHES);
    let n_atoms = params.n_atoms;
    let eta = params.eta;

    let batches: Vec<BatchSums> = (0..N_BATCHES)
        .into_par_iter()
        .map(|stream| run_batch(n_atoms, eta, cutoff, batch_size, seed, stream))
        .collect();

    let kept: u64 = batches.iter().map(|b| b.kept).sum();
    let clipped: u64 = batches.iter().map(|b| b.clipped).sum();
    if kept == 0 {
        return Err(Error::MonteCarlo(format!(
            "all {clipped} samples fell below the chi^2 cutoff {cutoff:.3e}; \
             lower the cutoff or increase eta"
        )));
    }
    if batches.iter().filter(|b| b.kept > 0).count() < 2 {
        return Err(Error::MonteCarlo(
            "fewer than two batches kept any samples; no error estimate is possible".into(),
        ));
    }

    let main = |select: fn(&BatchSums) -> f64| -> Estimate {
        batch_estimate(batches.iter().map(|b| (select(b), b.kept)))
    };
    Ok(MomentEstimates {
        e_chi: main(|b| b.chi),
        e_chi2: main(|b| b.chi2),
        e_zeta: main(|b| b.zeta),
        e_zeta_chi: main(|b| b.zeta_chi),
        e_zeta_chi2: main(|b| b.zeta_chi2),
        e_zeta_winsorized: batch_estimate(batches.iter().map(|b| (b.zeta_w, batch_size))),
        n_samples: batch_size * N_BATCHES,
        n_clipped: clipped,
        cutoff,
    })
}

#[derive(Clone, Copy, Default)]
struct BatchSums {
    chi: f64,
    chi2: f64,
    zeta: f64,
    zeta_chi: f64,
    zeta_chi2: f64,
    zeta_w: f64,
    kept: u64,
    clipped: u64,
}

fn run_batch(
    n_atoms: usize,
    eta: f64,
    cutoff: f64,
    batch_size: u64,
    seed: u64,
    stream: u64,
) -> BatchSums {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let normal = Normal::new(0.0, eta).expect("eta validated positive and finite");
    let mut sums = BatchSums::default();
    for _ in 0..batch_size {
        let mut chi2 = 0.0;
        let mut cos4 = 0.0;
        for _ in 0..n_atoms {
            let c = normal.sample(&mut rng).cos();
            let c2 = c * c;
            chi2 += c2;
            cos4 += c2 * c2;
        }
        // Winsorized ζ sees χ² clipped from below; for a kept sample
        // max(χ², cutoff) is χ² itself and the two ζ values coincide
        // bitwise. ζ has no singularity at N = 1 (it is identically zero:
        // χ⁴ and Σcos⁴ are the same product of the same doubles, and
        // x/x = 1 exactly), so the clamp is skipped there rather than
        // letting it bias clipped samples.
        if n_atoms > 1 {
            sums.zeta_w += zeta_from_parts(n_atoms, chi2.max(cutoff), cos4);
        }
        if chi2 < cutoff {
            sums.clipped += 1;
            continue;
        }
        let chi = chi2.sqrt();
        let zeta = zeta_from_parts(n_atoms, chi2, cos4);
        sums.chi += chi;
        sums.chi2 += chi2;
        sums.zeta += zeta;
        sums.zeta_chi += zeta * chi;
        sums.zeta_chi2 += zeta * chi2;
        sums.kept += 1;
    }
    sums
}

/// Pooled mean over all counted samples; standard error from the scatter
/// of per-batch means (batches that kept nothing are skipped).
fn batch_estimate(pairs: impl Iterator<Item = (f64, u64)> + Clone) -> Estimate {
    let mut total_sum = 0.0;
    let mut total_count = 0u64;
    let mut means = Vec::new();
    for (sum, count) in pairs {
        total_sum += sum;
        total_count += count;
        if count > 0 {
            means.push(sum / count as f64);
        }
    }
    let value = total_sum / total_count as f64;
    let b = means.len();
    debug_assert!(b >= 2, "caller guarantees at least two contributing batches");
    let mbar = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mbar) * (m - mbar)).sum::<f64>() / (b - 1) as f64;
    Estimate { value, std_error: (var / b as f64).sqrt() }
}

fn side_sign(side: Side) -> f64 {
    match side {
        Side::Red => -1.0,
        Side::Blue => 1.0,
    }
}

/// First-order sideband center and width from measured moments.
///
/// With X = ⟨χ⟩, Z = ⟨ζ⟩ and s = ±1 the side sign,
///
/// ```text
/// mean     = s·X + (r/2)·Z + (r/2)·(Z·X − ⟨ζχ⟩)/X
/// variance = (⟨χ²⟩ − X²) + s·r·((⟨ζχ²⟩ + Z·⟨χ²⟩)/X − 2·Z·X)
/// ```
///
/// Standard errors are propagated to first order treating the five
/// estimates as independent (their correlations are ignored, which
/// overstates the error slightly). Refused when ⟨χ⟩ is within three
/// standard errors of zero: every formula above divides by it.
// The negated comparison below routes NaN estimates into the error
// branch; `x <= 3.0 * se_x` would let them through.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn perturbative_sideband(
    side: Side,
    params: &SystemParams,
    moments: &MomentEstimates,
) -> Result<SidebandPrediction> {
    let x = moments.e_chi.value;
    let se_x = moments.e_chi.std_error;
    if !(x > 3.0 * se_x) {
        return Err(Error::DegenerateEstimate {
            name: "e_chi".into(),
            value: x,
            std_error: se_x,
        });
    }
    let s = side_sign(side);
    let r = params.recoil_ratio;
    let z = moments.e_zeta.value;
    let zx = moments.e_zeta_chi.value;
    let x2 = moments.e_chi2.value;
    let zx2 = moments.e_zeta_chi2.value;

    let mean = s * x + 0.5 * r * z + 0.5 * r * (z * x - zx) / x;
    let variance = (x2 - x * x) + s * r * ((zx2 + z * x2) / x - 2.0 * z * x);

    let d_mean_x = s + 0.5 * r * zx / (x * x);
    let d_mean_z = r;
    let d_mean_zx = -0.5 * r / x;
    let mean_se = quadrature_sum(&[
        d_mean_x * moments.e_chi.std_error,
        d_mean_z * moments.e_zeta.std_error,
        d_mean_zx * moments.e_zeta_chi.std_error,
    ]);

    let d_var_x = -2.0 * x + s * r * (-(zx2 + z * x2) / (x * x) - 2.0 * z);
    let d_var_x2 = 1.0 + s * r * z / x;
    let d_var_z = s * r * (x2 / x - 2.0 * x);
    let d_var_zx2 = s * r / x;
    let var_se = quadrature_sum(&[
        d_var_x * moments.e_chi.std_error,
        d_var_x2 * moments.e_chi2.std_error,
        d_var_z * moments.e_zeta.std_error,
        d_var_zx2 * moments.e_zeta_chi2.std_error,
    ]);

    Ok(SidebandPrediction {
        side,
        method: PredictionMethod::PerturbativeMc,
        mean,
        variance,
        mean_std_error: Some(mean_se),
        variance_std_error: Some(var_se),
    })
}

fn quadrature_sum(terms: &[f64]) -> f64 {
    terms.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Large-N series for the sideband center and width, in the tightness ε.
///
/// ```text
/// mean     = ±√(N(1+ε)/2) · (1 − (1−ε)²/(16N)) − r·(1−ε)/(2(1+ε))
/// variance = (1−ε)²(1+ε)/16 ± r·(1−ε)²(3+ε)/(4√(2N(1+ε)))
/// ```
///
/// The recoil shift of the mean is the same for both sidebands; the
/// recoil term of the variance changes sign, widening blue and narrowing
/// red. Exact in the fixed-atom limit ε = 1 (±√N, zero width).
pub fn series_sideband(side: Side, params: &SystemParams) -> SidebandPrediction {
    let s = side_sign(side);
    let n = params.n_atoms as f64;
    let eps = params.epsilon;
    let r = params.recoil_ratio;
    let w = 1.0 - eps;
    let mean = s * (n * (1.0 + eps) / 2.0).sqrt() * (1.0 - w * w / (16.0 * n))
        - r * w / (2.0 * (1.0 + eps));
    let variance = w * w * (1.0 + eps) / 16.0
        + s * r * w * w * (3.0 + eps) / (4.0 * (2.0 * n * (1.0 + eps)).sqrt());
    SidebandPrediction {
        side,
        method: PredictionMethod::Series1OverN,
        mean,
        variance,
        mean_std_error: None,
        variance_std_error: None,
    }
}

/// Stiff-trap leading behaviour, expanded in η:
/// mean = ±√N(1 − η²/2) − rη²/2, variance = η⁴/2 ± 2rη⁴/√N.
pub fn tight_limit(side: Side, params: &SystemParams) -> SidebandPrediction {
    let s = side_sign(side);
    let n = params.n_atoms as f64;
    let e2 = params.eta * params.eta;
    let r = params.recoil_ratio;
    SidebandPrediction {
        side,
        method: PredictionMethod::TightLimit,
        mean: s * n.sqrt() * (1.0 - 0.5 * e2) - 0.5 * r * e2,
        variance: 0.5 * e2 * e2 + s * r * 2.0 * e2 * e2 / n.sqrt(),
        mean_std_error: None,
        variance_std_error: None,
    }
}

/// Loose-trap leading behaviour (ε → 0):
/// mean = ±√(N/2)(1 − 1/(16N)) + r/2, variance = 1/8 ± 3r/(4√(2N)).
///
/// Two deliberate departures from the ε → 0 limit of
/// [`series_sideband`], kept as printed rather than reconciled: the
/// recoil offset enters with the opposite sign (+r/2 against −r/2), and
/// the leading variance is 1/8 where the series gives 1/16.
pub fn loose_limit(side: Side, params: &SystemParams) -> SidebandPrediction {
    let s = side_sign(side);
    let n = params.n_atoms as f64;
    let r = params.recoil_ratio;
    SidebandPrediction {
        side,
        method: PredictionMethod::LooseLimit,
        mean: s * (n / 2.0).sqrt() * (1.0 - 1.0 / (16.0 * n)) + 0.5 * r,
        variance: 0.125 + s * r * 3.0 / (4.0 * (2.0 * n).sqrt()),
        mean_std_error: None,
        variance_std_error: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn params(n: usize, eta: f64, r: f64) -> SystemParams {
        SystemParams::new(n, eta, r).unwrap()
    }

    #[test]
    fn chi2_estimate_matches_closed_form() {
        // ⟨χ²⟩ = N(1+ε)/2 holds at every N.
        let p = params(5, 0.5, 0.0);
        let m = mc_moments(&p, 100_000, 7).unwrap();
        let exact = 5.0 * (1.0 + p.epsilon) / 2.0;
        assert!(
            (m.e_chi2.value - exact).abs() <= 3.0 * m.e_chi2.std_error,
            "chi2 {} vs {exact}, se {}",
            m.e_chi2.value,
            m.e_chi2.std_error
        );
        assert_eq!(m.n_clipped, 0);
    }

    #[test]
    fn zeta_is_exactly_zero_for_one_atom() {
        let m = mc_moments(&params(1, 0.8, 0.01), 20_000, 3).unwrap();
        assert_eq!(m.e_zeta.value, 0.0);
        assert_eq!(m.e_zeta.std_error, 0.0);
        assert_eq!(m.e_zeta_winsorized.value, 0.0);
        assert_eq!(m.e_zeta_chi.value, 0.0);
        assert_eq!(m.e_zeta_chi2.value, 0.0);
    }

    #[test]
    fn winsorized_zeta_equals_plain_zeta_when_nothing_clips() {
        let m = mc_moments(&params(4, 0.6, 0.0), 50_000, 11).unwrap();
        assert_eq!(m.n_clipped, 0);
        assert_eq!(m.e_zeta_winsorized.value, m.e_zeta.value);
        assert_eq!(m.e_zeta_winsorized.std_error, m.e_zeta.std_error);
    }

    #[test]
    fn large_n_moments_match_leading_order() {
        // N = 100, ε = 0.5: ⟨χ⟩ → √(N(1+ε)/2)(1 − (1−ε)²/16N),
        // ⟨ζ⟩ → −(1−ε)/(1+ε), with O(1/N) corrections on ζ.
        let p = SystemParams::from_epsilon(100, 0.5, 0.0).unwrap();
        let m = mc_moments(&p, 200_000, 17).unwrap();
        let chi_series = (100.0 * 0.75f64).sqrt() * (1.0 - 0.25 / 1600.0);
        assert_relative_eq!(m.e_chi.value, chi_series, max_relative = 5e-3);
        let zeta_leading = -0.5 / 1.5;
        assert_relative_eq!(m.e_zeta.value, zeta_leading, max_relative = 1e-2);
    }

    #[test]
    fn single_atom_chi_matches_quadrature() {
        // N = 1: ⟨χ⟩ = ⟨|cos u|⟩ against direct quadrature.
        let eta = 0.9f64;
        let p = params(1, eta, 0.0);
        let m = mc_moments(&p, 200_000, 5).unwrap();
        let steps = 400_001;
        let half = 10.0 * eta;
        let h = 2.0 * half / (steps - 1) as f64;
        let norm = 1.0 / (eta * (2.0 * std::f64::consts::PI).sqrt());
        let mut quad = 0.0;
        for i in 0..steps {
            let u: f64 = -half + i as f64 * h;
            let w = if i == 0 || i == steps - 1 { 0.5 } else { 1.0 };
            quad += w * u.cos().abs() * norm * (-0.5 * (u / eta) * (u / eta)).exp();
        }
        quad *= h;
        assert!(
            (m.e_chi.value - quad).abs() <= 3.0 * m.e_chi.std_error + 1e-6,
            "mc {} vs quadrature {quad}, se {}",
            m.e_chi.value,
            m.e_chi.std_error
        );
    }

    #[test]
    fn same_seed_is_bitwise_reproducible_across_pools() {
        let p = params(3, 0.5, 0.02);
        let a = mc_moments(&p, 10_000, 42).unwrap();
        let b = mc_moments(&p, 10_000, 42).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_moments(&p, 10_000, 42).unwrap());
        for m in [&b, &single] {
            assert_eq!(a.e_chi, m.e_chi);
            assert_eq!(a.e_chi2, m.e_chi2);
            assert_eq!(a.e_zeta, m.e_zeta);
            assert_eq!(a.e_zeta_chi, m.e_zeta_chi);
            assert_eq!(a.e_zeta_chi2, m.e_zeta_chi2);
            assert_eq!(a.e_zeta_winsorized, m.e_zeta_winsorized);
            assert_eq!(a.n_clipped, m.n_clipped);
        }
        let c = mc_moments(&p, 10_000, 43).unwrap();
        assert_ne!(a.e_chi.value, c.e_chi.value);
    }

    #[test]
    fn mc_and_series_agree_at_large_n() {
        let p = SystemParams::from_epsilon(60, 0.4, 0.0).unwrap();
        let m = mc_moments(&p, 100_000, 23).unwrap();
        for side in [Side::Red, Side::Blue] {
            let mc = perturbative_sideband(side, &p, &m).unwrap();
            let series = series_sideband(side, &p);
            assert!(
                (mc.mean - series.mean).abs() <= 3.0 * mc.mean_std_error.unwrap(),
                "{side:?} mean: mc {} vs series {}",
                mc.mean,
                series.mean
            );
            assert!(
                (mc.variance - series.variance).abs() <= 3.0 * mc.variance_std_error.unwrap(),
                "{side:?} variance: mc {} vs series {}",
                mc.variance,
                series.variance
            );
        }
    }

    #[test]
    fn recoil_free_predictions_are_symmetric() {
        let p = params(6, 0.5, 0.0);
        let m = mc_moments(&p, 20_000, 2).unwrap();
        let red = perturbative_sideband(Side::Red, &p, &m).unwrap();
        let blue = perturbative_sideband(Side::Blue, &p, &m).unwrap();
        assert_eq!(red.mean, -blue.mean);
        assert_eq!(red.variance, blue.variance);
        let sred = series_sideband(Side::Red, &p);
        let sblue = series_sideband(Side::Blue, &p);
        assert_eq!(sred.mean, -sblue.mean);
        assert_eq!(sred.variance, sblue.variance);
    }

    #[test]
    fn blue_sideband_is_wider_than_red() {
        let p = params(20, 0.5, 0.05);
        let m = mc_moments(&p, 50_000, 9).unwrap();
        let red = perturbative_sideband(Side::Red, &p, &m).unwrap();
        let blue = perturbative_sideband(Side::Blue, &p, &m).unwrap();
        assert!(blue.variance > red.variance, "{} vs {}", blue.variance, red.variance);
        let sred = series_sideband(Side::Red, &p);
        let sblue = series_sideband(Side::Blue, &p);
        assert!(sblue.variance > sred.variance);
    }

    #[test]
    fn zeta_is_insensitive_to_cutoff_for_three_atoms() {
        // At N ≥ 3 the nodal region carries negligible ζ mass; a 100×
        // cutoff change must stay within one combined error bar.
        let p = params(3, 0.5, 0.0);
        let a = mc_moments_with_cutoff(&p, 100_000, 31, 3e-6).unwrap();
        let b = mc_moments_with_cutoff(&p, 100_000, 31, 3e-4).unwrap();
        let tol = a.e_zeta.std_error.hypot(b.e_zeta.std_error);
        assert!(
            (a.e_zeta.value - b.e_zeta.value).abs() <= tol,
            "zeta moved {} vs {} under cutoff change (tol {tol})",
            a.e_zeta.value,
            b.e_zeta.value
        );
    }

    #[test]
    fn degenerate_chi_is_refused() {
        let p = params(2, 0.5, 0.01);
        let noise = Estimate { value: 0.0, std_error: 0.0 };
        let m = MomentEstimates {
            e_chi: Estimate { value: 1e-7, std_error: 1e-7 },
            e_chi2: noise,
            e_zeta: noise,
            e_zeta_chi: noise,
            e_zeta_chi2: noise,
            e_zeta_winsorized: noise,
            n_samples: 1000,
            n_clipped: 0,
            cutoff: 1e-6,
        };
        let err = perturbative_sideband(Side::Red, &p, &m).unwrap_err();
        assert!(matches!(err, Error::DegenerateEstimate { .. }), "{err}");
        assert!(err.to_string().contains("e_chi"), "{err}");
    }

    #[test]
    fn too_few_samples_are_refused() {
        let err = mc_moments(&params(1, 0.5, 0.0), 999, 1).unwrap_err();
        assert!(matches!(err, Error::MonteCarlo(_)), "{err}");
        // Requests round up to whole batches.
        let m = mc_moments(&params(1, 0.5, 0.0), 1001, 1).unwrap();
        assert_eq!(m.n_samples, 1100);
    }

    #[test]
    fn series_is_exact_in_the_fixed_atom_limit() {
        let p = SystemParams::from_epsilon(7, 1.0, 0.3).unwrap();
        let blue = series_sideband(Side::Blue, &p);
        assert_eq!(blue.mean, 7f64.sqrt());
        assert_eq!(blue.variance, 0.0);
        let red = series_sideband(Side::Red, &p);
        assert_eq!(red.mean, -(7f64.sqrt()));
    }

    #[test]
    fn series_and_loose_limit_split_as_documented() {
        // At ε → 0 and r = 0 the means agree; the variances differ by the
        // intended factor of two and the recoil offsets differ in sign.
        let n = 12;
        let p0 = SystemParams::from_epsilon(n, 1e-12, 0.0).unwrap();
        let series = series_sideband(Side::Blue, &p0);
        let loose = loose_limit(Side::Blue, &p0);
        assert_relative_eq!(series.mean, loose.mean, max_relative = 1e-9);
        assert_relative_eq!(series.variance, 0.0625, max_relative = 1e-9);
        assert_eq!(loose.variance, 0.125);

        let pr = SystemParams::from_epsilon(n, 1e-12, 0.2).unwrap();
        let series_r = series_sideband(Side::Blue, &pr);
        let loose_r = loose_limit(Side::Blue, &pr);
        let series_offset = series_r.mean - series.mean;
        let loose_offset = loose_r.mean - loose.mean;
        assert_relative_eq!(series_offset, -0.1, max_relative = 1e-9);
        assert_relative_eq!(loose_offset, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn tight_limit_agrees_with_series_for_stiff_traps() {
        let p = params(4, 0.05, 0.1);
        for side in [Side::Red, Side::Blue] {
            let series = series_sideband(side, &p);
            let tight = tight_limit(side, &p);
            assert_abs_diff_eq!(series.mean, tight.mean, epsilon = 1e-4);
            assert_abs_diff_eq!(series.variance, tight.variance, epsilon = 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn estimates_respect_sample_bounds(
            n in 1usize..6,
            eta in 0.2f64..1.2,
            seed in 0u64..1000,
        ) {
            let p = params(n, eta, 0.0);
            let m = mc_moments(&p, 2000, seed).unwrap();
            // χ ∈ (0, √N] sample-wise, so the pooled means inherit the
            // bounds and Cauchy-Schwarz ties the two.
            prop_assert!(m.e_chi.value > 0.0);
            prop_assert!(m.e_chi2.value <= n as f64 * (1.0 + 1e-12));
            prop_assert!(m.e_chi.value * m.e_chi.value <= m.e_chi2.value * (1.0 + 1e-12));
            prop_assert!(m.e_zeta.value < 1.0);
            if m.n_clipped == 0 {
                prop_assert_eq!(m.e_zeta_winsorized.value, m.e_zeta.value);
            }
        }
    }
}
