//! End-to-end invariant suite behind `cavspec validate`.
//!
//! Exercises the cross-checks that tie the independent routes together:
//! matrix elements against quadrature, sum rules against Gaussian
//! identities, Lanczos against dense diagonalization, Fock against grid,
//! Monte Carlo against the closed-form series, and the counting
//! endpoints. Prints one ok/FAIL line per check and returns the tally;
//! the CLI exits nonzero if anything failed.

use crate::counting::{figure3_sweep, figure4_sweep, n_max, separation};
use crate::error::Result;
use crate::hamiltonian::{assemble, cos_matrix_fock, initial_state, MotionalBasis};
use crate::moments::{mc_moments, mc_moments_with_cutoff, perturbative_sideband, series_sideband};
use crate::params::SystemParams;
use crate::spectra::{
    convolve, lanczos_spectrum, split_sidebands, stick_spectrum, GridRange, Side, SpectrumOrigin,
    StickSpectrum,
};

/// One line of the validation table.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
}

/// Outcome of [`run_suite`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }
}

/// Loose-trap width comparison: the Monte Carlo Var(χ) at N = 200,
/// ε = 0.05 against the two closed-form candidates for the variance
/// prefactor. `winner` is set when exactly one candidate lies within 5%.
#[derive(Debug, Clone, Copy)]
pub struct LooseWidthAdjudication {
    pub mc_variance: f64,
    /// (1−ε)²(1+ε)/16 evaluated at ε = 0.05.
    pub series_form: f64,
    /// The flat 1/8 alternative.
    pub flat_form: f64,
    pub winner: Option<&'static str>,
}

pub const SERIES_WINNER: &str = "series prefactor (1-eps)^2 (1+eps)/16";
pub const FLAT_WINNER: &str = "flat prefactor 1/8";

/// Decide the loose-trap variance prefactor by direct sampling.
pub fn adjudicate_loose_width(seed: u64, n_samples: u64) -> Result<LooseWidthAdjudication> {
    let p = SystemParams::from_epsilon(200, 0.05, 0.0)?;
    let m = mc_moments(&p, n_samples, seed)?;
    // Pooled sample variance of χ; the closed forms are per-sideband
    // variances in g², which reduce to Var(χ) at r = 0.
    let mc_variance = m.e_chi2.value - m.e_chi.value * m.e_chi.value;
    let series_form = (1.0 - 0.05f64).powi(2) * (1.0 + 0.05) / 16.0;
    let flat_form = 0.125;
    let near = |target: f64| (mc_variance - target).abs() <= 0.05 * target;
    let winner = match (near(series_form), near(flat_form)) {
        (true, false) => Some(SERIES_WINNER),
        (false, true) => Some(FLAT_WINNER),
        _ => None,
    };
    Ok(LooseWidthAdjudication { mc_variance, series_form, flat_form, winner })
}

struct Harness {
    checks: Vec<CheckResult>,
}

impl Harness {
    fn check(&mut self, name: &str, passed: bool) {
        println!("  [{}] {name}", if passed { " ok " } else { "FAIL" });
        self.checks.push(CheckResult { name: name.to_string(), passed });
    }

    fn check_close(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let err = (value - target).abs();
        self.check(&format!("{name} (|{value:.6e} - {target:.6e}| = {err:.2e} <= {tol:.1e})"),
            err <= tol);
    }

    fn fail_with(&mut self, name: &str, err: &crate::error::Error) {
        println!("  error: {err}");
        self.check(name, false);
    }
}

/// Run every cross-check; `seed` drives the Monte Carlo sections.
pub fn run_suite(seed: u64) -> ValidationReport {
    let mut h = Harness { checks: Vec::new() };
    check_cos_matrix(&mut h);
    check_dimensions(&mut h);
    check_fixed_atom_recovery(&mut h);
    check_sum_rules(&mut h);
    check_lanczos_vs_dense(&mut h);
    check_backends_agree(&mut h);
    check_recoil_free_symmetry(&mut h);
    check_sideband_weights(&mut h);
    check_convolution(&mut h);
    check_mc_basics(&mut h, seed);
    check_mc_vs_series(&mut h, seed);
    check_exact_vs_perturbative(&mut h, seed);
    check_loose_width_adjudication(&mut h, seed);
    report_two_atom_cutoff_sensitivity(seed);
    check_counting_endpoints(&mut h);
    check_band_sweep(&mut h);
    check_ceiling_sweep(&mut h);

    println!();
    let passed = h.checks.iter().filter(|c| c.passed).count();
    println!("validate: {passed}/{} checks passed", h.checks.len());
    ValidationReport { checks: h.checks }
}

/// Ground column of cos(η(a+a†)) against its closed form, and the
/// truncated column norm against the Gaussian identity ⟨cos²u⟩ = (1+ε)/2.
fn check_cos_matrix(h: &mut Harness) {
    println!("[1] cosine matrix elements");
    let eta = 0.6f64;
    let dim = 14;
    let mat = cos_matrix_fock(eta, dim);
    let x = eta * eta;
    let mut worst = 0.0f64;
    for s in 0..(dim / 2) {
        let mut ln_fact = 0.0;
        for k in 1..=(2 * s) {
            ln_fact += (k as f64).ln();
        }
        let closed = if s % 2 == 0 { 1.0 } else { -1.0 }
            * (-0.5 * x + s as f64 * x.ln() - 0.5 * ln_fact).exp();
        worst = worst.max((mat[(2 * s, 0)] - closed).abs());
    }
    h.check_close("ground column matches closed form", worst, 0.0, 1e-12);

    let kept: f64 = (0..dim).map(|m| mat[(m, 0)] * mat[(m, 0)]).sum();
    let leak = crate::hamiltonian::ground_column_leak(eta, dim);
    let target = (1.0 + (-2.0 * x).exp()) / 2.0;
    h.check_close("column norm + leak reproduces (1+eps)/2", kept + leak * leak, target, 1e-10);

    let ident = cos_matrix_fock(0.0, 6);
    h.check("eta = 0 gives the identity", ident == nalgebra::DMatrix::identity(6, 6));
}

fn check_dimensions(h: &mut Harness) {
    println!("[2] basis bookkeeping");
    let full = (|| -> Result<(usize, f64, f64)> {
        let p = SystemParams::new(1, 0.1, 0.01)?;
        // Quanta 0..=n_max_fock, so the default cap of 40 gives 41 states
        // per atom and a (1+1)·41 = 82 dimensional manifold.
        let basis = MotionalBasis::fock_fixed(&p, p.n_max_fock + 1)?;
        let op = assemble(&p, &basis)?;
        let psi = initial_state(&p, &basis)?;
        let sticks = stick_spectrum(&op, &psi)?;
        let weighted: Vec<f64> = sticks
            .lines()
            .iter()
            .filter(|&&(_, w)| w > 1e-3)
            .map(|&(omega, _)| omega)
            .collect();
        let lo = weighted.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = weighted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((basis.total_dim, lo, hi))
    })();
    match full {
        Ok((dim, lo, hi)) => {
            h.check("40-quanta Fock manifold is 82 dimensional at N = 1", dim == 82);
            h.check(
                "extremal weighted eigenvalues sit near -g and +g",
                (lo + 1.0).abs() < 0.02 && (hi - 1.0).abs() < 0.02,
            );
        }
        Err(e) => h.fail_with("40-quanta Fock manifold is 82 dimensional at N = 1", &e),
    }
    match SystemParams::new(1, 0.1, 0.01).and_then(|p| MotionalBasis::fock_auto(&p)) {
        Ok(basis) => {
            println!("  N=1, eta=0.1 auto truncation: total dim {}", basis.total_dim);
            h.check("auto truncation stops far below the cap", basis.total_dim == 14);
        }
        Err(e) => h.fail_with("auto truncation stops far below the cap", &e),
    }
    match SystemParams::new(2, 0.5, 0.01)
        .and_then(|p| Ok((MotionalBasis::fock_auto(&p)?, p)))
        .and_then(|(b, p)| assemble(&p, &b))
    {
        Ok(op) => h.check("assembled operator is exactly symmetric", op.matrix.asymmetry() == 0.0),
        Err(e) => h.fail_with("assembled operator is exactly symmetric", &e),
    }
}

/// Stiff traps pin the sticks at ±√N with half the weight on each side.
fn check_fixed_atom_recovery(h: &mut Harness) {
    println!("[3] fixed-atom recovery at eta = 0.01");
    for n in 1..=3usize {
        let name = format!("N = {n}: dominant lines at +/-sqrt(N), sides 0.5");
        let outcome = (|| -> Result<(f64, f64, f64, f64)> {
            let p = SystemParams::new(n, 0.01, 0.01)?;
            let basis = MotionalBasis::fock_auto(&p)?;
            let op = assemble(&p, &basis)?;
            let psi = initial_state(&p, &basis)?;
            let sticks = stick_spectrum(&op, &psi)?;
            let (red, blue) = split_sidebands(&sticks);
            let top = |side: Side| {
                sticks
                    .lines()
                    .iter()
                    .filter(|l| if side == Side::Red { l.0 < 0.0 } else { l.0 > 0.0 })
                    .cloned()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap_or((f64::NAN, 0.0))
            };
            let (o_red, w_red) = top(Side::Red);
            let (o_blue, w_blue) = top(Side::Blue);
            println!(
                "  N={n}: lines {o_red:.4} ({w_red:.4}) / {o_blue:.4} ({w_blue:.4}), \
                 sides {:.4}/{:.4}",
                red.total_weight, blue.total_weight
            );
            let shift = (n as f64).sqrt();
            let ok = (o_red + shift).abs() < 1e-2
                && (o_blue - shift).abs() < 1e-2
                && w_red + w_blue > 0.99
                && (red.total_weight - 0.5).abs() < 0.01
                && (blue.total_weight - 0.5).abs() < 0.01;
            Ok(if ok { (0.0, 0.0, 0.0, 0.0) } else { (f64::NAN, 0.0, 0.0, 0.0) })
        })();
        match outcome {
            Ok((flag, ..)) => h.check(&name, flag == 0.0),
            Err(e) => h.fail_with(&name, &e),
        }
    }
}

/// Weight, mean and variance sum rules on exact spectra.
fn check_sum_rules(h: &mut Harness) {
    println!("[4] spectral sum rules");
    for n in [1usize, 2] {
        for eps in [0.2, 0.5, 0.9] {
            let name = format!("N = {n}, eps = {eps}: weight/mean/variance rules");
            let outcome = (|| -> Result<bool> {
                let p = SystemParams::from_epsilon(n, eps, 0.02)?;
                let basis = MotionalBasis::fock_auto(&p)?;
                let op = assemble(&p, &basis)?;
                let psi = initial_state(&p, &basis)?;
                let sticks = stick_spectrum(&op, &psi)?;
                let w: f64 = sticks.total_weight();
                let mean: f64 = sticks.lines().iter().map(|l| l.0 * l.1).sum();
                let var: f64 = sticks.lines().iter().map(|l| l.0 * l.0 * l.1).sum::<f64>()
                    - mean * mean;
                let target = n as f64 * (1.0 + eps) / 2.0;
                println!(
                    "  N={n} eps={eps}: |sum w - 1| = {:.1e}, |mean| = {:.1e}, \
                     var rel err = {:.1e}",
                    (w - 1.0).abs(),
                    mean.abs(),
                    ((var - target) / target).abs()
                );
                Ok((w - 1.0).abs() < 1e-9
                    && mean.abs() < 1e-8
                    && ((var - target) / target).abs() < 1e-6)
            })();
            match outcome {
                Ok(ok) => h.check(&name, ok),
                Err(e) => h.fail_with(&name, &e),
            }
        }
    }
}

/// Full-depth Lanczos reproduces the dense lines.
fn check_lanczos_vs_dense(h: &mut Harness) {
    println!("[5] Lanczos against dense diagonalization");
    let name = "full-depth Lanczos matches dense lines to 1e-8";
    let outcome = (|| -> Result<f64> {
        let p = SystemParams::new(1, 0.5, 0.02)?;
        let basis = MotionalBasis::fock_auto(&p)?;
        let op = assemble(&p, &basis)?;
        let psi = initial_state(&p, &basis)?;
        let dense = stick_spectrum(&op, &psi)?;
        let lanczos = lanczos_spectrum(&op, &psi, op.dim())?;
        Ok(worst_line_gap(&dense, &lanczos, 5))
    })();
    match outcome {
        Ok(gap) => h.check_close(name, gap, 0.0, 1e-8),
        Err(e) => h.fail_with(name, &e),
    }
}

/// Fock and grid backends agree on the strong lines. The oscillator side
/// runs in a deep fixed basis: the upper branch spreads states far beyond
/// the ground-state width, while auto truncation only targets
/// initial-state fidelity.
fn check_backends_agree(h: &mut Harness) {
    println!("[6] Fock and grid backends");
    let name = "leading five lines agree across backends to 1e-8";
    let outcome = (|| -> Result<f64> {
        let p = SystemParams::new(1, 0.5, 0.02)?;
        let fock = {
            let basis = MotionalBasis::fock_fixed(&p, 140)?;
            let op = assemble(&p, &basis)?;
            stick_spectrum(&op, &initial_state(&p, &basis)?)?
        };
        let grid = {
            let basis = MotionalBasis::grid(&p)?;
            let op = assemble(&p, &basis)?;
            stick_spectrum(&op, &initial_state(&p, &basis)?)?
        };
        Ok(worst_line_gap(&fock, &grid, 5))
    })();
    match outcome {
        Ok(gap) => h.check_close(name, gap, 0.0, 1e-8),
        Err(e) => h.fail_with(name, &e),
    }
}

/// Largest (ω, w) mismatch between the `count` strongest lines of `a` and
/// each one's nearest line of `b`.
fn worst_line_gap(a: &StickSpectrum, b: &StickSpectrum, count: usize) -> f64 {
    let mut strongest: Vec<(f64, f64)> = a.lines().to_vec();
    strongest.sort_by(|x, y| y.1.total_cmp(&x.1));
    strongest
        .iter()
        .take(count)
        .map(|&(o, w)| {
            b.lines()
                .iter()
                .map(|&(bo, bw)| (o - bo).abs().max((w - bw).abs()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Without recoil the spectrum is symmetric about the resonance.
fn check_recoil_free_symmetry(h: &mut Harness) {
    println!("[7] recoil-free symmetry");
    let name = "r = 0 sidebands mirror to 1e-8";
    let outcome = (|| -> Result<bool> {
        let p = SystemParams::new(2, 0.4, 0.0)?;
        let basis = MotionalBasis::fock_auto(&p)?;
        let op = assemble(&p, &basis)?;
        let sticks = stick_spectrum(&op, &initial_state(&p, &basis)?)?;
        let (red, blue) = split_sidebands(&sticks);
        println!(
            "  mean sum {:.2e}, weight gap {:.2e}",
            (red.mean + blue.mean).abs(),
            (red.total_weight - blue.total_weight).abs()
        );
        Ok((red.mean + blue.mean).abs() < 1e-8
            && (red.total_weight - blue.total_weight).abs() < 1e-9)
    })();
    match outcome {
        Ok(ok) => h.check(name, ok),
        Err(e) => h.fail_with(name, &e),
    }
}

/// Small recoil shifts weight between the sidebands only slightly.
fn check_sideband_weights(h: &mut Harness) {
    println!("[8] sideband weights at small recoil");
    let name = "weight asymmetry below 0.02 at r = 0.01";
    let outcome = (|| -> Result<bool> {
        let p = SystemParams::new(2, 0.5, 0.01)?;
        let basis = MotionalBasis::fock_auto(&p)?;
        let op = assemble(&p, &basis)?;
        let sticks = stick_spectrum(&op, &initial_state(&p, &basis)?)?;
        let (red, blue) = split_sidebands(&sticks);
        println!("  |w_red - w_blue| = {:.3e}", (red.total_weight - blue.total_weight).abs());
        Ok((red.total_weight - blue.total_weight).abs() < 0.02)
    })();
    match outcome {
        Ok(ok) => h.check(name, ok),
        Err(e) => h.fail_with(name, &e),
    }
}

/// Lorentzian kernel: unit line gives peak 1/(πκ′) and the finite-window
/// mass follows the arctangent law.
fn check_convolution(h: &mut Harness) {
    println!("[9] Lorentzian convolution");
    let outcome = (|| -> Result<(f64, f64)> {
        let line = StickSpectrum::from_lines(vec![(0.0, 1.0)], SpectrumOrigin::TavisCummings);
        let kappa = 0.1;
        let b = convolve(&line, kappa, &GridRange { min: -2.0, max: 2.0, points: 4001 })?;
        let peak = b.intensity.iter().cloned().fold(0.0, f64::max);
        Ok((peak, b.integral()))
    })();
    match outcome {
        Ok((peak, mass)) => {
            h.check_close(
                "peak height is 1/(pi kappa)",
                peak,
                1.0 / (std::f64::consts::PI * 0.1),
                1e-9,
            );
            let expected = 2.0 / std::f64::consts::PI * 20.0f64.atan();
            h.check_close("mass inside +/-20 widths is (2/pi) atan(20)", mass, expected, 1e-4);
        }
        Err(e) => h.fail_with("Lorentzian convolution", &e),
    }
}

/// Monte Carlo pillars: the exact second moment, seed determinism, and
/// the identically-zero ζ at N = 1.
fn check_mc_basics(h: &mut Harness, seed: u64) {
    println!("[10] Monte Carlo groundwork");
    match SystemParams::new(5, 0.5, 0.0).and_then(|p| {
        let a = mc_moments(&p, 200_000, seed)?;
        let b = mc_moments(&p, 200_000, seed)?;
        Ok((p, a, b))
    }) {
        Ok((p, a, b)) => {
            let target = 5.0 * (1.0 + p.epsilon) / 2.0;
            println!(
                "  <chi^2> = {:.6} +/- {:.1e} against {target:.6}",
                a.e_chi2.value, a.e_chi2.std_error
            );
            h.check(
                "second moment matches N(1+eps)/2 within 3 sigma",
                (a.e_chi2.value - target).abs() <= 3.0 * a.e_chi2.std_error,
            );
            h.check(
                "same seed reproduces bitwise",
                a.e_chi == b.e_chi && a.e_zeta_chi2 == b.e_zeta_chi2,
            );
        }
        Err(e) => h.fail_with("Monte Carlo groundwork", &e),
    }
    match SystemParams::new(1, 0.8, 0.0).and_then(|p| mc_moments(&p, 50_000, seed)) {
        Ok(m) => h.check("zeta vanishes identically at N = 1", m.e_zeta.value == 0.0),
        Err(e) => h.fail_with("zeta vanishes identically at N = 1", &e),
    }
}

/// Sampled sideband means against the closed-form series at N = 100.
fn check_mc_vs_series(h: &mut Harness, seed: u64) {
    println!("[11] Monte Carlo against the 1/N series");
    let name = "sideband means agree within 0.5% at N = 100";
    let outcome = (|| -> Result<bool> {
        let p = SystemParams::from_epsilon(100, 0.5, 0.0)?;
        let m = mc_moments(&p, 200_000, seed)?;
        let mut ok = true;
        for side in [Side::Red, Side::Blue] {
            let mc = perturbative_sideband(side, &p, &m)?;
            let series = series_sideband(side, &p);
            let rel = ((mc.mean - series.mean) / series.mean).abs();
            println!("  {side:?}: mc {:.5}, series {:.5}, rel {:.2e}", mc.mean, series.mean, rel);
            ok &= rel < 5e-3;
        }
        Ok(ok)
    })();
    match outcome {
        Ok(ok) => h.check(name, ok),
        Err(e) => h.fail_with(name, &e),
    }
}

/// Operator route against the moment route at N = 2.
fn check_exact_vs_perturbative(h: &mut Harness, seed: u64) {
    println!("[12] exact diagonalization against perturbative moments");
    let name = "red means agree within 0.05 g at N = 2";
    let outcome = (|| -> Result<bool> {
        let p = SystemParams::from_epsilon(2, 0.5, 0.01)?;
        let basis = MotionalBasis::fock_auto(&p)?;
        let op = assemble(&p, &basis)?;
        let sticks = stick_spectrum(&op, &initial_state(&p, &basis)?)?;
        let (red, _) = split_sidebands(&sticks);
        let m = mc_moments(&p, 400_000, seed)?;
        let predicted = perturbative_sideband(Side::Red, &p, &m)?;
        println!("  spectrum {:.5}, perturbative {:.5}", red.mean, predicted.mean);
        Ok((red.mean - predicted.mean).abs() < 0.05)
    })();
    match outcome {
        Ok(ok) => h.check(name, ok),
        Err(e) => h.fail_with(name, &e),
    }
}

/// Decide the loose-trap variance prefactor and name the winner.
fn check_loose_width_adjudication(h: &mut Harness, seed: u64) {
    println!("[13] loose-trap width adjudication at N = 200, eps = 0.05");
    match adjudicate_loose_width(seed, 400_000) {
        Ok(adj) => {
            println!(
                "  MC Var(chi) = {:.6}; candidates {:.6} / {:.6}",
                adj.mc_variance, adj.series_form, adj.flat_form
            );
            match adj.winner {
                Some(w) => println!("  winner: {w}"),
                None => println!("  winner: undecided"),
            }
            h.check("exactly one closed form within 5%", adj.winner.is_some());
        }
        Err(e) => h.fail_with("loose-trap width adjudication", &e),
    }
}

/// ζ at N = 2 has a log-divergent node tail; its cutoff sensitivity is
/// reported for the record, not asserted.
fn report_two_atom_cutoff_sensitivity(seed: u64) {
    println!("[14] two-atom zeta cutoff sensitivity (informational)");
    let run = |cutoff: f64| -> Result<(f64, f64)> {
        let p = SystemParams::new(2, 0.5, 0.0)?;
        let m = mc_moments_with_cutoff(&p, 200_000, seed, cutoff)?;
        Ok((m.e_zeta.value, m.e_zeta.std_error))
    };
    match (run(2e-6), run(2e-4)) {
        (Ok((a, se_a)), Ok((b, se_b))) => {
            let sigma = (a - b).abs() / se_a.hypot(se_b).max(f64::MIN_POSITIVE);
            println!("  cutoff 2e-6: <zeta> = {a:.5} +/- {se_a:.1e}");
            println!("  cutoff 2e-4: <zeta> = {b:.5} +/- {se_b:.1e}");
            println!("  shift = {sigma:.1} sigma (expected to drift: node tail is log-divergent)");
        }
        (Err(e), _) | (_, Err(e)) => println!("  error: {e}"),
    }
}

fn check_counting_endpoints(h: &mut Harness) {
    println!("[15] counting endpoints");
    match SystemParams::from_epsilon(1, 1.0, 0.01).and_then(|p| separation(1, &p)) {
        Ok(s) => {
            println!("  eps=1, N=1: exact {:.6}, asymptotic {}", s.exact, s.asymptotic);
            h.check_close(
                "fixed-atom separation is sqrt(2)-1",
                s.exact,
                std::f64::consts::SQRT_2 - 1.0,
                1e-12,
            );
            h.check("fixed-atom asymptotic separation is 1/2", s.asymptotic == 0.5);
        }
        Err(e) => h.fail_with("fixed-atom separation", &e),
    }
    match (n_max(1.0 - 1e-9, 0.1), n_max(1e-9, 0.1), n_max(0.0, 0.0)) {
        (Ok(tight), Ok(loose), Ok(free)) => {
            println!(
                "  ceilings: tight {:.4}, loose {:.4}, free {}",
                tight.value, loose.value, free.value
            );
            h.check_close("tight ceiling 1/(4 kappa^2)", tight.value, 25.0, 25.0 * 1e-3);
            h.check_close(
                "loose ceiling 1/(1/2 + 8 kappa^2)",
                loose.value,
                1.0 / 0.58,
                1.0 / 0.58 * 1e-3,
            );
            h.check("kappa = 0 at eps = 0 gives exactly 2", free.value == 2.0);
        }
        _ => h.check("counting ceilings evaluate", false),
    }
}

/// Band sweep structure: tight traps separate the N = 8, 9 bands, loose
/// traps merge them, and the crossover lies between.
fn check_band_sweep(h: &mut Harness) {
    println!("[16] band sweep (8 vs 9 atoms, r = 0.01)");
    let outcome = (|| -> Result<(bool, Option<f64>)> {
        let p = SystemParams::from_epsilon(8, 0.5, 0.01)?;
        let grid: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
        let fig = figure3_sweep(&p, (8, 9), &grid)?;
        let ok = fig.rows.iter().all(|row| {
            (row.epsilon < 0.95 || !row.overlap) && (row.epsilon > 0.2 || row.overlap)
        });
        Ok((ok, fig.crossover))
    })();
    match outcome {
        Ok((ok, crossover)) => {
            match crossover {
                Some(eps) => println!("  bands touch at eps = {eps:.4}"),
                None => println!("  no crossover inside the grid"),
            }
            h.check("bands separate when tight, merge when loose", ok);
            h.check(
                "crossover reported between the regimes",
                crossover.map(|e| e > 0.2 && e < 0.95).unwrap_or(false),
            );
        }
        Err(e) => h.fail_with("band sweep", &e),
    }
}

/// Counting-ceiling sweep: κ′ = 0 column is the exact closed form and
/// every column rises with ε.
fn check_ceiling_sweep(h: &mut Harness) {
    println!("[17] ceiling sweep");
    let grid: Vec<f64> = (0..50).map(|i| 0.01 + i as f64 * 0.02).collect();
    match figure4_sweep(&[0.0, 0.05, 0.1, 0.2], &grid) {
        Ok(fig) => {
            let pinned = fig.rows.iter().all(|row| {
                let w = 1.0 - row.epsilon;
                row.n_max[0] == 2.0 / (w * w)
            });
            h.check("kappa = 0 column equals 2/(1-eps)^2 exactly", pinned);
            h.check("every column rises with eps", fig.monotone_columns().iter().all(|&m| m));
        }
        Err(e) => h.fail_with("ceiling sweep", &e),
    }
}
