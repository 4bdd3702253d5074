//! Single-excitation manifold Hamiltonian over a truncated motional basis.
//!
//! The manifold holds one shared excitation: internal index 0 is the cavity
//! photon, index i ∈ 1..=N is atom i excited. Each internal sector carries
//! the full N-atom motional product space, so the operator dimension is
//! (N+1)·per_atom_dim^N. In units of g the blocks are
//!
//! - diagonal: the trap energy Σ_i ν(n_i + 1/2) with ν = r/η²,
//! - off-diagonal: cos(u_i) coupling sector 0 to sector i.
//!
//! Two interchangeable motional backends:
//!
//! - Fock: per-atom oscillator eigenstates. The initial state is exact and
//!   the cosine enters through its analytic matrix elements.
//! - grid: sinc-collocation points on u ∈ [−L, L]. The cosine is diagonal,
//!   the kinetic term is the standard sinc-DVR matrix, and the initial
//!   state is a sampled Gaussian.
//!
//! Energies are absolute within the manifold; `e_zero` carries the
//! zero-point reference E₀ = N·ν/2 (the empty-cavity resonance) that
//! spectra subtract.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::sparse::CsrMatrix;

/// Ground-column truncation target for the auto-sized Fock basis: the
/// smallest per-atom dimension whose lost ⟨m|cos|0⟩ tail norm is below this.
pub const FOCK_LEAK_TOL: f64 = 1e-8;
/// Maximum ground-state probability tolerated outside the grid box (and,
/// in momentum, outside the grid's representable band).
pub const GRID_MASS_TOL: f64 = 1e-8;
/// Assembly refuses operators above this many stored entries.
pub const NNZ_BUDGET: usize = 5_000_000;

/// Magic bytes heading the binary operator dump.
pub const DUMP_MAGIC: &[u8; 4] = b"CVSP";
/// Binary dump format version.
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisBackend {
    Fock,
    Grid,
}

/// Truncated motional discretization for all N atoms.
#[derive(Debug, Clone)]
pub struct MotionalBasis {
    pub backend: BasisBackend,
    pub n_atoms: usize,
    /// States (Fock) or points (grid) per atom.
    pub per_atom_dim: usize,
    /// (N+1)·per_atom_dim^N.
    pub total_dim: usize,
    grid: Option<GridAxis>,
}

#[derive(Debug, Clone)]
struct GridAxis {
    points: Vec<f64>,
    spacing: f64,
}

impl MotionalBasis {
    /// Fock basis sized by the ground-column rule: the smallest per-atom
    /// dimension d with [`ground_column_leak`]`(η, d)` < [`FOCK_LEAK_TOL`],
    /// capped at `n_max_fock + 1` states (occupations 0..=n_max_fock). The
    /// default cap of 40 quanta covers η ≤ 1 with room to spare.
    pub fn fock_auto(params: &SystemParams) -> Result<Self> {
        params.require_numeric()?;
        let cap = params.n_max_fock + 1;
        let mut d = 2;
        while d < cap && ground_column_leak(params.eta, d) >= FOCK_LEAK_TOL {
            d += 1;
        }
        Self::fock_fixed(params, d)
    }

    /// Fock basis with an explicit per-atom dimension (≥ 2).
    pub fn fock_fixed(params: &SystemParams, per_atom_dim: usize) -> Result<Self> {
        params.require_numeric()?;
        if per_atom_dim < 2 {
            return Err(Error::config("n_max_fock", "per-atom dimension must be ≥ 2"));
        }
        let total_dim = product_dim(params.n_atoms, per_atom_dim)?;
        Ok(Self {
            backend: BasisBackend::Fock,
            n_atoms: params.n_atoms,
            per_atom_dim,
            total_dim,
            grid: None,
        })
    }

    /// Position grid on u ∈ [−L, L] with `grid_points` midpoints per atom.
    ///
    /// Rejects boxes that truncate the motional ground state (position mass
    /// outside the box, or momentum mass beyond the grid's π/Δ cutoff,
    /// above [`GRID_MASS_TOL`]).
    pub fn grid(params: &SystemParams) -> Result<Self> {
        params.require_numeric()?;
        let p = params.grid_points;
        if p < 2 {
            return Err(Error::config("grid_points", "grid_points must be ≥ 2"));
        }
        let l = params.grid_halfwidth;
        let spacing = 2.0 * l / p as f64;
        let points: Vec<f64> =
            (0..p).map(|i| -l + (i as f64 + 0.5) * spacing).collect();

        let eta = params.eta;
        // Momentum check first: the grid represents |p| ≤ π/Δ and the
        // ground state has momentum spread 1/(2η), so too-coarse grids
        // alias. This check is analytic and must precede the position one,
        // whose midpoint sum is only trustworthy on a resolved grid.
        let p_max = std::f64::consts::PI / spacing;
        let aux = 4096;
        let dp = 2.0 * p_max / aux as f64;
        let p_norm = (2.0 * eta * eta / std::f64::consts::PI).sqrt();
        let p_mass_in: f64 = (0..aux)
            .map(|i| {
                let pk = -p_max + (i as f64 + 0.5) * dp;
                dp * p_norm * (-2.0 * eta * eta * pk * pk).exp()
            })
            .sum();
        let p_mass_outside = (1.0 - p_mass_in).max(0.0);
        if p_mass_outside > GRID_MASS_TOL {
            return Err(Error::config(
                "grid_points",
                format!(
                    "momentum cutoff π/Δ = {p_max:.3} leaves ground-state mass \
                     {p_mass_outside:.2e} unrepresented; increase grid_points \
                     or decrease grid_halfwidth"
                ),
            ));
        }
        // Position check: discrete mass of the normalized ground density
        // inside the box. On a resolved grid the midpoint sum matches the
        // integral to machine precision, so the deficit is the tail.
        let norm = 1.0 / (2.0 * std::f64::consts::PI * eta * eta).sqrt();
        let mass_in: f64 = points
            .iter()
            .map(|&u| spacing * norm * (-u * u / (2.0 * eta * eta)).exp())
            .sum();
        let mass_outside = (1.0 - mass_in).max(0.0);
        if mass_outside > GRID_MASS_TOL {
            return Err(Error::GridBoxTooSmall { halfwidth: l, mass_outside });
        }

        let total_dim = product_dim(params.n_atoms, p)?;
        Ok(Self {
            backend: BasisBackend::Grid,
            n_atoms: params.n_atoms,
            per_atom_dim: p,
            total_dim,
            grid: Some(GridAxis { points, spacing }),
        })
    }

    /// Grid coordinates (grid backend only).
    pub fn grid_points(&self) -> Option<&[f64]> {
        self.grid.as_ref().map(|g| g.points.as_slice())
    }

    /// Motional product dimension per internal sector.
    pub fn sector_dim(&self) -> usize {
        self.total_dim / (self.n_atoms + 1)
    }
}

fn product_dim(n_atoms: usize, per_atom_dim: usize) -> Result<usize> {
    per_atom_dim
        .checked_pow(n_atoms as u32)
        .and_then(|d| d.checked_mul(n_atoms + 1))
        .ok_or_else(|| {
            Error::Dimension(format!(
                "motional product dimension overflows: {per_atom_dim}^{n_atoms} sectors"
            ))
        })
}

/// Norm of the ⟨m|cos(η(a+a†))|0⟩ column lost by truncating at `dim`
/// states: √(Σ_{m ≥ dim} e^{−η²} η^{2m}/m!), even m only. Computed as a
/// direct tail sum (no cancellation), in the log domain.
pub fn ground_column_leak(eta: f64, dim: usize) -> f64 {
    let x = eta * eta;
    if x == 0.0 {
        return 0.0;
    }
    let s0 = dim.div_ceil(2);
    let mut ln_fact = 0.0; // ln((2s)!)
    for k in 1..=(2 * s0) {
        ln_fact += (k as f64).ln();
    }
    let mut acc = 0.0f64;
    let mut s = s0;
    loop {
        let ln_term = -x + 4.0 * s as f64 * eta.ln() - ln_fact;
        let term = ln_term.exp();
        acc += term;
        if term < acc * 1e-20 + 1e-300 || s > s0 + 400 {
            break;
        }
        s += 1;
        ln_fact += ((2 * s - 1) as f64).ln() + ((2 * s) as f64).ln();
    }
    acc.sqrt()
}

/// Matrix of cos(η(a+a†)) in the oscillator eigenbasis.
///
/// Band m−n = 2s carries e^{−η²/2}(−1)^s η^{2s} √(n!/m!) L_n^{(2s)}(η²);
/// odd bands vanish by parity. Each band is generated by the orthonormal
/// associated-Laguerre three-term recurrence seeded in the log domain, so
/// no factorial ratio is ever formed explicitly and the construction is
/// stable far beyond 200 states.
pub fn cos_matrix_fock(eta: f64, dim: usize) -> DMatrix<f64> {
    assert!(dim >= 2, "cosine matrix needs at least two states");
    assert!(eta >= 0.0 && eta.is_finite(), "eta must be finite and ≥ 0");
    if eta == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let x = eta * eta;
    let mut ln_fact = vec![0.0f64; dim + 1];
    for k in 1..=dim {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let mut mat = DMatrix::zeros(dim, dim);
    let mut offset = 0usize;
    while offset < dim {
        let sign = if (offset / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        let log_start = -0.5 * x + offset as f64 * eta.ln() - 0.5 * ln_fact[offset];
        // Bands whose leading element underflows are identically zero.
        if log_start > -745.0 {
            let of = offset as f64;
            let mut prev = 0.0f64;
            let mut cur = log_start.exp();
            for n in 0..(dim - offset) {
                mat[(n + offset, n)] = sign * cur;
                mat[(n, n + offset)] = sign * cur;
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0 + of - x) * cur
                    - (nf * (nf + of)).sqrt() * prev)
                    / ((nf + 1.0) * (nf + 1.0 + of)).sqrt();
                prev = cur;
                cur = next;
            }
        }
        offset += 2;
    }
    mat
}

/// Assembled n_T = 1 manifold operator, in units of g.
#[derive(Debug, Clone)]
pub struct ManifoldOperator {
    pub matrix: CsrMatrix,
    pub basis: MotionalBasis,
    pub n_atoms: usize,
    /// Empty-cavity resonance E₀ = N·ν/2; spectra are reported relative
    /// to this.
    pub e_zero: f64,
}

impl ManifoldOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    /// Weight of a state on the local bright pair D±(u) (grid backend
    /// only): per grid configuration, the photon amplitude combines with
    /// the χ-normalized atomic amplitudes as (a₀ ± Σᵢ cos(uᵢ)aᵢ/χ)/√2.
    /// Configurations closer than 10⁻¹²·N to a collective node are
    /// skipped. Returns (plus_weight, minus_weight).
    pub fn bright_projection(&self, state: &[f64]) -> Option<(f64, f64)> {
        let axis = self.basis.grid.as_ref()?;
        assert_eq!(state.len(), self.dim(), "state dimension mismatch");
        let n = self.n_atoms;
        let d = self.basis.per_atom_dim;
        let big_d = self.basis.sector_dim();
        let cutoff = 1e-12 * n as f64;
        let mut w_plus = 0.0;
        let mut w_minus = 0.0;
        let mut cos_u = vec![0.0f64; n];
        for m in 0..big_d {
            let mut rest = m;
            let mut chi2 = 0.0;
            for c in cos_u.iter_mut() {
                let v = axis.points[rest % d].cos();
                *c = v;
                chi2 += v * v;
                rest /= d;
            }
            if chi2 < cutoff {
                continue;
            }
            let chi = chi2.sqrt();
            let mut atomic = 0.0;
            for (i, c) in cos_u.iter().enumerate() {
                atomic += c * state[(i + 1) * big_d + m];
            }
            atomic /= chi;
            let a0 = state[m];
            w_plus += 0.5 * (a0 + atomic) * (a0 + atomic);
            w_minus += 0.5 * (a0 - atomic) * (a0 - atomic);
        }
        Some((w_plus, w_minus))
    }

    /// Binary dump: `CVSP`, u32 version, u64 dim, u64 nnz, then nnz
    /// little-endian (u64 row, u64 col, f64 value) triplets.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.matrix.dim as u64).to_le_bytes())?;
        w.write_all(&(self.matrix.nnz() as u64).to_le_bytes())?;
        for r in 0..self.matrix.dim {
            for k in self.matrix.row_ptr[r]..self.matrix.row_ptr[r + 1] {
                w.write_all(&(r as u64).to_le_bytes())?;
                w.write_all(&(self.matrix.col_idx[k] as u64).to_le_bytes())?;
                w.write_all(&self.matrix.values[k].to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Parse a matrix written by [`ManifoldOperator::write_binary`].
pub fn read_binary<R: Read>(mut r: R) -> Result<CsrMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Dimension("operator dump: bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != DUMP_VERSION {
        return Err(Error::Dimension("operator dump: unknown version".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let dim = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let nnz = u64::from_le_bytes(b8) as usize;
    let mut triplets = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        r.read_exact(&mut b8)?;
        let row = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let col = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let val = f64::from_le_bytes(b8);
        if row >= dim || col >= dim {
            return Err(Error::Dimension("operator dump: index out of range".into()));
        }
        triplets.push((row, col, val));
    }
    Ok(CsrMatrix::from_triplets(dim, &triplets))
}

/// Build the manifold operator for `params` over `basis`.
pub fn assemble(params: &SystemParams, basis: &MotionalBasis) -> Result<ManifoldOperator> {
    params.require_numeric()?;
    if basis.n_atoms != params.n_atoms {
        return Err(Error::Dimension(format!(
            "basis built for N={}, params have N={}",
            basis.n_atoms, params.n_atoms
        )));
    }
    let n = params.n_atoms;
    let d = basis.per_atom_dim;
    let big_d = basis.sector_dim();
    let nu = params.trap_frequency();

    let triplets = match basis.backend {
        BasisBackend::Fock => {
            let c = cos_matrix_fock(params.eta, d);
            let c_nnz = c.iter().filter(|v| **v != 0.0).count();
            let estimate = (n + 1) * big_d + 2 * n * (big_d / d) * c_nnz;
            check_budget(estimate)?;
            let mut t = Vec::with_capacity(estimate);

            for m in 0..big_d {
                let mut rest = m;
                let mut quanta = 0usize;
                for _ in 0..n {
                    quanta += rest % d;
                    rest /= d;
                }
                let e = nu * (quanta as f64 + 0.5 * n as f64);
                for s in 0..=n {
                    t.push((s * big_d + m, s * big_d + m, e));
                }
            }
            let mut stride = 1usize;
            for i in 0..n {
                for m in 0..big_d {
                    let a = (m / stride) % d;
                    let base = m - a * stride;
                    for b in 0..d {
                        let v = c[(a, b)];
                        if v != 0.0 {
                            let col = (i + 1) * big_d + base + b * stride;
                            t.push((m, col, v));
                            t.push((col, m, v));
                        }
                    }
                }
                stride *= d;
            }
            t
        }
        BasisBackend::Grid => {
            let axis = basis.grid.as_ref().expect("grid basis carries its axis");
            let inv_d2 = 1.0 / (axis.spacing * axis.spacing);
            let kin_diag = params.recoil_ratio * std::f64::consts::PI
                * std::f64::consts::PI
                / 3.0
                * inv_d2;
            let eta4 = params.eta.powi(4);
            let estimate = (n + 1) * big_d * (1 + n * (d - 1)) + 2 * n * big_d;
            check_budget(estimate)?;
            let mut t = Vec::with_capacity(estimate);

            for m in 0..big_d {
                let mut rest = m;
                let mut e = n as f64 * kin_diag;
                for _ in 0..n {
                    let u = axis.points[rest % d];
                    e += params.recoil_ratio * u * u / (4.0 * eta4);
                    rest /= d;
                }
                for s in 0..=n {
                    t.push((s * big_d + m, s * big_d + m, e));
                }
            }
            // sinc-DVR kinetic: dense in each atom's own coordinate.
            let mut stride = 1usize;
            for _i in 0..n {
                for m in 0..big_d {
                    let a = (m / stride) % d;
                    let base = m - a * stride;
                    for b in 0..d {
                        if b == a {
                            continue;
                        }
                        let diff = a as isize - b as isize;
                        let sign = if diff % 2 == 0 { 1.0 } else { -1.0 };
                        let v = params.recoil_ratio * 2.0 * sign * inv_d2
                            / (diff * diff) as f64;
                        let row_m = m;
                        let col_m = base + b * stride;
                        for s in 0..=n {
                            t.push((s * big_d + row_m, s * big_d + col_m, v));
                        }
                    }
                }
                stride *= d;
            }
            let mut stride = 1usize;
            for i in 0..n {
                for m in 0..big_d {
                    let v = axis.points[(m / stride) % d].cos();
                    t.push((m, (i + 1) * big_d + m, v));
                    t.push(((i + 1) * big_d + m, m, v));
                }
                stride *= d;
            }
            t
        }
    };

    Ok(ManifoldOperator {
        matrix: CsrMatrix::from_triplets(basis.total_dim, &triplets),
        basis: basis.clone(),
        n_atoms: n,
        e_zero: params.zero_point_energy(),
    })
}

fn check_budget(estimate: usize) -> Result<()> {
    if estimate > NNZ_BUDGET {
        Err(Error::DimensionBudget { nnz_estimate: estimate, budget: NNZ_BUDGET })
    } else {
        Ok(())
    }
}

/// |Ψ_I⟩ = photon ⊗ motional ground state.
///
/// Fock backend: the all-zeros basis vector exactly. Grid backend: the
/// per-coordinate sampled Gaussian of standard deviation η, normalized on
/// the grid.
pub fn initial_state(params: &SystemParams, basis: &MotionalBasis) -> Result<Vec<f64>> {
    params.require_numeric()?;
    if basis.n_atoms != params.n_atoms {
        return Err(Error::Dimension(format!(
            "basis built for N={}, params have N={}",
            basis.n_atoms, params.n_atoms
        )));
    }
    let big_d = basis.sector_dim();
    let mut psi = vec![0.0f64; basis.total_dim];
    match basis.backend {
        BasisBackend::Fock => {
            psi[0] = 1.0;
        }
        BasisBackend::Grid => {
            let axis = basis.grid.as_ref().expect("grid basis carries its axis");
            let d = basis.per_atom_dim;
            let mut phi: Vec<f64> = axis
                .points
                .iter()
                .map(|&u| (-u * u / (4.0 * params.eta * params.eta)).exp())
                .collect();
            let norm = phi.iter().map(|a| a * a).sum::<f64>().sqrt();
            for a in phi.iter_mut() {
                *a /= norm;
            }
            for (m, slot) in psi.iter_mut().take(big_d).enumerate() {
                let mut rest = m;
                let mut amp = 1.0;
                for _ in 0..basis.n_atoms {
                    amp *= phi[rest % d];
                    rest /= d;
                }
                *slot = amp;
            }
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    /// Oscillator eigenfunctions on a quadrature grid, by the stable
    /// upward recurrence ψ_{n+1} = √(2/(n+1))·q·ψ_n − √(n/(n+1))·ψ_{n−1}.
    fn ho_wavefunctions(q: &[f64], n_max: usize) -> Vec<Vec<f64>> {
        let mut psi = vec![vec![0.0; q.len()]; n_max + 1];
        for (j, &qj) in q.iter().enumerate() {
            psi[0][j] = (-qj * qj / 2.0).exp() / std::f64::consts::PI.powf(0.25);
        }
        for n in 0..n_max {
            for (j, &qj) in q.iter().enumerate() {
                let lower = if n == 0 { 0.0 } else { psi[n - 1][j] };
                psi[n + 1][j] = ((2.0 / (n as f64 + 1.0)).sqrt() * qj * psi[n][j])
                    - (n as f64 / (n as f64 + 1.0)).sqrt() * lower;
            }
        }
        psi
    }

    /// Quadrature oracle for ⟨m|cos(η(a+a†))|n⟩ = ∫ψ_m(q)ψ_n(q)cos(√2 η q)dq.
    fn cos_element_quadrature(eta: f64, m: usize, n: usize) -> f64 {
        let pts = 8001;
        let l = 14.0;
        let h = 2.0 * l / (pts - 1) as f64;
        let q: Vec<f64> = (0..pts).map(|i| -l + i as f64 * h).collect();
        let psi = ho_wavefunctions(&q, m.max(n));
        let mut acc = 0.0;
        for (j, &qj) in q.iter().enumerate() {
            let w = if j == 0 || j == pts - 1 { 0.5 } else { 1.0 };
            acc += w * h * psi[m][j] * psi[n][j] * (std::f64::consts::SQRT_2 * eta * qj).cos();
        }
        acc
    }

    #[test]
    fn ground_element_matches_gaussian_quadrature() {
        // ⟨0|cos|0⟩ is the cosine average over the N(0, η²) ground
        // density; both the position-space quadrature and the closed form
        // e^{−η²/2} must agree with the matrix element.
        for &eta in &[0.3, 0.9] {
            let pts = 20001;
            let l = 10.0 * eta + 1.0;
            let h = 2.0 * l / (pts - 1) as f64;
            let norm = 1.0 / (2.0 * std::f64::consts::PI * eta * eta).sqrt();
            let mut avg = 0.0;
            for i in 0..pts {
                let u = -l + i as f64 * h;
                let w = if i == 0 || i == pts - 1 { 0.5 } else { 1.0 };
                avg += w * h * u.cos() * norm * (-u * u / (2.0 * eta * eta)).exp();
            }
            let mat = cos_matrix_fock(eta, 4);
            assert_relative_eq!(mat[(0, 0)], avg, max_relative = 1e-10);
            assert_relative_eq!(mat[(0, 0)], (-eta * eta / 2.0).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn elements_match_wavefunction_quadrature() {
        let eta = 0.6;
        let mat = cos_matrix_fock(eta, 10);
        for m in 0..10 {
            for n in 0..10 {
                let oracle = cos_element_quadrature(eta, m, n);
                assert_abs_diff_eq!(mat[(m, n)], oracle, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn eta_zero_gives_identity() {
        let mat = cos_matrix_fock(0.0, 6);
        assert_eq!(mat, DMatrix::identity(6, 6));
    }

    #[test]
    fn spectral_radius_at_most_one() {
        // Projection of a contraction: eigenvalues never leave [−1, 1].
        for &eta in &[0.5, 1.0] {
            let mat = cos_matrix_fock(eta, 40);
            let eig = mat.symmetric_eigenvalues();
            for &lambda in eig.iter() {
                assert!(lambda.abs() <= 1.0 + 1e-12, "λ = {lambda} at η = {eta}");
            }
        }
    }

    #[test]
    fn ground_column_sum_rule() {
        // Σ_m ⟨m|cos|0⟩² + leak² = ⟨0|cos²|0⟩ = (1+ε)/2.
        for &eta in &[0.3f64, 0.8] {
            let dim = 24;
            let mat = cos_matrix_fock(eta, dim);
            let kept: f64 = (0..dim).map(|m| mat[(m, 0)] * mat[(m, 0)]).sum();
            let leak = ground_column_leak(eta, dim);
            let target = (1.0 + (-2.0 * eta * eta).exp()) / 2.0;
            assert_relative_eq!(kept + leak * leak, target, max_relative = 1e-12);
        }
    }

    #[test]
    fn auto_basis_sits_on_the_leak_boundary() {
        for &eta in &[0.01, 0.3, 0.9] {
            let params = SystemParams::new(1, eta, 0.01).unwrap();
            let basis = MotionalBasis::fock_auto(&params).unwrap();
            let d = basis.per_atom_dim;
            assert!(ground_column_leak(eta, d) < FOCK_LEAK_TOL, "η = {eta}, d = {d}");
            if d > 2 {
                assert!(
                    ground_column_leak(eta, d - 1) >= FOCK_LEAK_TOL,
                    "η = {eta}: d = {d} is not minimal"
                );
            }
            assert!(d <= params.n_max_fock + 1);
        }
    }

    #[test]
    fn fock_dimensions_and_zero_asymmetry() {
        // 41 states per atom (occupations 0..=40) for N=1 doubles to 82.
        let params = SystemParams::new(1, 0.1, 0.01).unwrap();
        let basis = MotionalBasis::fock_fixed(&params, 41).unwrap();
        assert_eq!(basis.total_dim, 82);
        let op = assemble(&params, &basis).unwrap();
        assert_eq!(op.dim(), 82);
        assert_eq!(op.matrix.asymmetry(), 0.0);
    }

    #[test]
    fn initial_expectation_is_zero_point_energy() {
        // The coupling moves all weight off the photon sector, so
        // ⟨Ψ_I|H|Ψ_I⟩ is purely the trap zero-point energy.
        let params = SystemParams::new(2, 0.4, 0.02).unwrap();
        let basis = MotionalBasis::fock_auto(&params).unwrap();
        let op = assemble(&params, &basis).unwrap();
        let psi = initial_state(&params, &basis).unwrap();
        let h_psi = op.matrix.mul(&psi);
        let mean: f64 = psi.iter().zip(&h_psi).map(|(a, b)| a * b).sum();
        assert_relative_eq!(mean, op.e_zero, max_relative = 1e-14);
    }

    #[test]
    fn variance_sum_rule_fock() {
        // ‖(H−E₀)Ψ_I‖² = N⟨cos²u⟩ = N(1+ε)/2, exact up to the squared
        // truncation leak.
        for (n, eta) in [(1usize, 0.3f64), (2, 0.6), (3, 0.9)] {
            let params = SystemParams::new(n, eta, 0.015).unwrap();
            let basis = MotionalBasis::fock_auto(&params).unwrap();
            let op = assemble(&params, &basis).unwrap();
            let psi = initial_state(&params, &basis).unwrap();
            let h_psi = op.matrix.mul(&psi);
            let var: f64 = psi
                .iter()
                .zip(&h_psi)
                .map(|(a, b)| b - op.e_zero * a)
                .zip(psi.iter().zip(&h_psi).map(|(a, b)| b - op.e_zero * a))
                .map(|(x, y)| x * y)
                .sum();
            let target = n as f64 * (1.0 + params.epsilon) / 2.0;
            assert_relative_eq!(var, target, max_relative = 1e-8);
        }
    }

    #[test]
    fn variance_sum_rule_grid() {
        let params = SystemParams::new(1, 0.5, 0.01).unwrap();
        let basis = MotionalBasis::grid(&params).unwrap();
        let op = assemble(&params, &basis).unwrap();
        let psi = initial_state(&params, &basis).unwrap();
        let h_psi = op.matrix.mul(&psi);
        let mean: f64 = psi.iter().zip(&h_psi).map(|(a, b)| a * b).sum();
        assert_relative_eq!(mean, op.e_zero, max_relative = 1e-9);
        let var: f64 = h_psi
            .iter()
            .zip(&psi)
            .map(|(b, a)| b - op.e_zero * a)
            .map(|x| x * x)
            .sum();
        let target = (1.0 + params.epsilon) / 2.0;
        assert_relative_eq!(var, target, max_relative = 1e-8);
    }

    #[test]
    fn fock_initial_state_is_a_basis_vector() {
        let params = SystemParams::new(2, 0.3, 0.01).unwrap();
        let basis = MotionalBasis::fock_auto(&params).unwrap();
        let psi = initial_state(&params, &basis).unwrap();
        assert_eq!(psi[0], 1.0);
        assert_eq!(psi.iter().filter(|a| **a != 0.0).count(), 1);
    }

    #[test]
    fn grid_initial_state_norm_and_spread() {
        let params = SystemParams::new(1, 0.5, 0.01).unwrap();
        let basis = MotionalBasis::grid(&params).unwrap();
        let psi = initial_state(&params, &basis).unwrap();
        let norm: f64 = psi.iter().map(|a| a * a).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        let points = basis.grid_points().unwrap();
        let u2: f64 = psi
            .iter()
            .take(basis.sector_dim())
            .zip(points)
            .map(|(a, &u)| a * a * u * u)
            .sum();
        assert_relative_eq!(u2, params.eta * params.eta, max_relative = 1e-6);
    }

    #[test]
    fn small_box_is_rejected() {
        let mut params = SystemParams::new(1, 0.5, 0.01).unwrap();
        params.grid_halfwidth = 1.0;
        let err = MotionalBasis::grid(&params).unwrap_err();
        assert!(matches!(err, Error::GridBoxTooSmall { .. }), "{err}");
    }

    #[test]
    fn underresolved_grid_is_rejected() {
        // σ_p = 1/(2η) = 500 while the default grid represents |p| ≤ ~50.
        let params = SystemParams::new(1, 0.001, 0.01).unwrap();
        let err = MotionalBasis::grid(&params).unwrap_err();
        assert!(err.to_string().contains("grid_points"), "{err}");
    }

    #[test]
    fn oversized_assembly_is_refused() {
        let params = SystemParams::new(4, 0.5, 0.01).unwrap();
        let basis = MotionalBasis::fock_fixed(&params, 30).unwrap();
        let err = assemble(&params, &basis).unwrap_err();
        assert!(matches!(err, Error::DimensionBudget { .. }), "{err}");
    }

    #[test]
    fn binary_dump_round_trips() {
        let params = SystemParams::new(1, 0.4, 0.01).unwrap();
        let basis = MotionalBasis::fock_auto(&params).unwrap();
        let op = assemble(&params, &basis).unwrap();
        let mut buf = Vec::new();
        op.write_binary(&mut buf).unwrap();
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.dim, op.matrix.dim);
        assert_eq!(back.row_ptr, op.matrix.row_ptr);
        assert_eq!(back.col_idx, op.matrix.col_idx);
        assert_eq!(back.values, op.matrix.values);
    }

    #[test]
    fn initial_state_splits_evenly_over_bright_pair() {
        // The photon state overlaps D+ and D− with weight 1/2 each at
        // every grid configuration.
        let params = SystemParams::new(1, 0.5, 0.01).unwrap();
        let basis = MotionalBasis::grid(&params).unwrap();
        let op = assemble(&params, &basis).unwrap();
        let psi = initial_state(&params, &basis).unwrap();
        let (plus, minus) = op.bright_projection(&psi).unwrap();
        assert_relative_eq!(plus, 0.5, max_relative = 1e-9);
        assert_relative_eq!(minus, 0.5, max_relative = 1e-9);

        let fock = MotionalBasis::fock_auto(&params).unwrap();
        let fock_op = assemble(&params, &fock).unwrap();
        let fock_psi = initial_state(&params, &fock).unwrap();
        assert!(fock_op.bright_projection(&fock_psi).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// Hermiticity and both sum rules across the (N, η) plane.
        #[test]
        fn assembly_invariants(n in 1usize..3, eta in 0.1f64..1.0) {
            let params = SystemParams::new(n, eta, 0.01).unwrap();
            let basis = MotionalBasis::fock_auto(&params).unwrap();
            let op = assemble(&params, &basis).unwrap();
            prop_assert_eq!(op.matrix.asymmetry(), 0.0);
            prop_assert_eq!(op.dim(), basis.total_dim);

            let psi = initial_state(&params, &basis).unwrap();
            let h_psi = op.matrix.mul(&psi);
            let mean: f64 = psi.iter().zip(&h_psi).map(|(a, b)| a * b).sum();
            prop_assert!((mean - op.e_zero).abs() <= 1e-10 * (1.0 + op.e_zero.abs()));

            let var: f64 = h_psi
                .iter()
                .zip(&psi)
                .map(|(b, a)| b - op.e_zero * a)
                .map(|x| x * x)
                .sum();
            let target = n as f64 * (1.0 + params.epsilon) / 2.0;
            prop_assert!((var - target).abs() <= 1e-8 * target);
        }
    }
}
