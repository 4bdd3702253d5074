//! Unit system and validated run configuration.
//!
//! Everything downstream works in dimensionless units: energies and
//! frequencies in units of the vacuum-Rabi splitting g (with ħ = 1),
//! positions in units of 1/k. That leaves four physical knobs:
//!
//! - `n_atoms`            number of atoms N
//! - `eta`                Lamb-Dicke parameter η (√2·η = kσ)
//! - `recoil_ratio`       r = (ħk²/2m)/g
//! - `kappa_ext`          extrinsic half-linewidth κ′/g
//!
//! The trap tightness ε = exp(−2η²) is stored alongside η because the
//! closed-form sideband series is naturally written in ε while the
//! motional bases are naturally written in η.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default motional Fock truncation cap per atom.
pub const DEFAULT_N_MAX_FOCK: usize = 40;
/// Default number of position-grid points per atom.
pub const DEFAULT_GRID_POINTS: usize = 256;
/// Default grid half-width, in units of 1/k.
pub const DEFAULT_GRID_HALFWIDTH: f64 = 8.0;

/// Validated physical and numerical configuration, shared by all modules.
///
/// Immutable after construction; cheap to clone and safe to share across
/// worker threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of atoms N ≥ 1.
    pub n_atoms: usize,
    /// Lamb-Dicke parameter η ≥ 0. η = 0 is the symbolic tight-trap limit.
    pub eta: f64,
    /// Trap tightness ε = exp(−2η²) ∈ (0, 1]. Derived from η.
    pub epsilon: f64,
    /// Atomic recoil frequency in units of g: r = (ħk²/2m)/g.
    pub recoil_ratio: f64,
    /// Extrinsic half-linewidth κ′ in units of g.
    pub kappa_ext: f64,
    /// Motional basis truncation cap per atom (Fock backend).
    pub n_max_fock: usize,
    /// Grid backend resolution (points per atom).
    pub grid_points: usize,
    /// Grid backend half-extent, in units of 1/k.
    pub grid_halfwidth: f64,
}

impl SystemParams {
    /// Build from explicit η. Remaining numeric fields take their defaults.
    pub fn new(n_atoms: usize, eta: f64, recoil_ratio: f64) -> Result<Self> {
        Self::build(n_atoms, EtaOrEpsilon::Eta(eta), recoil_ratio, 0.0)
    }

    /// Build from trap tightness ε instead of η.
    pub fn from_epsilon(n_atoms: usize, epsilon: f64, recoil_ratio: f64) -> Result<Self> {
        Self::build(n_atoms, EtaOrEpsilon::Epsilon(epsilon), recoil_ratio, 0.0)
    }

    fn build(
        n_atoms: usize,
        width: EtaOrEpsilon,
        recoil_ratio: f64,
        kappa_ext: f64,
    ) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::config("n_atoms", "n_atoms must be ≥ 1"));
        }
        let (eta, epsilon) = width.resolve()?;
        if !recoil_ratio.is_finite() || recoil_ratio < 0.0 {
            return Err(Error::config("recoil_ratio", "recoil_ratio must be ≥ 0"));
        }
        if !kappa_ext.is_finite() || kappa_ext < 0.0 {
            return Err(Error::config("kappa_ext", "kappa_ext must be ≥ 0"));
        }
        Ok(Self {
            n_atoms,
            eta,
            epsilon,
            recoil_ratio,
            kappa_ext,
            n_max_fock: DEFAULT_N_MAX_FOCK,
            grid_points: DEFAULT_GRID_POINTS,
            grid_halfwidth: DEFAULT_GRID_HALFWIDTH,
        })
    }

    /// Parse a flat key-value map (string values, as read from a config file).
    ///
    /// Requires `n_atoms`, `recoil_ratio`, and exactly one of {`eta`,
    /// `epsilon`}. Optional keys: `kappa_ext`, `n_max_fock`, `grid_points`,
    /// `grid_halfwidth`.
    pub fn from_config(raw: &BTreeMap<String, String>) -> Result<Self> {
        let mut known = [
            "n_atoms",
            "eta",
            "epsilon",
            "recoil_ratio",
            "kappa_ext",
            "n_max_fock",
            "grid_points",
            "grid_halfwidth",
        ];
        known.sort_unstable();
        for key in raw.keys() {
            if known.binary_search(&key.as_str()).is_err() {
                return Err(Error::config(key, "unknown configuration key"));
            }
        }

        let n_atoms = parse_usize(raw, "n_atoms")?
            .ok_or_else(|| Error::config("n_atoms", "missing required key"))?;
        let recoil_ratio = parse_f64(raw, "recoil_ratio")?
            .ok_or_else(|| Error::config("recoil_ratio", "missing required key"))?;
        let eta = parse_f64(raw, "eta")?;
        let epsilon = parse_f64(raw, "epsilon")?;
        let width = match (eta, epsilon) {
            (Some(e), None) => EtaOrEpsilon::Eta(e),
            (None, Some(e)) => EtaOrEpsilon::Epsilon(e),
            (Some(_), Some(_)) => {
                return Err(Error::config("eta", "supply exactly one of {eta, epsilon}, not both"))
            }
            (None, None) => {
                return Err(Error::config("eta", "supply exactly one of {eta, epsilon}"))
            }
        };
        let kappa_ext = parse_f64(raw, "kappa_ext")?.unwrap_or(0.0);

        let mut params = Self::build(n_atoms, width, recoil_ratio, kappa_ext)?;
        if let Some(v) = parse_usize(raw, "n_max_fock")? {
            if v < 2 {
                return Err(Error::config("n_max_fock", "n_max_fock must be ≥ 2"));
            }
            params.n_max_fock = v;
        }
        if let Some(v) = parse_usize(raw, "grid_points")? {
            if v < 2 {
                return Err(Error::config("grid_points", "grid_points must be ≥ 2"));
            }
            params.grid_points = v;
        }
        if let Some(v) = parse_f64(raw, "grid_halfwidth")? {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config("grid_halfwidth", "grid_halfwidth must be > 0"));
            }
            params.grid_halfwidth = v;
        }
        Ok(params)
    }

    /// Inverse of [`from_config`](Self::from_config): emit the flat
    /// key-value map that reproduces this configuration exactly.
    pub fn to_config(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("n_atoms".into(), self.n_atoms.to_string());
        // η is the stored primary; ε is derived on the way back in.
        map.insert("eta".into(), format_exact(self.eta));
        map.insert("recoil_ratio".into(), format_exact(self.recoil_ratio));
        map.insert("kappa_ext".into(), format_exact(self.kappa_ext));
        map.insert("n_max_fock".into(), self.n_max_fock.to_string());
        map.insert("grid_points".into(), self.grid_points.to_string());
        map.insert("grid_halfwidth".into(), format_exact(self.grid_halfwidth));
        map
    }

    /// Parse a TOML document with the run keys at top level.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table =
            text.parse().map_err(|e| Error::config("<config>", format!("invalid TOML: {e}")))?;
        let mut map = BTreeMap::new();
        for (key, value) in table {
            let rendered = match value {
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => format_exact(f),
                toml::Value::String(s) => s,
                other => other.to_string(),
            };
            map.insert(key, rendered);
        }
        Self::from_config(&map)
    }

    /// True in the symbolic tight-trap limit η = 0 (ε = 1). Numeric
    /// backends reject this; closed-form paths handle it.
    pub fn is_tight_limit(&self) -> bool {
        self.eta == 0.0
    }

    /// Trap frequency in units of g: ω₀/g = r/η².
    pub fn trap_frequency(&self) -> f64 {
        self.recoil_ratio / (self.eta * self.eta)
    }

    /// Motional zero-point energy in units of ħg: E₀ = N·r/(2η²).
    pub fn zero_point_energy(&self) -> f64 {
        0.5 * self.n_atoms as f64 * self.trap_frequency()
    }

    /// Reject the symbolic tight-trap limit for numeric backends.
    pub fn require_numeric(&self) -> Result<()> {
        if self.is_tight_limit() {
            Err(Error::config(
                "eta",
                "eta = 0 (epsilon = 1) is the symbolic tight-trap limit; \
                 numeric backends need eta > 0",
            ))
        } else {
            Ok(())
        }
    }
}

enum EtaOrEpsilon {
    Eta(f64),
    Epsilon(f64),
}

impl EtaOrEpsilon {
    fn resolve(self) -> Result<(f64, f64)> {
        match self {
            EtaOrEpsilon::Eta(eta) => {
                if !eta.is_finite() || eta < 0.0 {
                    return Err(Error::config("eta", "eta must be ≥ 0"));
                }
                Ok((eta, (-2.0 * eta * eta).exp()))
            }
            EtaOrEpsilon::Epsilon(eps) => {
                if !eps.is_finite() || eps <= 0.0 || eps > 1.0 {
                    return Err(Error::config("epsilon", "epsilon must lie in (0, 1]"));
                }
                // ε = exp(−2η²)  ⇒  η = √(−ln ε / 2)
                let eta = (-eps.ln() / 2.0).sqrt();
                Ok((eta, eps))
            }
        }
    }
}

fn parse_f64(raw: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    match raw.get(key) {
        None => Ok(None),
        Some(text) => text
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::config(key, format!("cannot parse `{text}` as a real number"))),
    }
}

fn parse_usize(raw: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    match raw.get(key) {
        None => Ok(None),
        Some(text) => text
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::config(key, format!("cannot parse `{text}` as an integer"))),
    }
}

/// Shortest decimal string that round-trips the exact f64.
fn format_exact(x: f64) -> String {
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn epsilon_one_is_tight_limit() {
        let p = SystemParams::from_config(&cfg(&[
            ("n_atoms", "1"),
            ("epsilon", "1.0"),
            ("recoil_ratio", "0.01"),
        ]))
        .unwrap();
        assert_eq!(p.eta, 0.0);
        assert!(p.is_tight_limit());
        assert!(p.require_numeric().is_err());
    }

    #[test]
    fn eta_fixes_epsilon() {
        let p = SystemParams::from_config(&cfg(&[
            ("n_atoms", "8"),
            ("eta", "0.587"),
            ("recoil_ratio", "0.01"),
        ]))
        .unwrap();
        assert_relative_eq!(p.epsilon, (-2.0f64 * 0.587 * 0.587).exp(), max_relative = 1e-15);
        assert_relative_eq!(p.epsilon, 0.502, max_relative = 2e-3);
    }

    #[test]
    fn zero_atoms_rejected() {
        let err = SystemParams::from_config(&cfg(&[
            ("n_atoms", "0"),
            ("eta", "0.5"),
            ("recoil_ratio", "0.01"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("n_atoms must be ≥ 1"), "{err}");
    }

    #[test]
    fn both_eta_and_epsilon_rejected() {
        let err = SystemParams::from_config(&cfg(&[
            ("n_atoms", "2"),
            ("eta", "0.5"),
            ("epsilon", "0.5"),
            ("recoil_ratio", "0.01"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("exactly one"), "{err}");
    }

    #[test]
    fn epsilon_out_of_range_rejected() {
        for bad in ["0.0", "-0.2", "1.5"] {
            let err = SystemParams::from_config(&cfg(&[
                ("n_atoms", "2"),
                ("epsilon", bad),
                ("recoil_ratio", "0.01"),
            ]))
            .unwrap_err();
            assert!(err.to_string().contains("epsilon"), "{err}");
        }
    }

    #[test]
    fn unknown_key_names_offender() {
        let err = SystemParams::from_config(&cfg(&[
            ("n_atoms", "2"),
            ("eta", "0.5"),
            ("recoil_ratio", "0.01"),
            ("trap_depth", "3"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("trap_depth"), "{err}");
    }

    #[test]
    fn trap_frequency_and_zero_point() {
        let p = SystemParams::new(3, 0.5, 0.01).unwrap();
        assert_relative_eq!(p.trap_frequency(), 0.04, max_relative = 1e-15);
        assert_relative_eq!(p.zero_point_energy(), 3.0 * 0.02, max_relative = 1e-15);
    }

    #[test]
    fn toml_parse_and_defaults() {
        let p = SystemParams::from_toml_str(
            "n_atoms = 2\neta = 0.5\nrecoil_ratio = 0.01\nkappa_ext = 0.05\n",
        )
        .unwrap();
        assert_eq!(p.n_atoms, 2);
        assert_eq!(p.kappa_ext, 0.05);
        assert_eq!(p.n_max_fock, DEFAULT_N_MAX_FOCK);
        assert_eq!(p.grid_points, DEFAULT_GRID_POINTS);
        assert_eq!(p.grid_halfwidth, DEFAULT_GRID_HALFWIDTH);
    }

    proptest! {
        #[test]
        fn config_round_trip(
            n in 1usize..64,
            eta in 1e-3f64..2.0,
            r in 0.0f64..1.0,
            kappa in 0.0f64..1.0,
        ) {
            let mut p = SystemParams::new(n, eta, r).unwrap();
            p.kappa_ext = kappa;
            let back = SystemParams::from_config(&p.to_config()).unwrap();
            prop_assert_eq!(p, back);
        }

        #[test]
        fn epsilon_eta_duality(eta in 1e-3f64..2.0) {
            let p = SystemParams::new(1, eta, 0.0).unwrap();
            let q = SystemParams::from_epsilon(1, p.epsilon, 0.0).unwrap();
            prop_assert!((p.eta - q.eta).abs() <= 1e-12 * (1.0 + p.eta));
            prop_assert_eq!(p.epsilon, (-2.0 * eta * eta).exp());
        }
    }
}
