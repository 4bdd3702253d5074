//! Data artifacts: CSV tables, JSON reports, and the run manifest.
//!
//! Every CLI command leaves a `manifest.json` beside its data files
//! listing the resolved configuration, seed, and outputs, so a run can be
//! replayed bitwise (timestamps excluded). Floats are rendered with the
//! shortest representation that round-trips, in CSV and JSON alike.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::counting::{CountingReport, Figure3, Figure4, NMax, Separation};
use crate::error::Result;
use crate::moments::{MomentEstimates, SidebandPrediction};
use crate::params::SystemParams;
use crate::spectra::{BroadenedSpectrum, SidebandSummary, StickSpectrum};

/// Bumped whenever a CSV header or JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Provenance record for one CLI run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    /// The invoked command line, joined.
    pub command: String,
    pub seed: Option<u64>,
    /// Fully resolved configuration (flags already folded in).
    pub params: Option<BTreeMap<String, String>>,
    /// File names written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    /// Wall-clock stamp; excluded from reproducibility guarantees.
    pub unix_timestamp: u64,
}

impl RunManifest {
    pub fn new(command: String, seed: Option<u64>, params: Option<&SystemParams>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "cavspec",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            params: params.map(SystemParams::to_config),
            outputs: Vec::new(),
            unix_timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn record(&mut self, file_name: &str) {
        self.outputs.push(file_name.to_string());
    }
}

/// Counting artifacts bundled into one report file.
#[derive(Debug, Clone, Serialize)]
pub struct CountBundle {
    pub report: CountingReport,
    pub separation: Separation,
    pub n_max: NMax,
}

/// Moment artifacts: the estimates plus every closed-form and MC-backed
/// sideband prediction side by side.
#[derive(Debug, Clone, Serialize)]
pub struct MomentsBundle {
    pub moments: MomentEstimates,
    pub predictions: Vec<SidebandPrediction>,
}

/// `{"schema_version": .., "kind": .., "data": ..}` wrapper shared by all
/// JSON artifacts.
pub fn json_artifact<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Artifact<'a, T> {
        schema_version: u32,
        kind: &'a str,
        data: &'a T,
    }
    to_json_text(&Artifact { schema_version: SCHEMA_VERSION, kind, data: payload })
}

fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    text.push('\n');
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn manifest_json(manifest: &RunManifest) -> Result<String> {
    to_json_text(manifest)
}

/// `omega,weight` rows, ω in g units relative to the empty-cavity
/// resonance, sorted ascending.
pub fn sticks_csv(s: &StickSpectrum) -> String {
    let mut out = String::from("omega,weight\n");
    for &(omega, weight) in s.lines() {
        let _ = writeln!(out, "{omega},{weight}");
    }
    out
}

/// `omega,intensity` rows of the Lorentzian-broadened spectrum.
pub fn broadened_csv(b: &BroadenedSpectrum) -> String {
    let mut out = String::from("omega,intensity\n");
    for (omega, intensity) in b.omega_grid.iter().zip(&b.intensity) {
        let _ = writeln!(out, "{omega},{intensity}");
    }
    out
}

/// `side,method,total_weight,mean,variance,empty` rows.
pub fn summaries_csv(summaries: &[SidebandSummary]) -> String {
    let mut out = String::from("side,method,total_weight,mean,variance,empty\n");
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            snake(&s.side),
            snake(&s.method),
            s.total_weight,
            s.mean,
            s.variance,
            s.empty
        );
    }
    out
}

/// `side,method,mean,variance,mean_std_error,variance_std_error` rows;
/// closed forms leave the error cells empty.
pub fn predictions_csv(predictions: &[SidebandPrediction]) -> String {
    let mut out = String::from("side,method,mean,variance,mean_std_error,variance_std_error\n");
    for p in predictions {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            snake(&p.side),
            snake(&p.method),
            p.mean,
            p.variance,
            opt(p.mean_std_error),
            opt(p.variance_std_error)
        );
    }
    out
}

/// `epsilon,mean_lower,half_width_lower,mean_upper,half_width_upper,overlap`
/// rows; a trailing comment line carries the crossover when found.
pub fn fig3_csv(fig: &Figure3) -> String {
    let mut out =
        String::from("epsilon,mean_lower,half_width_lower,mean_upper,half_width_upper,overlap\n");
    for r in &fig.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.epsilon, r.mean_lower, r.half_width_lower, r.mean_upper, r.half_width_upper, r.overlap
        );
    }
    if let Some(eps) = fig.crossover {
        let _ = writeln!(out, "# crossover_epsilon,{eps}");
    }
    out
}

/// `epsilon,n_max_kappa_<k>,...` rows, one N_max column per κ′; the
/// unbounded marker renders as `inf`.
pub fn fig4_csv(fig: &Figure4) -> String {
    let mut out = String::from("epsilon");
    for kappa in &fig.kappa_over_g {
        let _ = write!(out, ",n_max_kappa_{kappa}");
    }
    out.push('\n');
    for row in &fig.rows {
        let _ = write!(out, "{}", row.epsilon);
        for v in &row.n_max {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render a fieldless enum through its serde name.
fn snake<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "unknown".into())
}
