//! Command-line front end: parameter resolution (flags over config),
//! subcommand dispatch, and artifact + manifest writing.
//!
//! Exit codes: 0 success, 1 computation failure (and `validate` with
//! failing checks), 2 usage or configuration errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::counting::{
    figure3_sweep, figure4_sweep, mc_report, n_max, separation, series_report, spectrum_report,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, initial_state, MotionalBasis};
use crate::moments::{
    loose_limit, mc_moments, mc_moments_with_cutoff, perturbative_sideband, series_sideband,
    tight_limit,
};
use crate::output::{
    broadened_csv, fig3_csv, fig4_csv, json_artifact, manifest_json, predictions_csv, sticks_csv,
    write_text, CountBundle, MomentsBundle, RunManifest,
};
use crate::params::SystemParams;
use crate::spectra::{
    convolve, spectral_moments, split_sidebands, stick_spectrum, GridRange, MomentsReport, Side,
    SidebandSummary,
};
use crate::validate::run_suite;

#[derive(Parser, Debug)]
#[command(name = "cavspec", version, about = "Cavity transmission sidebands for trapped atoms")]
pub struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML parameter file; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the sampling pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory the artifacts are written to.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Table format for sweep and prediction outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact transmission spectrum: sticks, optional broadening, summary.
    Spectrum(SpectrumArgs),
    /// Monte Carlo coupling moments and the four sideband predictions.
    Moments(MomentsArgs),
    /// Counting verdict for N vs N+1 plus the ceiling N_max.
    Count(CountArgs),
    /// Red-sideband band separation swept over epsilon for two atom numbers.
    Fig3(Fig3Args),
    /// Counting ceiling swept over epsilon for several kappa' columns.
    Fig4(Fig4Args),
    /// Cross-check suite; exits 0 only when every check passes.
    Validate,
}

/// Parameter flags shared by the physics subcommands. Any flag given here
/// wins over the corresponding config key.
#[derive(Args, Debug, Clone, Copy, Default)]
struct ParamOverrides {
    /// Atom count N.
    #[arg(long)]
    n: Option<usize>,
    /// Gaussian position spread eta (k sigma = sqrt(2) eta).
    #[arg(long)]
    eta: Option<f64>,
    /// Coupling contrast epsilon = exp(-2 eta^2); alternative to --eta.
    #[arg(long, conflicts_with = "eta")]
    epsilon: Option<f64>,
    /// Recoil ratio r in units of g.
    #[arg(long)]
    recoil: Option<f64>,
    /// Extrinsic half-linewidth kappa' in units of g.
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    over: ParamOverrides,
    /// Motional basis backend.
    #[arg(long, value_enum, default_value_t = BackendArg::Fock)]
    backend: BackendArg,
    /// Fixed per-atom oscillator dimension; the default auto truncation
    /// targets initial-state fidelity, which converges faster than the
    /// line positions.
    #[arg(long)]
    fock_dim: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Fock,
    Grid,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    #[command(flatten)]
    over: ParamOverrides,
    /// Monte Carlo sample budget.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Node cutoff on chi^2 (default 1e-6 N).
    #[arg(long)]
    cutoff: Option<f64>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    over: ParamOverrides,
    /// Width route for the verdict.
    #[arg(long, value_enum, default_value_t = MethodArg::Series)]
    method: MethodArg,
    /// Width multiplier the separation must beat.
    #[arg(long, default_value_t = 1.0)]
    multiplier: f64,
    /// Sample budget for --method mc.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Series,
    Mc,
    Spectrum,
}

#[derive(Args, Debug)]
struct Fig3Args {
    /// Lower atom number of the compared pair.
    #[arg(long, default_value_t = 8)]
    n1: usize,
    /// Upper atom number of the compared pair.
    #[arg(long, default_value_t = 9)]
    n2: usize,
    /// Recoil ratio r (default 0.01, or the config value).
    #[arg(long)]
    recoil: Option<f64>,
    #[command(flatten)]
    grid: EpsGrid,
}

#[derive(Args, Debug)]
struct Fig4Args {
    /// Comma-separated kappa' values, one ceiling column each.
    #[arg(long, value_delimiter = ',', default_value = "0.0,0.05,0.1,0.2")]
    kappas: Vec<f64>,
    #[command(flatten)]
    grid: EpsGrid,
}

#[derive(Args, Debug, Clone, Copy)]
struct EpsGrid {
    /// Smallest epsilon of the sweep.
    #[arg(long = "eps-min", default_value_t = 0.05)]
    eps_min: f64,
    /// Largest epsilon of the sweep.
    #[arg(long = "eps-max", default_value_t = 0.99)]
    eps_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long = "eps-steps", default_value_t = 48)]
    eps_steps: usize,
}

impl EpsGrid {
    fn build(&self) -> Result<Vec<f64>> {
        if self.eps_steps < 2 {
            return Err(Error::config("eps-steps", "the sweep needs at least 2 grid points"));
        }
        if !(self.eps_min > 0.0 && self.eps_min < self.eps_max && self.eps_max <= 1.0) {
            return Err(Error::config("eps-min", "need 0 < eps-min < eps-max <= 1"));
        }
        let h = (self.eps_max - self.eps_min) / (self.eps_steps - 1) as f64;
        Ok((0..self.eps_steps).map(|i| self.eps_min + i as f64 * h).collect())
    }
}

/// Parse the process arguments, run the command, return the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Some(threads) = cli.common.threads {
        // A second build_global (tests, repeated calls) is a no-op error.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, Error::Config { .. }) {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Spectrum(args) => cmd_spectrum(&cli.common, args).map(|()| 0),
        Command::Moments(args) => cmd_moments(&cli.common, args).map(|()| 0),
        Command::Count(args) => cmd_count(&cli.common, args).map(|()| 0),
        Command::Fig3(args) => cmd_fig3(&cli.common, args).map(|()| 0),
        Command::Fig4(args) => cmd_fig4(&cli.common, args).map(|()| 0),
        Command::Validate => {
            let report = run_suite(cli.common.seed);
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn load_config(path: &Path) -> Result<SystemParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    SystemParams::from_toml_str(&text)
}

/// Merge config keys with flag overrides; flags win. The trap spread can
/// come from either --eta or --epsilon.
fn resolve_params(common: &Common, over: &ParamOverrides) -> Result<SystemParams> {
    let base = match &common.config {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let n = over
        .n
        .or(base.as_ref().map(|b| b.n_atoms))
        .ok_or_else(|| Error::config("n", "atom count required: pass --n or a config file"))?;
    let recoil = over.recoil.or(base.as_ref().map(|b| b.recoil_ratio)).unwrap_or(0.0);
    let mut params = if let Some(eta) = over.eta {
        SystemParams::new(n, eta, recoil)?
    } else if let Some(eps) = over.epsilon {
        SystemParams::from_epsilon(n, eps, recoil)?
    } else if let Some(b) = &base {
        SystemParams::new(n, b.eta, recoil)?
    } else {
        return Err(Error::config(
            "eta",
            "trap spread required: pass --eta or --epsilon (or a config file)",
        ));
    };
    if let Some(b) = &base {
        params.kappa_ext = b.kappa_ext;
        params.n_max_fock = b.n_max_fock;
        params.grid_points = b.grid_points;
        params.grid_halfwidth = b.grid_halfwidth;
    }
    if let Some(kappa) = over.kappa {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::config("kappa", "kappa must be finite and >= 0"));
        }
        params.kappa_ext = kappa;
    }
    Ok(params)
}

/// The argument list as invoked, recorded in the manifest.
fn invocation() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn write_artifact(
    common: &Common,
    manifest: &mut RunManifest,
    name: &str,
    text: String,
) -> Result<()> {
    let path = common.out.join(name);
    write_text(&path, &text)?;
    manifest.record(name);
    println!("wrote {}", path.display());
    Ok(())
}

fn finish(common: &Common, manifest: &RunManifest) -> Result<()> {
    let path = common.out.join("manifest.json");
    write_text(&path, &manifest_json(manifest)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSummary {
    dim: usize,
    total_weight: f64,
    red: SidebandSummary,
    blue: SidebandSummary,
    moments: MomentsReport,
}

fn cmd_spectrum(common: &Common, args: &SpectrumArgs) -> Result<()> {
    let params = resolve_params(common, &args.over)?;
    let basis = match (args.backend, args.fock_dim) {
        (BackendArg::Grid, _) => MotionalBasis::grid(&params)?,
        (BackendArg::Fock, Some(dim)) => MotionalBasis::fock_fixed(&params, dim)?,
        (BackendArg::Fock, None) => MotionalBasis::fock_auto(&params)?,
    };
    let op = assemble(&params, &basis)?;
    let psi = initial_state(&params, &basis)?;
    let sticks = stick_spectrum(&op, &psi)?;
    let (red, blue) = split_sidebands(&sticks);
    println!(
        "spectrum over {} states: weight {:.6}, red mean {:.5}, blue mean {:.5}",
        op.dim(),
        sticks.total_weight(),
        red.mean,
        blue.mean
    );

    let mut manifest = RunManifest::new(invocation(), Some(common.seed), Some(&params));
    write_artifact(common, &mut manifest, "sticks.csv", sticks_csv(&sticks))?;
    if params.kappa_ext > 0.0 {
        let pad = (20.0 * params.kappa_ext).max(1.0);
        let grid = GridRange::spanning(&sticks, pad, 2001);
        let broadened = convolve(&sticks, params.kappa_ext, &grid)?;
        write_artifact(common, &mut manifest, "broadened.csv", broadened_csv(&broadened))?;
    }
    let summary = SpectrumSummary {
        dim: op.dim(),
        total_weight: sticks.total_weight(),
        red,
        blue,
        moments: spectral_moments(&sticks, 4),
    };
    let text = json_artifact("spectrum_summary", &summary)?;
    write_artifact(common, &mut manifest, "summary.json", text)?;
    finish(common, &manifest)
}

fn cmd_moments(common: &Common, args: &MomentsArgs) -> Result<()> {
    let params = resolve_params(common, &args.over)?;
    let moments = match args.cutoff {
        Some(cutoff) => mc_moments_with_cutoff(&params, args.samples, common.seed, cutoff)?,
        None => mc_moments(&params, args.samples, common.seed)?,
    };
    println!(
        "{} samples ({} clipped): <chi> = {:.6} +/- {:.1e}",
        moments.n_samples, moments.n_clipped, moments.e_chi.value, moments.e_chi.std_error
    );
    let mut predictions = Vec::with_capacity(8);
    for side in [Side::Red, Side::Blue] {
        predictions.push(perturbative_sideband(side, &params, &moments)?);
        predictions.push(series_sideband(side, &params));
        predictions.push(tight_limit(side, &params));
        predictions.push(loose_limit(side, &params));
    }
    for p in &predictions {
        println!(
            "  {:?} {:?}: mean {:.6}, variance {:.6}",
            p.side, p.method, p.mean, p.variance
        );
    }
    let bundle = MomentsBundle { moments, predictions };
    let mut manifest = RunManifest::new(invocation(), Some(common.seed), Some(&params));
    let text = json_artifact("moments", &bundle)?;
    write_artifact(common, &mut manifest, "moments.json", text)?;
    if common.format == Format::Csv {
        let csv = predictions_csv(&bundle.predictions);
        write_artifact(common, &mut manifest, "predictions.csv", csv)?;
    }
    finish(common, &manifest)
}

fn cmd_count(common: &Common, args: &CountArgs) -> Result<()> {
    let params = resolve_params(common, &args.over)?;
    let n = params.n_atoms;
    let report = match args.method {
        MethodArg::Series => series_report(n, &params, args.multiplier)?,
        MethodArg::Mc => mc_report(n, &params, args.multiplier, args.samples, common.seed)?,
        MethodArg::Spectrum => spectrum_report(n, &params, args.multiplier)?,
    };
    let sep = separation(n, &params)?;
    let ceiling = n_max(params.epsilon, params.kappa_ext)?;
    println!(
        "N = {n}: separation {:.5}, combined width {:.5} -> {}",
        report.separation,
        report.combined_width,
        if report.distinguishable { "distinguishable" } else { "not distinguishable" }
    );
    println!("counting ceiling N_max = {} ({:?})", ceiling.value, ceiling.regime);
    let bundle = CountBundle { report, separation: sep, n_max: ceiling };
    let mut manifest = RunManifest::new(invocation(), Some(common.seed), Some(&params));
    let text = json_artifact("count", &bundle)?;
    write_artifact(common, &mut manifest, "count.json", text)?;
    finish(common, &manifest)
}

fn cmd_fig3(common: &Common, args: &Fig3Args) -> Result<()> {
    let base = match &common.config {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let recoil = args.recoil.or(base.as_ref().map(|b| b.recoil_ratio)).unwrap_or(0.01);
    // The template carries the recoil ratio; each row re-derives eta from
    // its own epsilon.
    let template = SystemParams::from_epsilon(args.n1, 0.5, recoil)?;
    let grid = args.grid.build()?;
    let fig = figure3_sweep(&template, (args.n1, args.n2), &grid)?;
    match fig.crossover {
        Some(eps) => println!("bands touch at epsilon = {eps:.6}"),
        None => println!("no band crossover inside the grid"),
    }
    let mut manifest = RunManifest::new(invocation(), Some(common.seed), Some(&template));
    match common.format {
        Format::Csv => write_artifact(common, &mut manifest, "fig3.csv", fig3_csv(&fig))?,
        Format::Json => {
            let text = json_artifact("figure3", &fig)?;
            write_artifact(common, &mut manifest, "fig3.json", text)?
        }
    }
    finish(common, &manifest)
}

fn cmd_fig4(common: &Common, args: &Fig4Args) -> Result<()> {
    if args.kappas.is_empty() {
        return Err(Error::config("kappas", "need at least one kappa column"));
    }
    for &kappa in &args.kappas {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::config("kappas", "kappa values must be finite and >= 0"));
        }
    }
    let grid = args.grid.build()?;
    let fig = figure4_sweep(&args.kappas, &grid)?;
    if fig.monotone_columns().iter().any(|&m| !m) {
        return Err(Error::Dimension("counting ceiling lost monotonicity in epsilon".into()));
    }
    let mut manifest = RunManifest::new(invocation(), Some(common.seed), None);
    match common.format {
        Format::Csv => write_artifact(common, &mut manifest, "fig4.csv", fig4_csv(&fig))?,
        Format::Json => {
            let text = json_artifact("figure4", &fig)?;
            write_artifact(common, &mut manifest, "fig4.json", text)?
        }
    }
    finish(common, &manifest)
}
