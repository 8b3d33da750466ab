//! Config-driven command surface behind the `laserlab` binary.
//!
//! Every command reads one JSON [`RunConfig`], optionally runs its oracle
//! comparisons (`--self-check`), and renders CSV or JSON. Output is a pure
//! function of config and seed; metadata carries no timestamps.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, StatisticsReport};
use crate::dynamics::{self, MomentState, TimeGrid};
use crate::error::Error;
use crate::model::{LaserParams, ParamsInput};
use crate::spectral::{self, BandReport};
use crate::stochastic::{self, CorrelationConfig, EstimateRecord, JumpConfig, RNG_DESCRIPTION};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GIT_HASH: &str = env!("LASERLAB_GIT_HASH");

pub const SWEEP_CSV_HEADER: &str = "eta,S,nbar_over_N,nvar_ratio";
pub const DEFAULT_SWEEP_POINTS: usize = 401;
pub const DEFAULT_ETA_RANGE: (f64, f64) = (0.01, 100.0);

/// Deterministic identities checked by `--self-check`.
const EXACT_TOL: f64 = 1e-9;
/// Monte Carlo estimates must sit within this many standard errors.
const MC_SIGMA: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(
    name = "laserlab",
    version,
    about = "Three-level cascade laser statistics and squeezing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form steady-state statistics as JSON.
    Report(RunArgs),
    /// Squeezing and photon statistics over an η grid as CSV.
    Sweep(RunArgs),
    /// Moment-equation trajectory as CSV.
    Dynamics(RunArgs),
    /// Jump-process level occupations as JSON.
    Gillespie(RunArgs),
    /// Two-time field correlation as JSON.
    Correlate(RunArgs),
    /// Band-limited variances and squeezing as CSV.
    Band(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub self_check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Report,
    Sweep,
    Dynamics,
    Gillespie,
    Correlate,
    Band,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Report => "report",
            CommandKind::Sweep => "sweep",
            CommandKind::Dynamics => "dynamics",
            CommandKind::Gillespie => "gillespie",
            CommandKind::Correlate => "correlate",
            CommandKind::Band => "band",
        }
    }
}

impl Command {
    pub fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Report(a) => (CommandKind::Report, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
            Command::Dynamics(a) => (CommandKind::Dynamics, a),
            Command::Gillespie(a) => (CommandKind::Gillespie, a),
            Command::Correlate(a) => (CommandKind::Correlate, a),
            Command::Band(a) => (CommandKind::Band, a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsInput,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub dynamics: Option<DynamicsBlock>,
    #[serde(default)]
    pub gillespie: Option<GillespieBlock>,
    #[serde(default)]
    pub correlate: Option<CorrelateBlock>,
    #[serde(default)]
    pub band: Option<BandBlock>,
}

/// Explicit `eta` values, or a log grid over `[eta_min, eta_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub eta_min: Option<f64>,
    #[serde(default)]
    pub eta_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

/// Defaults: `t_end = 400 / min(γ_c, r_a)`, `dt = 0.01 / max rate`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsBlock {
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub max_records: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GillespieBlock {
    pub t_end: f64,
    pub burn_in: f64,
    #[serde(default)]
    pub sample_stride: Option<f64>,
    #[serde(default)]
    pub n_batches: Option<usize>,
    /// Include the snapshot trace in the output.
    #[serde(default)]
    pub trace: bool,
}

/// Defaults: `t_anchor = 10 / min(μ, κ)`, `dt` at the stability cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelateBlock {
    pub n_traj: usize,
    pub tau_grid: Vec<f64>,
    #[serde(default)]
    pub t_anchor: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandBlock {
    /// Band half-widths in rad/s.
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub spectrum: Option<SpectrumBlock>,
}

/// Optional spectrum export alongside the band table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub half_width: f64,
    pub points: usize,
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 config, 3 numerical failure, 4 self-check, 1 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Model(Error::Validation { .. }) => 2,
            CliError::Model(Error::Invariant { .. }) | CliError::SelfCheck(_) => 4,
            CliError::Model(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Comma-joined values with 17 significant digits.
pub fn format_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub git: &'static str,
    pub command: CommandKind,
    pub params: ParamsInput,
    pub seed: u64,
    pub rng: &'static str,
}

impl Metadata {
    fn new(command: CommandKind, params: &LaserParams, seed: u64) -> Self {
        Self {
            tool: "laserlab",
            version: VERSION,
            git: GIT_HASH,
            command,
            params: params.input(),
            seed,
            rng: RNG_DESCRIPTION,
        }
    }

    /// `#`-prefixed lines placed ahead of CSV data.
    pub fn csv_header(&self) -> String {
        let params = serde_json::to_string(&self.params).expect("params serialize");
        format!(
            "# {} {} (git {})\n# command: {}\n# params: {params}\n# seed: {}\n# rng: {}\n",
            self.tool,
            self.version,
            self.git,
            self.command.as_str(),
            self.seed,
            self.rng,
        )
    }
}

/// Primary output plus any side files requested by the config.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub primary: String,
    pub extra: Vec<(PathBuf, String)>,
}

impl From<String> for Rendered {
    fn from(primary: String) -> Self {
        Self {
            primary,
            extra: Vec::new(),
        }
    }
}

/// Parses arguments already handed over by clap and writes the outputs.
pub fn run(cli: &Cli) -> CliResult<()> {
    let (kind, args) = cli.command.split();
    let cfg = load_config(&args.config)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let rendered = render(kind, &cfg, seed, args.self_check)?;
    for (path, text) in &rendered.extra {
        std::fs::write(path, text)?;
    }
    match &args.out {
        Some(path) => std::fs::write(path, &rendered.primary)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(rendered.primary.as_bytes())?;
        }
    }
    Ok(())
}

pub fn render(
    kind: CommandKind,
    cfg: &RunConfig,
    seed: u64,
    self_check: bool,
) -> CliResult<Rendered> {
    let params = cfg.params.build()?;
    let meta = Metadata::new(kind, &params, seed);
    match kind {
        CommandKind::Report => cmd_report(&params, &meta, self_check).map(Into::into),
        CommandKind::Sweep => {
            cmd_sweep(&params, cfg.sweep.as_ref(), &meta, self_check).map(Into::into)
        }
        CommandKind::Dynamics => {
            let block = cfg.dynamics.clone().unwrap_or_default();
            cmd_dynamics(&params, &block, &meta, self_check).map(Into::into)
        }
        CommandKind::Gillespie => {
            let block = require(cfg.gillespie.as_ref(), "gillespie")?;
            cmd_gillespie(&params, block, &meta, self_check).map(Into::into)
        }
        CommandKind::Correlate => {
            let block = require(cfg.correlate.as_ref(), "correlate")?;
            cmd_correlate(&params, block, &meta, self_check).map(Into::into)
        }
        CommandKind::Band => {
            let block = require(cfg.band.as_ref(), "band")?;
            cmd_band(&params, block, &meta, self_check)
        }
    }
}

fn require<'a, T>(block: Option<&'a T>, name: &str) -> CliResult<&'a T> {
    block.ok_or_else(|| CliError::Config(format!("missing \"{name}\" block")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn check(ok: bool, what: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::SelfCheck(what()))
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[derive(Serialize)]
struct ReportOutput<'a> {
    metadata: &'a Metadata,
    eta: f64,
    report: StatisticsReport,
}

pub fn cmd_report(params: &LaserParams, meta: &Metadata, self_check: bool) -> CliResult<String> {
    let report = analytic::statistics_report(params)?;
    if self_check {
        let solved = dynamics::steady_state_solve(params)?;
        for (got, want) in solved
            .populations
            .as_array()
            .iter()
            .zip(report.populations.as_array())
        {
            check(rel_gap(*got, want) <= EXACT_TOL, || {
                format!("linear solve population {got} vs closed form {want}")
            })?;
        }
        let s = analytic::squeezing_of_eta(params.eta());
        check((s - report.squeezing).abs() <= EXACT_TOL, || {
            format!("squeezing {} vs η form {s}", report.squeezing)
        })?;
    }
    Ok(to_json(&ReportOutput {
        metadata: meta,
        eta: params.eta(),
        report,
    }))
}

/// `points` values spaced evenly in `ln η` over `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> CliResult<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(CliError::Config(
            "sweep grid needs 0 < eta_min < eta_max and at least 2 points".into(),
        ));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (a + i as f64 * step).exp(),
        })
        .collect())
}

fn sweep_grid(block: Option<&SweepBlock>) -> CliResult<Vec<f64>> {
    let Some(block) = block else {
        let (lo, hi) = DEFAULT_ETA_RANGE;
        return log_grid(lo, hi, DEFAULT_SWEEP_POINTS);
    };
    match &block.eta {
        Some(grid) if grid.is_empty() => Err(CliError::Config("sweep grid is empty".into())),
        Some(grid) => Ok(grid.clone()),
        None => log_grid(
            block.eta_min.unwrap_or(DEFAULT_ETA_RANGE.0),
            block.eta_max.unwrap_or(DEFAULT_ETA_RANGE.1),
            block.points.unwrap_or(DEFAULT_SWEEP_POINTS),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub eta: f64,
    pub squeezing: f64,
    pub nbar_over_n: f64,
    pub nvar_ratio: f64,
}

/// One row per η; `κ`, `g` and `N` are held, `r_a` follows η.
pub fn sweep_rows(params: &LaserParams, grid: &[f64]) -> crate::Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&eta| {
            let p = params.with_eta(eta)?;
            let nbar = analytic::mean_photon_number(&p);
            let nvar = analytic::photon_variance(&p)?;
            Ok(SweepRow {
                eta,
                squeezing: analytic::quadrature_squeezing(&p).0,
                nbar_over_n: nbar / p.n(),
                nvar_ratio: nvar / (nbar * nbar),
            })
        })
        .collect()
}

pub fn cmd_sweep(
    params: &LaserParams,
    block: Option<&SweepBlock>,
    meta: &Metadata,
    self_check: bool,
) -> CliResult<String> {
    let grid = sweep_grid(block)?;
    let rows = sweep_rows(params, &grid)?;
    if self_check {
        for r in &rows {
            // independent route: S from η alone, n̄/N and (Δn)²/n̄² from populations
            let s = analytic::squeezing_of_eta(r.eta);
            let frac = 2.0 * params.gamma_c() / params.kappa() / (r.eta + 2.0);
            let ratio = 0.25 * (3.0 * r.eta + 2.0);
            check(
                (r.squeezing - s).abs() <= EXACT_TOL
                    && rel_gap(r.nbar_over_n, frac) <= EXACT_TOL
                    && rel_gap(r.nvar_ratio, ratio) <= EXACT_TOL,
                || format!("sweep row at eta = {} disagrees with closed forms", r.eta),
            )?;
        }
    }
    let mut out = meta.csv_header();
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &rows {
        out.push_str(&format_row(&[
            r.eta,
            r.squeezing,
            r.nbar_over_n,
            r.nvar_ratio,
        ]));
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_dynamics(
    params: &LaserParams,
    block: &DynamicsBlock,
    meta: &Metadata,
    self_check: bool,
) -> CliResult<String> {
    let t_end = block
        .t_end
        .unwrap_or(400.0 / params.gamma_c().min(params.pump_rate()));
    let dt = block.dt.unwrap_or_else(|| TimeGrid::default_dt(params));
    let grid = TimeGrid::with_max_records(
        t_end,
        dt,
        block.max_records.unwrap_or(dynamics::DEFAULT_MAX_RECORDS),
    )?;
    let traj = dynamics::evolve_moments(params, &MomentState::ground(params), &grid)?;
    if self_check {
        let n = params.n();
        for s in &traj.states {
            let total = s.na + s.nb + s.nc;
            check(rel_gap(total, n) <= EXACT_TOL, || {
                format!("population sum drifted to {total}")
            })?;
        }
        let solved = dynamics::steady_state_solve(params)?;
        let closed = analytic::steady_populations(params);
        for (got, want) in solved.populations.as_array().iter().zip(closed.as_array()) {
            check(rel_gap(*got, want) <= EXACT_TOL, || {
                format!("linear solve population {got} vs closed form {want}")
            })?;
        }
    }
    let mut buf = meta.csv_header().into_bytes();
    let extra = format!(
        "# dt: {:e}\n# method: {}\n# params_hash: {}\n",
        traj.metadata.dt, traj.metadata.method, traj.metadata.params_hash
    );
    buf.extend_from_slice(extra.as_bytes());
    traj.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

#[derive(Serialize)]
struct GillespieOutput<'a> {
    metadata: &'a Metadata,
    config: JumpConfig,
    events: u64,
    records: Vec<EstimateRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [(f64, u64, u64, u64)]>,
}

pub fn cmd_gillespie(
    params: &LaserParams,
    block: &GillespieBlock,
    meta: &Metadata,
    self_check: bool,
) -> CliResult<String> {
    let mut jc = JumpConfig::new(params.n_atoms(), block.t_end, block.burn_in, meta.seed);
    if let Some(stride) = block.sample_stride {
        jc.sample_stride = stride;
    }
    if let Some(nb) = block.n_batches {
        jc.n_batches = nb;
    }
    let res = stochastic::gillespie_populations(params, &jc)?;
    let closed = analytic::steady_populations(params).fractions();
    let fractions = res.fractions(params.n_atoms());
    if self_check {
        for (name, (est, want)) in ["a", "b", "c"].iter().zip(fractions.iter().zip(closed)) {
            check(est.within(want, MC_SIGMA), || {
                format!(
                    "level {name} fraction {} ± {} vs {want}",
                    est.mean, est.std_error
                )
            })?;
        }
    }
    let records = ["fraction_a", "fraction_b", "fraction_c"]
        .iter()
        .zip(fractions.iter().zip(closed))
        .map(|(name, (est, want))| EstimateRecord::new(*name, est, Some(want)))
        .collect();
    Ok(to_json(&GillespieOutput {
        metadata: meta,
        config: jc,
        events: res.events,
        records,
        trace: block.trace.then_some(res.trace.as_slice()),
    }))
}

#[derive(Serialize)]
struct CorrelateOutput<'a> {
    metadata: &'a Metadata,
    config: CorrelationConfig,
    report: stochastic::CorrelationReport,
}

pub fn cmd_correlate(
    params: &LaserParams,
    block: &CorrelateBlock,
    meta: &Metadata,
    self_check: bool,
) -> CliResult<String> {
    let cc = CorrelationConfig {
        n_traj: block.n_traj,
        t_anchor: block
            .t_anchor
            .unwrap_or_else(|| CorrelationConfig::min_anchor(params)),
        tau_grid: block.tau_grid.clone(),
        dt: block
            .dt
            .unwrap_or_else(|| stochastic::LangevinConfig::max_dt(params)),
        seed: meta.seed,
    };
    let report = stochastic::two_time_correlation(params, &cc)?;
    if self_check {
        check(report.max_abs_deviation() <= MC_SIGMA, || {
            format!(
                "correlation deviates by {:.2} standard errors",
                report.max_abs_deviation()
            )
        })?;
    }
    Ok(to_json(&CorrelateOutput {
        metadata: meta,
        config: cc,
        report,
    }))
}

pub fn cmd_band(
    params: &LaserParams,
    block: &BandBlock,
    meta: &Metadata,
    self_check: bool,
) -> CliResult<Rendered> {
    if block.lambda.is_empty() {
        return Err(CliError::Config("band lambda grid is empty".into()));
    }
    let reports = block
        .lambda
        .iter()
        .map(|&l| spectral::band_report(params, l))
        .collect::<crate::Result<Vec<BandReport>>>()?;
    if self_check {
        let (s, _) = analytic::quadrature_squeezing(params);
        let (_, var_minus) = analytic::quadrature_variances(params);
        for r in &reports {
            check((r.squeezing_band - s).abs() <= 1e-12, || {
                format!(
                    "band squeezing {} at lambda {} differs from {s}",
                    r.squeezing_band, r.lambda
                )
            })?;
            let q = spectral::verify_band_by_quadrature(params, r.lambda, 1e-10 * var_minus)?;
            check(q.agrees, || {
                format!(
                    "quadrature {} vs closed form {} at lambda {}",
                    q.quadrature, q.closed_form, q.lambda
                )
            })?;
        }
    }
    let mut buf = meta.csv_header().into_bytes();
    spectral::write_band_csv(&reports, &mut buf)?;
    let mut rendered = Rendered::from(String::from_utf8(buf).expect("CSV is UTF-8"));
    if let Some(sb) = &block.spectrum {
        let grid = spectral::symmetric_grid(sb.half_width, sb.points)?;
        let curve = spectral::quadrature_spectrum(params, &grid)?;
        let mut buf = meta.csv_header().into_bytes();
        curve.write_csv(&mut buf)?;
        rendered.extra.push((
            sb.out.clone(),
            String::from_utf8(buf).expect("CSV is UTF-8"),
        ));
    }
    Ok(rendered)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA4: &str =
        r#"{"params": {"g": 1.0, "kappa": 16.0, "pump_rate": 0.0625, "n_atoms": 100}}"#;

    fn eta4_config() -> RunConfig {
        parse_config(ETA4).unwrap()
    }

    #[test]
    fn row_format_round_trips() {
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23];
        let row = format_row(&vals);
        let back: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(back, vals);
        assert_eq!(format_row(&[1.0]), "1.0000000000000000e0");
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"params": {"g": 1, "kappa": 1, "pump_rate": 1, "n_atoms": 1}, "extra": 1}"#;
        let err = parse_config(bad).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let nested = r#"{"params": {"g": 1, "kappa": 1, "pump_rate": 1, "n_atoms": 1},
                         "sweep": {"etas": [1]}}"#;
        assert!(parse_config(nested).is_err());
    }

    #[test]
    fn invalid_params_exit_two() {
        let cfg =
            parse_config(r#"{"params": {"g": -1, "kappa": 1, "pump_rate": 1, "n_atoms": 1}}"#)
                .unwrap();
        let err = render(CommandKind::Report, &cfg, 0, false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            CliError::Model(Error::Divergence { time: 1.0 }).exit_code(),
            3
        );
        assert_eq!(CliError::SelfCheck("x".into()).exit_code(), 4);
        let inv = Error::Invariant {
            what: "x",
            deviation: 1.0,
        };
        assert_eq!(CliError::Model(inv).exit_code(), 4);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.01, 100.0, 401).unwrap();
        assert_eq!((g[0], g[400]), (0.01, 100.0));
        assert!((g[200] - 1.0).abs() < 1e-14);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn sweep_single_points() {
        let p = eta4_config().params.build().unwrap();
        let rows = sweep_rows(&p, &[1.0, 0.25]).unwrap();
        assert!((rows[0].squeezing - 1.0 / 3.0).abs() < 1e-15);
        assert!((rows[0].nvar_ratio - 1.25).abs() < 1e-12);
        assert!(rows[1].squeezing.abs() < 1e-15);
    }

    #[test]
    fn empty_sweep_grid_is_config_error() {
        let mut cfg = eta4_config();
        cfg.sweep = Some(SweepBlock {
            eta: Some(vec![]),
            eta_min: None,
            eta_max: None,
            points: None,
        });
        assert_eq!(
            render(CommandKind::Sweep, &cfg, 0, false)
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn report_self_check_passes() {
        let out = render(CommandKind::Report, &eta4_config(), 0, true).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.primary).unwrap();
        assert!((v["report"]["squeezing"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(v["metadata"]["command"], "report");
    }

    #[test]
    fn band_requires_block() {
        let err = render(CommandKind::Band, &eta4_config(), 0, false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn csv_metadata_lines_lead() {
        let out = render(CommandKind::Sweep, &eta4_config(), 7, false).unwrap();
        let mut lines = out.primary.lines().skip_while(|l| l.starts_with('#'));
        assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER);
        assert_eq!(lines.count(), DEFAULT_SWEEP_POINTS);
        assert!(out.primary.contains("# seed: 7"));
    }
}
