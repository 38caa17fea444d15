//! Command-line front end.
//!
//! Exit status: 0 on success, 2 for bad flags or parameters, 3 when a
//! numerical procedure did not converge (data files are still written, with
//! the failing rows flagged).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    self, default_x_grid_for_eta, fit_ab, fit_ab_weighted, linear_grid, log_grid, scan_lenient, Route,
    ScalingFit, ScanPoint, ScanRow, ScanTable, DEFAULT_CRITICAL_X,
};
use crate::error::{Error, Result};
use crate::export::{self, fmt_value, RunManifest};
use crate::params::{classify, ModelKind, ModelParams, Phase};
use crate::thermo::classical::{fc_closed, fc_quadrature, QuadratureSpec};
use crate::thermo::quantum::{fq_closed, fq_numeric, fq_printed_sum};
use crate::thermo::FreeEnergy;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "quantumness", version, about = "Quantum vs classical free energies of the generalized Rabi model")]
pub struct Cli {
    /// Output directory for datasets.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Tail tolerance of numeric free energies.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub eps: f64,
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Accepted for scripting; every computation is deterministic.
    #[arg(long, global = true)]
    pub seedless: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Quantum or classical free energy at one point.
    FreeEnergy(FreeEnergyArgs),
    /// ΔQC = F_Q − F_C at one point.
    Quantumness(QuantumnessArgs),
    /// ΔQC over a grid of x and q.
    Scan(ScanArgs),
    /// Fit A/√x + B/x to a scan CSV.
    Fit(FitArgs),
    /// Dataset behind a figure panel.
    Figure(FigureArgs),
    /// Closed-form free energies next to their numeric counterparts.
    Table1(Table1Args),
    /// Trapped-ion estimate in physical units.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ModelArg {
    Jc,
    Ajc,
    Rabi,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum TreatmentArg {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum MethodArg {
    Numeric,
    Closed,
}

impl From<MethodArg> for Route {
    fn from(m: MethodArg) -> Route {
        match m {
            MethodArg::Numeric => Route::Numeric,
            MethodArg::Closed => Route::ClosedForm,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PointArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub q: f64,
    /// g1/(g1+g2); implied by --model jc/ajc/rabi.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gc: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FreeEnergyArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum)]
    pub treatment: TreatmentArg,
    #[arg(long, value_enum, default_value = "numeric")]
    pub method: MethodArg,
}

#[derive(Debug, Args, Serialize)]
pub struct QuantumnessArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value = "numeric")]
    pub method: MethodArg,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Comma-separated x values.
    #[arg(long, value_delimiter = ',', conflicts_with = "x_log")]
    pub x: Vec<f64>,
    /// LO,HI,N log-spaced x values.
    #[arg(long, value_delimiter = ',')]
    pub x_log: Vec<f64>,
    /// Comma-separated q values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<f64>,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_enum, default_value = "numeric")]
    pub method: MethodArg,
    /// Dataset file name without extension.
    #[arg(long, default_value = "scan")]
    pub name: String,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Scan CSV to fit; rows are grouped by (q, eta, beta).
    #[arg(long)]
    pub input: PathBuf,
    /// Weight points by 1/err².
    #[arg(long)]
    pub weighted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FigureId {
    #[value(name = "2a")]
    F2a,
    #[value(name = "2b")]
    F2b,
    #[value(name = "2c")]
    F2c,
    #[value(name = "2d")]
    F2d,
    #[value(name = "3a")]
    F3a,
    #[value(name = "3b")]
    F3b,
    #[value(name = "3c")]
    F3c,
    #[value(name = "3d")]
    F3d,
    #[value(name = "3e")]
    F3e,
    #[value(name = "3f")]
    F3f,
    #[value(name = "4a")]
    F4a,
    #[value(name = "4b")]
    F4b,
    #[value(name = "4c")]
    F4c,
    #[value(name = "4d")]
    F4d,
    #[value(name = "5")]
    F5,
}

impl FigureId {
    fn label(self) -> &'static str {
        match self {
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F2c => "2c",
            FigureId::F2d => "2d",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F3c => "3c",
            FigureId::F3d => "3d",
            FigureId::F3e => "3e",
            FigureId::F3f => "3f",
            FigureId::F4a => "4a",
            FigureId::F4b => "4b",
            FigureId::F4c => "4c",
            FigureId::F4d => "4d",
            FigureId::F5 => "5",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FigureArgs {
    #[arg(long, value_enum)]
    pub id: FigureId,
    /// Overrides the panel's default inverse temperature(s).
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Overrides the x of the critical-point panels.
    #[arg(long)]
    pub x: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Table1Args {
    #[arg(long, default_value_t = 1e4)]
    pub x: f64,
    /// One q per phase to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.5")]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gc: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    /// Trap frequency in kHz.
    #[arg(long, default_value_t = 4.0)]
    pub omega_khz: f64,
    /// Spin splitting in kHz.
    #[arg(long = "Omega-khz", default_value_t = 100.0)]
    pub big_omega_khz: f64,
    /// Treat the kHz values as ordinary frequencies and multiply by 2π.
    #[arg(long)]
    pub two_pi: bool,
    /// β·ħgc; ignored when --beta is given.
    #[arg(long, default_value_t = 5.0)]
    pub beta_gc: f64,
    /// Inverse temperature in the units of 1/frequency.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Largest coupling as a multiple of gc.
    #[arg(long, default_value_t = 1.4)]
    pub g_max: f64,
    #[arg(long, default_value_t = 15)]
    pub points: usize,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let started = Instant::now();
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &raw, started)),
            Err(e) => Err(Error::InvalidParams(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli, &raw, started),
    };
    match outcome {
        Ok(Status::Clean) => 0,
        Ok(Status::Unconverged(n)) => {
            eprintln!("error: {n} row(s) did not converge; they are flagged in the output");
            EXIT_NUMERIC
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

enum Status {
    Clean,
    Unconverged(usize),
}

fn dispatch(cli: &Cli, raw: &[String], started: Instant) -> Result<Status> {
    if !(cli.eps > 0.0 && cli.eps < 1.0) {
        return Err(Error::InvalidParams(format!("--eps must lie in (0, 1), got {}", cli.eps)));
    }
    let ctx = Context { out: &cli.out, eps: cli.eps, raw, started };
    match &cli.command {
        Command::FreeEnergy(a) => cmd_free_energy(a, cli.eps),
        Command::Quantumness(a) => cmd_quantumness(a, cli.eps),
        Command::Scan(a) => cmd_scan(a, &ctx),
        Command::Fit(a) => cmd_fit(a),
        Command::Figure(a) => cmd_figure(a, &ctx),
        Command::Table1(a) => cmd_table1(a, &ctx),
        Command::Experiment(a) => cmd_experiment(a, &ctx),
    }
}

struct Context<'a> {
    out: &'a Path,
    eps: f64,
    raw: &'a [String],
    started: Instant,
}

impl Context<'_> {
    fn manifest<P: Serialize>(&self, params: &P) -> RunManifest {
        let value = serde_json::to_value(params).unwrap_or(serde_json::Value::Null);
        RunManifest::new(self.raw.to_vec(), value, self.eps)
    }

    fn finish(&self, name: &str, csv: &str, mut manifest: RunManifest) -> Result<PathBuf> {
        let path = self.out.join(format!("{name}.csv"));
        manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        export::write_dataset(&path, csv, &manifest)?;
        println!("{}", path.display());
        Ok(path)
    }
}

fn resolve_eta(model: Option<ModelArg>, eta: Option<f64>) -> Result<f64> {
    let implied = match model {
        Some(ModelArg::Jc) => Some(1.0),
        Some(ModelArg::Ajc) => Some(0.0),
        Some(ModelArg::Rabi) => Some(0.5),
        Some(ModelArg::Generalized) | None => None,
    };
    match (implied, eta) {
        (Some(i), Some(e)) if i != e => Err(Error::InvalidParams(format!("--eta {e} contradicts the model's η = {i}"))),
        (Some(i), _) => Ok(i),
        (None, Some(e)) => Ok(e),
        (None, None) => Err(Error::InvalidParams("give --model or --eta".into())),
    }
}

fn point_params(a: &PointArgs) -> Result<ModelParams> {
    let eta = resolve_eta(a.model, a.eta)?;
    ModelParams::from_dimensionless(a.x, a.q, eta, a.gc, a.beta, a.hbar)
}

fn print_free_energy(label: &str, f: &FreeEnergy) {
    println!("{label}={} err={} method={}", fmt_value(f.value), fmt_value(f.err_estimate), f.method.tag());
}

fn cmd_free_energy(a: &FreeEnergyArgs, eps: f64) -> Result<Status> {
    let p = point_params(&a.point)?;
    let beta = a.point.beta;
    let f = match (a.treatment, a.method) {
        (TreatmentArg::Quantum, MethodArg::Numeric) => fq_numeric(&p, beta, eps)?,
        (TreatmentArg::Classical, MethodArg::Numeric) => {
            fc_quadrature(&p, beta, &QuadratureSpec { rel_tol: eps.max(1e-13), ..Default::default() })?
        }
        (TreatmentArg::Quantum, MethodArg::Closed) => {
            let d = p.derive()?;
            fq_closed(p.kind(), d.phase, d.x, d.q, beta, d.gc, p.hbar)?
        }
        (TreatmentArg::Classical, MethodArg::Closed) => {
            let d = p.derive()?;
            fc_closed(d.phase, d.x, d.q, beta, d.gc, p.hbar)?
        }
    };
    let label = match a.treatment {
        TreatmentArg::Quantum => "F_Q",
        TreatmentArg::Classical => "F_C",
    };
    print_free_energy(label, &f);
    Ok(Status::Clean)
}

fn cmd_quantumness(a: &QuantumnessArgs, eps: f64) -> Result<Status> {
    let p = point_params(&a.point)?;
    let v = analysis::delta_qc(&p, a.point.beta, a.method.into(), eps)?;
    print_free_energy("F_Q", &v.f_q);
    print_free_energy("F_C", &v.f_c);
    println!("delta_qc={} err={}", fmt_value(v.value), fmt_value(v.err));
    Ok(Status::Clean)
}

/// CSV for a lenient scan: failed rows keep their coordinates and carry
/// `nan` values with method `unconverged`.
fn lenient_csv(points: &[ScanPoint], rows: &[Result<ScanRow>], ratio: bool) -> (String, usize) {
    let ok: Vec<ScanRow> = rows.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
    let mut table = ScanTable { rows: ok };
    if ratio {
        for r in &mut table.rows {
            r.ratio = Some(r.delta_qc / r.f_c.value);
        }
    }
    let good = export::scan_csv(&table);
    let mut good_lines = good.lines().skip(1);
    let mut out = String::from(export::SCAN_HEADER);
    if ratio {
        out.push_str(",ratio");
    }
    out.push('\n');
    let mut failed = 0;
    for (pt, r) in points.iter().zip(rows) {
        match r {
            Ok(_) => {
                out.push_str(good_lines.next().unwrap_or_default());
            }
            Err(_) => {
                failed += 1;
                let coords = [pt.x, pt.q, pt.eta, pt.beta].map(fmt_value).join(",");
                let _ = write!(out, "{coords},nan,nan,nan,nan,unconverged,unconverged");
                if ratio {
                    out.push_str(",nan");
                }
            }
        }
        out.push('\n');
    }
    (out, failed)
}

fn manifest_rows(manifest: &mut RunManifest, rows: &[Result<ScanRow>]) {
    manifest.rows = rows
        .iter()
        .map(|r| match r {
            Ok(r) => export::RowTag { method_q: r.f_q.method.tag().into(), method_c: r.f_c.method.tag().into(), converged: true },
            Err(_) => export::RowTag { method_q: "unconverged".into(), method_c: "unconverged".into(), converged: false },
        })
        .collect();
}

/// Runs a lenient scan, writes the dataset and returns the exit status.
fn write_scan<P: Serialize>(ctx: &Context, name: &str, points: &[ScanPoint], route: Route, params: &P, ratio: bool) -> Result<Status> {
    let rows = scan_lenient(points, route, ctx.eps);
    if let Some(Err(e)) = rows.iter().find(|r| matches!(r, Err(e) if !e.is_numerical())) {
        return Err(e.clone());
    }
    let (csv, failed) = lenient_csv(points, &rows, ratio);
    let mut manifest = ctx.manifest(params);
    manifest_rows(&mut manifest, &rows);
    ctx.finish(name, &csv, manifest)?;
    Ok(if failed == 0 { Status::Clean } else { Status::Unconverged(failed) })
}

fn cmd_scan(a: &ScanArgs, ctx: &Context) -> Result<Status> {
    let eta = resolve_eta(a.model, a.eta)?;
    let xs = if !a.x_log.is_empty() {
        if a.x_log.len() != 3 {
            return Err(Error::InvalidParams("--x-log takes LO,HI,N".into()));
        }
        let n = a.x_log[2];
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(Error::InvalidParams("--x-log needs an integer point count".into()));
        }
        log_grid(a.x_log[0], a.x_log[1], n as usize)
    } else if !a.x.is_empty() {
        a.x.clone()
    } else {
        return Err(Error::InvalidParams("give --x or --x-log".into()));
    };
    let points: Vec<ScanPoint> =
        a.q.iter().flat_map(|&q| xs.iter().map(move |&x| ScanPoint::dimensionless(x, q, eta, a.beta))).collect();
    check_name(&a.name)?;
    write_scan(ctx, &a.name, &points, a.method.into(), a, false)
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(Error::InvalidParams(format!("bad dataset name {name:?}")));
    }
    Ok(())
}

fn fit_header() -> &'static str {
    "q,eta,beta,A,B,residual_rms,A_closed,B_closed"
}

fn fit_line(q: f64, eta: f64, fit: &ScalingFit) -> String {
    let kind = if eta == 1.0 {
        Some(ModelKind::JC)
    } else if eta == 0.0 {
        Some(ModelKind::AJC)
    } else {
        None
    };
    let closed = kind.and_then(|k| analysis::coeff_closed(k, q, fit.beta, 1.0, 1.0).ok());
    let (ac, bc) = closed.map(|(a, b)| (fmt_value(a), fmt_value(b))).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{ac},{bc}",
        fmt_value(q),
        fmt_value(eta),
        fmt_value(fit.beta),
        fmt_value(fit.a),
        fmt_value(fit.b),
        fmt_value(fit.residual_rms)
    )
}

fn cmd_fit(a: &FitArgs) -> Result<Status> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
    let rows = export::parse_scan_csv(&text)?;
    // groups in order of first appearance
    let mut groups: Vec<((f64, f64, f64), Vec<&export::CsvRow>)> = Vec::new();
    for r in &rows {
        let key = (r.q, r.eta, r.beta);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let mut fits = Vec::new();
    println!("{}", fit_header());
    for ((q, eta, beta), mut g) in groups {
        g.sort_by(|l, r| l.x.total_cmp(&r.x));
        let x: Vec<f64> = g.iter().map(|r| r.x).collect();
        let d: Vec<f64> = g.iter().map(|r| r.delta_qc).collect();
        let fit = if a.weighted {
            let w: Vec<f64> = g.iter().map(|r| 1.0 / r.err.max(1e-300).powi(2)).collect();
            fit_ab_weighted(&x, &d, Some(&w), beta)?
        } else {
            fit_ab(&x, &d, beta)?
        };
        println!("{}", fit_line(q, eta, &fit));
        fits.push(fit);
    }
    let mpath = export::manifest_path(&a.input);
    let mut manifest = if mpath.exists() {
        export::read_manifest(&mpath)?
    } else {
        RunManifest::new(vec![], serde_json::Value::Null, 0.0)
    };
    manifest.fits.extend(fits);
    export::write_manifest(&mpath, &manifest)?;
    Ok(Status::Clean)
}

fn cmd_figure(a: &FigureArgs, ctx: &Context) -> Result<Status> {
    use FigureId::*;
    let name = format!("figure_{}", a.id.label());
    let betas = |default: &[f64]| if a.beta.is_empty() { default.to_vec() } else { a.beta.clone() };
    match a.id {
        F2a | F2b | F2c | F2d => {
            let (eta, qs, beta_default, lo, hi): (f64, &[f64], f64, f64, f64) = match a.id {
                F2a => (1.0, &[0.3, 0.7, 1.5], 2.0, 1e2, 1e4),
                F2b => (0.0, &[0.3, 0.7, 1.5], 2.0, 1e2, 1e4),
                F2c => (0.5, &[0.6], 5.0, 25.0, 400.0),
                _ => (0.5, &[1.2], 5.0, 25.0, 400.0),
            };
            let xs = log_grid(lo, hi, 16);
            let points: Vec<ScanPoint> = betas(&[beta_default])
                .iter()
                .flat_map(|&b| qs.iter().flat_map(move |&q| log_grid(lo, hi, 16).into_iter().map(move |x| ScanPoint::dimensionless(x, q, eta, b))))
                .collect();
            debug_assert_eq!(points.len() % xs.len(), 0);
            write_scan(ctx, &name, &points, Route::Numeric, a, false)
        }
        F3a | F3b | F3c | F3d | F3e | F3f => figure_fits(a, ctx, &name, &betas(&[20.0, 80.0])),
        F4a | F4b | F4c | F4d => {
            let eta = match a.id {
                F4a => 0.0,
                F4b => 0.5,
                F4c => 0.75,
                _ => 1.0,
            };
            let x = a.x.unwrap_or(DEFAULT_CRITICAL_X);
            let qs = linear_grid(0.0, 1.5, 31);
            let points: Vec<ScanPoint> =
                betas(&[5.0]).iter().flat_map(|&b| qs.iter().map(move |&q| ScanPoint::dimensionless(x, q, eta, b))).collect();
            write_scan(ctx, &name, &points, Route::Numeric, a, false)
        }
        F5 => {
            let e = ExperimentArgs {
                omega_khz: 4.0,
                big_omega_khz: 100.0,
                two_pi: true,
                beta_gc: a.beta.first().copied().unwrap_or(5.0),
                beta: None,
                g_max: 1.4,
                points: 15,
            };
            experiment_dataset(&e, ctx, &name)
        }
    }
}

/// A and B fitted per coupling at each β.
fn figure_fits(a: &FigureArgs, ctx: &Context, name: &str, betas: &[f64]) -> Result<Status> {
    use FigureId::*;
    let couplings: Vec<f64> = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.1, 1.2, 1.3, 1.4, 1.5].to_vec();
    // (q, eta) pairs
    let series: Vec<(f64, f64)> = match a.id {
        F3a | F3b => couplings.iter().map(|&q| (q, 1.0)).collect(),
        F3c | F3d => couplings.iter().map(|&q| (q, 0.0)).collect(),
        _ => [0.6, 1.2].iter().flat_map(|&q| [0.0, 0.25, 0.5, 0.75, 1.0].map(|e| (q, e))).collect(),
    };
    let mut csv = format!("{}\n", fit_header());
    let mut manifest = ctx.manifest(a);
    let mut failed = 0;
    for &beta in betas {
        let results: Vec<Result<ScalingFit>> = {
            use rayon::prelude::*;
            series
                .par_iter()
                .map(|&(q, eta)| analysis::fit_at(q, eta, beta, &default_x_grid_for_eta(eta), ctx.eps).map(|(_, f)| f))
                .collect()
        };
        for (&(q, eta), r) in series.iter().zip(results) {
            match r {
                Ok(fit) => {
                    csv.push_str(&fit_line(q, eta, &fit));
                    manifest.fits.push(fit);
                }
                Err(e) if e.is_numerical() => {
                    failed += 1;
                    let _ = write!(csv, "{},{},{},nan,nan,nan,,", fmt_value(q), fmt_value(eta), fmt_value(beta));
                }
                Err(e) => return Err(e),
            }
            csv.push('\n');
        }
    }
    ctx.finish(name, &csv, manifest)?;
    Ok(if failed == 0 { Status::Clean } else { Status::Unconverged(failed) })
}

fn cmd_table1(a: &Table1Args, ctx: &Context) -> Result<Status> {
    let mut csv = String::from("cell,x,q,beta,closed,numeric,printed_sum,difference\n");
    let mut failed = 0;
    for &q in &a.q {
        let phase = classify(q);
        if phase == Phase::Critical {
            return Err(Error::Critical("no closed-form cell at q = 1"));
        }
        let tag = if phase == Phase::Normal { "n" } else { "sr" };
        let jc = ModelParams::from_dimensionless(a.x, q, 1.0, a.gc, a.beta, a.hbar)?;
        let ajc = ModelParams::from_dimensionless(a.x, q, 0.0, a.gc, a.beta, a.hbar)?;
        let mut cells: Vec<(String, FreeEnergy, Result<FreeEnergy>, Option<Result<FreeEnergy>>)> = Vec::new();
        for (label, kind, p) in [("JC", ModelKind::JC, &jc), ("aJC", ModelKind::AJC, &ajc)] {
            cells.push((
                format!("{label} ({tag}) quantum"),
                fq_closed(kind, phase, a.x, q, a.beta, a.gc, a.hbar)?,
                fq_numeric(p, a.beta, ctx.eps),
                Some(fq_printed_sum(p, a.beta, ctx.eps)),
            ));
        }
        cells.push((
            format!("({tag}) classical"),
            fc_closed(phase, a.x, q, a.beta, a.gc, a.hbar)?,
            fc_quadrature(&jc, a.beta, &QuadratureSpec { rel_tol: ctx.eps.max(1e-13), ..Default::default() }),
            None,
        ));
        for (label, closed, numeric, printed) in cells {
            let num = match &numeric {
                Ok(f) => fmt_value(f.value),
                Err(e) if e.is_numerical() => {
                    failed += 1;
                    "nan".into()
                }
                Err(e) => return Err(e.clone()),
            };
            let printed = match printed {
                Some(Ok(f)) => fmt_value(f.value),
                Some(Err(e)) if e.is_numerical() => {
                    failed += 1;
                    "nan".into()
                }
                Some(Err(e)) => return Err(e),
                None => String::new(),
            };
            let diff = numeric.as_ref().map(|f| fmt_value(f.value - closed.value)).unwrap_or_else(|_| "nan".into());
            let _ = writeln!(
                csv,
                "{label},{},{},{},{},{num},{printed},{diff}",
                fmt_value(a.x),
                fmt_value(q),
                fmt_value(a.beta),
                fmt_value(closed.value)
            );
        }
    }
    ctx.finish("table1", &csv, ctx.manifest(a))?;
    Ok(if failed == 0 { Status::Clean } else { Status::Unconverged(failed) })
}

fn cmd_experiment(a: &ExperimentArgs, ctx: &Context) -> Result<Status> {
    experiment_dataset(a, ctx, "experiment")
}

fn experiment_dataset(a: &ExperimentArgs, ctx: &Context, name: &str) -> Result<Status> {
    let scale = if a.two_pi { 2.0 * std::f64::consts::PI } else { 1.0 };
    let (omega, big_omega) = (a.omega_khz * scale, a.big_omega_khz * scale);
    let base = ModelParams::new(omega, big_omega, 0.0, 0.0, 1.0, 1.0)?;
    let d = base.derive()?;
    let beta = a.beta.unwrap_or(a.beta_gc / d.gc);
    if !(a.g_max >= 0.0 && a.g_max <= 1.5) || a.points < 2 {
        return Err(Error::InvalidParams("coupling grid must lie in [0, 1.5 gc] with at least 2 points".into()));
    }
    let points: Vec<ScanPoint> = linear_grid(0.0, a.g_max, a.points)
        .into_iter()
        .map(|q| ScanPoint { x: d.x, q, eta: 0.5, gc: d.gc, beta, hbar: 1.0 })
        .collect();
    write_scan(ctx, name, &points, Route::Numeric, a, true)
}
