//! Configuration ingestion, run orchestration, and machine-readable output.
//!
//! A run is described by a single JSON document: the well (coupling matrix
//! as nested `[re, im]` pairs plus the half-width), a search region, named
//! tolerance overrides, and the list of tasks. Complex numbers are `[re,
//! im]` arrays everywhere. Identical configurations produce byte-identical
//! CSV output; floating-point values are written with Rust's shortest
//! round-trip formatting.

use crate::bschwinger::det_agreement;
use crate::classify::{imaginary_axis_check, quadrant_census, real_resonances};
use crate::error::{Error, Result};
use crate::jost::{jost_function, volterra_residual};
use crate::matfun::{spectrum_with_multiplicity, C64, CMatrix, EigenvalueData, SquareWell};
use crate::multiplicity::{boundary_count, omega_class, resonance_multiplicity, weyl_counting};
use crate::scalar_res::{four_eq_residual, Resonance, SearchRegion};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

/// Grid size for the Volterra-series self-check in the verify task.
const VERIFY_QUAD_N: usize = 128;
/// Nystrom discretization size for the determinant agreement check.
const VERIFY_NYSTROM_N: usize = 256;
/// Probe ring radius factor for the determinant-dip check, relative to
/// `1 + |lambda|`.
const DIP_RING: f64 = 0.05;
/// Eigenvalues this close to the real axis (relative) are treated as real
/// couplings for classification purposes.
const REAL_AXIS_TOL: f64 = 1e-12;

/// Parsed run configuration. Field names match the JSON schema; unknown
/// keys anywhere in the document are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub well: WellConfig,
    pub region: RegionConfig,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub tasks: Vec<TaskKind>,
}

impl RunConfig {
    /// Structural validation: well shape and invertibility, region
    /// geometry, tolerance keys and values.
    pub fn validate(&self) -> Result<()> {
        self.well.build()?;
        self.region.to_region()?;
        Tolerances::resolve(&self.tolerances)?;
        Ok(())
    }
}

/// The potential: a square complex matrix as nested `[re, im]` pairs and
/// the half-width of the supporting interval.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellConfig {
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub ell: f64,
}

impl WellConfig {
    pub fn build(&self) -> Result<SquareWell> {
        let d = self.matrix.len();
        if d == 0 {
            return Err(Error::Config("matrix must be non-empty".into()));
        }
        if self.matrix.iter().any(|row| row.len() != d) {
            return Err(Error::Config(format!(
                "matrix rows must all have length {d} to form a square matrix"
            )));
        }
        let a = CMatrix::from_fn(d, d, |i, j| C64::new(self.matrix[i][j][0], self.matrix[i][j][1]));
        SquareWell::new(a, self.ell)
    }
}

/// Search region in the JSON schema: `{"disk": {"center": [re, im],
/// "radius": r}}` or `{"rectangle": {"re": [lo, hi], "im": [lo, hi]}}`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionConfig {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { re: [f64; 2], im: [f64; 2] },
}

impl RegionConfig {
    pub fn to_region(self) -> Result<SearchRegion> {
        let region = match self {
            RegionConfig::Disk { center, radius } => SearchRegion::Disk {
                center: C64::new(center[0], center[1]),
                radius,
            },
            RegionConfig::Rectangle { re, im } => SearchRegion::Rect {
                re: (re[0], re[1]),
                im: (im[0], im[1]),
            },
        };
        region.validate()?;
        Ok(region)
    }
}

/// The tasks a run may request. Execution order is fixed by data
/// dependencies, not by the order listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Resonances,
    Classify,
    Multiplicity,
    Weyl,
    Verify,
    Plot,
}

/// Resolved tolerance set. Every key is overridable from the config map or
/// `--tol key=value`; unknown keys are rejected rather than ignored.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub four_eq_residual: f64,
    pub f_tilde_dip: f64,
    pub det_agreement: f64,
    pub volterra_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            four_eq_residual: 1e-8,
            f_tilde_dip: 1e-8,
            det_agreement: 1e-3,
            volterra_residual: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn resolve(map: &BTreeMap<String, f64>) -> Result<Tolerances> {
        let mut tol = Tolerances::default();
        for (key, &value) in map {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Config(format!(
                    "tolerance '{key}' must be finite and positive, got {value}"
                )));
            }
            match key.as_str() {
                "four_eq_residual" => tol.four_eq_residual = value,
                "f_tilde_dip" => tol.f_tilde_dip = value,
                "det_agreement" => tol.det_agreement = value,
                "volterra_residual" => tol.volterra_residual = value,
                other => {
                    return Err(Error::Config(format!(
                        "unknown tolerance key '{other}' (expected one of four_eq_residual, \
                         f_tilde_dip, det_agreement, volterra_residual)"
                    )))
                }
            }
        }
        Ok(tol)
    }
}

/// Self-consistency report produced by the verify task.
#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub resonance_count: usize,
    pub multiplicity_sum: i64,
    pub boundary_winding: i64,
    pub winding_consistent: bool,
    /// Largest (over resonances) best four-equation residual over the
    /// generating eigenvalues; absent when the region holds no resonance.
    pub four_eq_max: Option<f64>,
    /// Largest ratio of `|f_tilde|` at a resonance to its maximum on a
    /// small probe ring; the origin is excluded (certified by winding).
    pub f_tilde_dip_max: Option<f64>,
    pub volterra_max: Option<f64>,
    pub det_agreement_max: Option<f64>,
    pub sample_count: usize,
    pub tolerances: Tolerances,
    pub passed: bool,
}

impl VerifyReport {
    /// Turn a failed report into the exit-code-bearing error: winding
    /// mismatch is an incompleteness diagnostic, a residual over tolerance
    /// is a numerical failure.
    pub fn gate(&self) -> Result<()> {
        if !self.winding_consistent {
            return Err(Error::Incomplete {
                expected: self.boundary_winding,
                found: self.multiplicity_sum,
            });
        }
        let checks = [
            ("four_eq_residual", self.four_eq_max, self.tolerances.four_eq_residual),
            ("f_tilde_dip", self.f_tilde_dip_max, self.tolerances.f_tilde_dip),
            ("volterra_residual", self.volterra_max, self.tolerances.volterra_residual),
            ("det_agreement", self.det_agreement_max, self.tolerances.det_agreement),
        ];
        for (check, value, tol) in checks {
            if let Some(v) = value {
                if v > tol {
                    return Err(Error::ToleranceExceeded { check, value: v, tol });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct ClassificationReport {
    quadrants: QuadrantCensus,
    axes: AxisCensus,
    eigenvalues: Vec<EigenvalueReport>,
}

#[derive(Debug, Serialize)]
struct QuadrantCensus {
    q1: usize,
    q2: usize,
    q3: usize,
    q4: usize,
}

#[derive(Debug, Serialize)]
struct AxisCensus {
    real: usize,
    imaginary: usize,
    origin: usize,
}

#[derive(Debug, Serialize)]
struct EigenvalueReport {
    index: usize,
    alpha: [f64; 2],
    algebraic_multiplicity: usize,
    omega: String,
    omega_residual: f64,
    /// Real couplings only; `null` when the eigenvalue is genuinely complex.
    imaginary_axis_clear: Option<bool>,
    real_axis: Option<RealAxisReport>,
}

#[derive(Debug, Serialize)]
struct RealAxisReport {
    positive_roots: Vec<f64>,
    negative_roots: Vec<f64>,
    special: Vec<String>,
}

#[derive(Parser)]
#[command(
    name = "resonwell",
    version,
    about = "Resonances of the 1-D Schrodinger operator with a matrix square-well potential"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the tasks in a run configuration and write output files.
    Run {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Tolerance override, repeatable: --tol key=value.
        #[arg(long = "tol", value_name = "KEY=VALUE")]
        tol: Vec<String>,
    },
    /// Compute the self-consistency report and print it as JSON.
    Verify {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Tolerance override, repeatable: --tol key=value.
        #[arg(long = "tol", value_name = "KEY=VALUE")]
        tol: Vec<String>,
    },
}

/// Binary entry point; returns the process exit code. Errors print one
/// line `error: <reason>` on stderr.
pub fn main() -> i32 {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {}", reason(&e));
        return e.exit_code();
    }
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", reason(&e));
            e.exit_code()
        }
    }
}

/// One-line machine-parsable reason for the diagnostic stream.
fn reason(err: &Error) -> String {
    match err {
        Error::SingularCoupling { .. } => "matrix a not invertible".into(),
        other => other.to_string(),
    }
}

/// Cap the global worker pool from `RESONWELL_THREADS` before any parallel
/// work runs. Unset means the library default.
fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RESONWELL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::Config(format!("RESONWELL_THREADS must be a positive integer, got '{raw}'"))
    })?;
    if threads == 0 {
        return Err(Error::Config("RESONWELL_THREADS must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, tol } => {
            let cfg = load_config(&config, &tol)?;
            execute_run(&cfg, &out)
        }
        Command::Verify { config, tol } => {
            let cfg = load_config(&config, &tol)?;
            let report = verify_config(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            report.gate()
        }
    }
}

/// Parse a configuration document without touching the filesystem.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read a configuration file and fold in `--tol key=value` overrides.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg: RunConfig = serde_json::from_str(&text)?;
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Error::Config(format!("tolerance override '{item}' must look like key=value"))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!("tolerance override '{item}' has a non-numeric value"))
        })?;
        cfg.tolerances.insert(key.trim().to_string(), value);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Execute the configured tasks in dependency order and write the output
/// files into `out`. Plain outputs are written before the certification
/// gates run, so diagnostic files survive a failed run.
pub fn execute_run(cfg: &RunConfig, out: &Path) -> Result<()> {
    let well = cfg.well.build()?;
    let region = cfg.region.to_region()?;
    let tolerances = Tolerances::resolve(&cfg.tolerances)?;
    let tasks: BTreeSet<TaskKind> = cfg.tasks.iter().copied().collect();
    if tasks.is_empty() {
        return Ok(());
    }
    std::fs::create_dir_all(out)?;

    let resonances = crate::multiplicity::well_resonances(&well, &region)?;
    let eigendata = spectrum_with_multiplicity(&well, None)?;

    if tasks.contains(&TaskKind::Resonances) {
        std::fs::write(out.join("resonances.csv"), resonances_csv(&resonances))?;
    }
    if tasks.contains(&TaskKind::Classify) {
        let report = classification_report(&well, &region, &resonances, &eigendata)?;
        write_json(&out.join("classification.json"), &report)?;
    }
    if tasks.contains(&TaskKind::Weyl) {
        std::fs::write(out.join("weyl.csv"), weyl_csv(&well, &region, &resonances))?;
    }
    if tasks.contains(&TaskKind::Plot) {
        for (index, rows) in plot_series(&resonances, eigendata.len()) {
            std::fs::write(out.join(format!("plot_{index}.csv")), rows)?;
        }
    }
    if tasks.contains(&TaskKind::Multiplicity) {
        certify_multiplicities(&well, &region, &resonances, &eigendata)?;
    }
    if tasks.contains(&TaskKind::Verify) {
        let report = build_verify_report(&well, &region, &resonances, &eigendata, tolerances)?;
        write_json(&out.join("verify.json"), &report)?;
        report.gate()?;
    }
    Ok(())
}

/// Build the verify report for a configuration without writing files.
pub fn verify_config(cfg: &RunConfig) -> Result<VerifyReport> {
    let well = cfg.well.build()?;
    let region = cfg.region.to_region()?;
    let tolerances = Tolerances::resolve(&cfg.tolerances)?;
    let resonances = crate::multiplicity::well_resonances(&well, &region)?;
    let eigendata = spectrum_with_multiplicity(&well, None)?;
    build_verify_report(&well, &region, &resonances, &eigendata, tolerances)
}

fn resonances_csv(resonances: &[Resonance]) -> String {
    let mut text = String::from("re,im,multiplicity,generator_indices,tags\n");
    for r in resonances {
        let generators =
            r.generators.iter().map(ToString::to_string).collect::<Vec<_>>().join(";");
        let tags = r.tags.iter().map(ToString::to_string).collect::<Vec<_>>().join(";");
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.lambda.re, r.lambda.im, r.multiplicity, generators, tags
        ));
    }
    text
}

fn weyl_csv(well: &SquareWell, region: &SearchRegion, resonances: &[Resonance]) -> String {
    let r_max = region.bounding_radius();
    let limit = 4.0 * well.ell() * well.dim() as f64 / PI;
    let mut text = String::from("radius,count,ratio,limit\n");
    for k in 1..=10u32 {
        let radius = r_max * f64::from(k) / 10.0;
        let count = weyl_counting(resonances, radius);
        let ratio = count as f64 / radius;
        text.push_str(&format!("{radius},{count},{ratio},{limit}\n"));
    }
    text
}

/// One CSV per eigenvalue index, holding the resonances it generates.
fn plot_series(resonances: &[Resonance], eigencount: usize) -> Vec<(usize, String)> {
    (0..eigencount)
        .map(|index| {
            let mut text = String::from("re,im,multiplicity\n");
            for r in resonances.iter().filter(|r| r.generators.contains(&index)) {
                text.push_str(&format!("{},{},{}\n", r.lambda.re, r.lambda.im, r.multiplicity));
            }
            (index, text)
        })
        .collect()
}

fn classification_report(
    well: &SquareWell,
    region: &SearchRegion,
    resonances: &[Resonance],
    eigendata: &[EigenvalueData],
) -> Result<ClassificationReport> {
    let [q1, q2, q3, q4] = quadrant_census(resonances);
    let mut axes = AxisCensus { real: 0, imaginary: 0, origin: 0 };
    for r in resonances {
        let eps = 1e-8 * (1.0 + r.lambda.norm());
        if r.lambda.norm() <= eps {
            axes.origin += 1;
        } else if r.lambda.im.abs() <= eps {
            axes.real += 1;
        } else if r.lambda.re.abs() <= eps {
            axes.imaginary += 1;
        }
    }

    let mut eigenvalues = Vec::with_capacity(eigendata.len());
    for (index, data) in eigendata.iter().enumerate() {
        let class = omega_class(data.alpha, well.ell());
        let is_real = data.alpha.im.abs() <= REAL_AXIS_TOL * (1.0 + data.alpha.norm());
        let (imaginary_axis_clear, real_axis) = if is_real {
            let clear = imaginary_axis_check(C64::new(data.alpha.re, 0.0), well.ell(), region)?;
            let report = real_resonances(data.alpha.re, well.ell())?;
            (
                Some(clear),
                Some(RealAxisReport {
                    positive_roots: report.positive_roots,
                    negative_roots: report.negative_roots,
                    special: report.special.iter().map(ToString::to_string).collect(),
                }),
            )
        } else {
            (None, None)
        };
        eigenvalues.push(EigenvalueReport {
            index,
            alpha: [data.alpha.re, data.alpha.im],
            algebraic_multiplicity: data.mult_a,
            omega: class.membership.to_string(),
            omega_residual: class.residual,
            imaginary_axis_clear,
            real_axis,
        });
    }

    Ok(ClassificationReport {
        quadrants: QuadrantCensus { q1, q2, q3, q4 },
        axes,
        eigenvalues,
    })
}

/// Re-derive every multiplicity from the eigenvalue formula and check the
/// global winding count; a mismatch is an incompleteness diagnostic.
fn certify_multiplicities(
    well: &SquareWell,
    region: &SearchRegion,
    resonances: &[Resonance],
    eigendata: &[EigenvalueData],
) -> Result<()> {
    for r in resonances {
        let (formula, _) = resonance_multiplicity(r.lambda, well, eigendata)?;
        if formula != r.multiplicity {
            return Err(Error::Incomplete {
                expected: formula as i64,
                found: r.multiplicity as i64,
            });
        }
    }
    let winding = boundary_count(well, region)?;
    let total: i64 = resonances.iter().map(|r| r.multiplicity as i64).sum();
    if winding != total {
        return Err(Error::Incomplete { expected: winding, found: total });
    }
    Ok(())
}

fn build_verify_report(
    well: &SquareWell,
    region: &SearchRegion,
    resonances: &[Resonance],
    eigendata: &[EigenvalueData],
    tolerances: Tolerances,
) -> Result<VerifyReport> {
    let mut four_eq_max: Option<f64> = None;
    let mut dip_max: Option<f64> = None;
    for r in resonances {
        if r.lambda.norm() <= 1e-9 {
            continue;
        }
        let best_four_eq = eigendata
            .iter()
            .map(|data| four_eq_residual(r.lambda, data.alpha, well.ell()))
            .fold(f64::INFINITY, f64::min);
        fold_max(&mut four_eq_max, best_four_eq);

        let log_at = jost_function(r.lambda, well)?
            .log_abs_f_tilde
            .expect("nonzero lambda has a normalized determinant");
        let ring = DIP_RING * (1.0 + r.lambda.norm());
        let mut log_scale = f64::NEG_INFINITY;
        for k in 0..16 {
            let probe = r.lambda + C64::from_polar(ring, TAU * k as f64 / 16.0);
            if let Some(l) = jost_function(probe, well)?.log_abs_f_tilde {
                log_scale = log_scale.max(l);
            }
        }
        fold_max(&mut dip_max, (log_at - log_scale).exp());
    }

    let boundary_winding = boundary_count(well, region)?;
    let multiplicity_sum: i64 = resonances.iter().map(|r| r.multiplicity as i64).sum();

    let samples = sample_points(region, resonances)?;
    let mut volterra_max: Option<f64> = None;
    let mut det_agreement_max: Option<f64> = None;
    for &lambda in &samples {
        fold_max(&mut volterra_max, volterra_residual(lambda, well, VERIFY_QUAD_N)?);
        match det_agreement(lambda, VERIFY_NYSTROM_N, well) {
            Ok(gap) => fold_max(&mut det_agreement_max, gap),
            Err(Error::PoleProximity { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let mut report = VerifyReport {
        resonance_count: resonances.len(),
        multiplicity_sum,
        boundary_winding,
        winding_consistent: boundary_winding == multiplicity_sum,
        four_eq_max,
        f_tilde_dip_max: dip_max,
        volterra_max,
        det_agreement_max,
        sample_count: samples.len(),
        tolerances,
        passed: false,
    };
    report.passed = report.gate().is_ok();
    Ok(report)
}

fn fold_max(acc: &mut Option<f64>, value: f64) {
    *acc = Some(acc.map_or(value, |m| m.max(value)));
}

/// Deterministic probe points for the residual checks: a ring well inside
/// the region, keeping away from the origin and from found resonances.
fn sample_points(region: &SearchRegion, resonances: &[Resonance]) -> Result<Vec<C64>> {
    let (center, reach) = match *region {
        SearchRegion::Disk { center, radius } => (center, radius),
        SearchRegion::Rect { re, im } => (
            C64::new(0.5 * (re.0 + re.1), 0.5 * (im.0 + im.1)),
            0.5 * (re.1 - re.0).min(im.1 - im.0),
        ),
    };
    let ring = 0.6 * reach;
    let points: Vec<C64> = (0..12)
        .map(|k| center + C64::from_polar(ring, TAU * (k as f64 + 0.37) / 12.0))
        .filter(|lambda| {
            lambda.norm() > 1e-3 * (1.0 + reach)
                && resonances
                    .iter()
                    .all(|r| (lambda - r.lambda).norm() > DIP_RING * (1.0 + lambda.norm()))
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::Validation(
            "too few resonance-free probe points in the region for verification".into(),
        ));
    }
    Ok(points)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
