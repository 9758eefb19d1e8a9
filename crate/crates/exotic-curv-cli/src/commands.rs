//! The `verify`, `scan` and `profile` commands.
//!
//! Each command returns an exit code: `0` on success, `1` when the run
//! completed but a check failed, `2` for configuration errors and `3` for
//! runtime errors.

use crate::config::{ConfigError, RunConfig};
use crate::output::{self, Annotation};
use exotic_curv::curvature::curvature_tensor;
use exotic_curv::metric::Stage;
use exotic_curv::psi::{self, PsiParams};
use exotic_curv::quat::Quaternion;
use exotic_curv::scan::{self, ScanResult};
use exotic_curv::verify::{self, CheckReport, Suite};
use exotic_curv::zero_locus;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
use std::path::{Path, PathBuf};

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "EXOTIC_CURV_SEED";

/// Exit code of a completed run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code of a completed run with a failed check.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for runtime errors.
pub const EXIT_RUNTIME: i32 = 3;

/// A failure that aborts a command.
#[derive(Debug)]
pub enum CommandError {
    /// The configuration or the command line is invalid.
    Config(String),
    /// The computation or the output failed.
    Runtime(String),
}

impl CommandError {
    /// The matching exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => EXIT_CONFIG,
            CommandError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(m) => write!(f, "{m}"),
            CommandError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e.to_string())
    }
}

impl From<exotic_curv::Error> for CommandError {
    fn from(e: exotic_curv::Error) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CommandError {
    fn from(e: csv::Error) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CommandError {
    fn from(e: serde_json::Error) -> Self {
        CommandError::Runtime(e.to_string())
    }
}

/// Output formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Format {
    /// Comma-separated values.
    Csv,
    /// JSON reports.
    Json,
    /// SVG plots.
    Svg,
}

impl Format {
    /// The name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Quantities plotted by `profile`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ProfileKind {
    /// `ψ`, `D_ζψ` and `D_ζD_ζψ` along the meridian.
    Psi,
    /// `curv_s(ζ, W)` along the meridian.
    MeridianCurvature,
    /// The boundary of `{L ≤ 1}` in the `(t, θ)` square.
    ZeroLocus,
}

impl ProfileKind {
    fn name(self) -> &'static str {
        match self {
            ProfileKind::Psi => "psi",
            ProfileKind::MeridianCurvature => "meridian-curvature",
            ProfileKind::ZeroLocus => "zero-locus",
        }
    }
}

/// Settings shared by all commands.
#[derive(Clone, Debug)]
pub struct Options {
    /// Configuration file; defaults apply when absent.
    pub config: Option<PathBuf>,
    /// Output directory.
    pub out: PathBuf,
    /// Requested formats; empty means the command's defaults.
    pub formats: Vec<Format>,
    /// Seed override, normally taken from the environment.
    pub seed: Option<String>,
}

/// Reads the configuration and applies the seed override.
pub fn load_config(opts: &Options) -> Result<RunConfig, CommandError> {
    let src = match &opts.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CommandError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&src)?;
    if let Some(seed) = &opts.seed {
        let seed = seed
            .trim()
            .parse::<u64>()
            .map_err(|e| CommandError::Config(format!("{SEED_ENV} = {seed:?} is not an unsigned integer: {e}")))?;
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn formats(
    opts: &Options,
    defaults: &[Format],
    allowed: &[Format],
    command: &str,
) -> Result<Vec<Format>, CommandError> {
    if opts.formats.is_empty() {
        return Ok(defaults.to_vec());
    }
    if let Some(f) = opts.formats.iter().find(|f| !allowed.contains(f)) {
        return Err(CommandError::Config(format!(
            "format {} is not available for {command}",
            f.name()
        )));
    }
    Ok(opts.formats.clone())
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CommandError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    config_hash: String,
    config: String,
    pass: bool,
    failing: Vec<&'a str>,
    reports: &'a [CheckReport],
}

/// Runs the selected suites (the configured ones when `suites` is empty)
/// and writes the report.
pub fn cmd_verify(opts: &Options, suites: &[String]) -> Result<i32, CommandError> {
    let fmts = formats(opts, &[Format::Json], &[Format::Json, Format::Csv], "verify")?;
    let mut cfg = load_config(opts)?;
    if !suites.is_empty() {
        cfg.suites = suites
            .iter()
            .map(|n| Suite::parse(n).ok_or_else(|| CommandError::Config(format!("unknown suite {n:?}"))))
            .collect::<Result<_, _>>()?;
    }
    let reports = verify::run_suites(&cfg.suites, &cfg.verify)?;
    let failing: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    for r in &reports {
        let status = match (&r.skipped, r.pass) {
            (Some(_), _) => "SKIP",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        println!("{status} {}", r.id);
    }
    let out = VerifyOutput {
        config_hash: cfg.hash(),
        config: cfg.to_toml(),
        pass: failing.is_empty(),
        failing: failing.clone(),
        reports: &reports,
    };
    for f in fmts {
        match f {
            Format::Json => write(&opts.out, "verify.json", output::to_json(&out)?.as_bytes())?,
            Format::Csv => {
                let mut buf = Vec::new();
                output::write_report_parts(&mut buf, &reports)?;
                write(&opts.out, "verify.csv", &buf)?
            }
            Format::Svg => unreachable!("rejected above"),
        };
    }
    if failing.is_empty() {
        Ok(EXIT_PASS)
    } else {
        eprintln!("failing checks: {}", failing.join(", "));
        Ok(EXIT_FAIL)
    }
}

#[derive(Serialize)]
struct Counts {
    records: usize,
    refined: usize,
    cells: usize,
    failures: usize,
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    config_hash: String,
    stage: &'static str,
    global_min: Option<f64>,
    argmin: Option<&'a scan::CurvatureRecord>,
    counts: Counts,
    failures: &'a [scan::ScanFailure],
    cell_minima: Vec<f64>,
    neighborhood: Option<scan::NeighborhoodReport>,
}

/// Tolerance below zero still counted as nonnegative by `scan`.
pub const SCAN_TOLERANCE: f64 = 1e-6;

/// Scans the configured stage and writes the record stream, the summary
/// and the heatmap. Exits with `1` when a sampled curvature is below
/// `−SCAN_TOLERANCE` or an evaluation failed.
pub fn cmd_scan(opts: &Options) -> Result<i32, CommandError> {
    let all = [Format::Csv, Format::Json, Format::Svg];
    let fmts = formats(opts, &all, &all, "scan")?;
    let cfg = load_config(opts)?;
    let spec = &cfg.scan;
    let result: ScanResult = scan::min_scan(spec)?;
    let minima = scan::cell_minima(spec, &result);
    let neighborhood = if cfg.neighborhood {
        Some(scan::neighborhood_scan(spec)?)
    } else {
        None
    };
    let global = result.global_min.as_ref().map(|r| r.sec);
    for f in fmts {
        match f {
            Format::Csv => {
                let mut buf = Vec::new();
                output::write_records(&mut buf, &result.records)?;
                write(&opts.out, "scan.csv", &buf)?;
            }
            Format::Json => {
                let summary = ScanSummary {
                    config_hash: cfg.hash(),
                    stage: spec.config.stage.name(),
                    global_min: global,
                    argmin: result.global_min.as_ref(),
                    counts: Counts {
                        records: result.records.len(),
                        refined: result.records.iter().filter(|r| r.refined).count(),
                        cells: spec.cells(),
                        failures: result.failures.len(),
                    },
                    failures: &result.failures,
                    cell_minima: minima.clone(),
                    neighborhood: neighborhood.clone(),
                };
                write(&opts.out, "scan_summary.json", output::to_json(&summary)?.as_bytes())?;
            }
            Format::Svg => {
                let svg = output::heatmap(
                    &format!("minimum sectional curvature, stage {}", spec.config.stage.name()),
                    "t",
                    "theta",
                    (spec.t_min, FRAC_PI_4),
                    (0.0, std::f64::consts::PI),
                    spec.grid_t,
                    spec.grid_theta,
                    &minima,
                );
                write(&opts.out, "scan_heatmap.svg", svg.as_bytes())?;
            }
        }
    }
    println!("records: {}, failures: {}", result.records.len(), result.failures.len());
    match &result.global_min {
        Some(r) => println!(
            "global minimum {} at t = {}, theta = {}",
            output::fmt17(r.sec),
            output::fmt17(r.t),
            output::fmt17(r.theta)
        ),
        None => println!("no records"),
    }
    if let Some(n) = &neighborhood {
        println!("neighborhood minimum of P {}", output::fmt17(n.min_p));
    }
    let ok = result.failures.is_empty() && global.is_some_and(|m| m >= -SCAN_TOLERANCE);
    if ok {
        Ok(EXIT_PASS)
    } else {
        eprintln!("scan found negative curvature or failed evaluations");
        Ok(EXIT_FAIL)
    }
}

#[derive(Serialize)]
struct ProfileOutput {
    config_hash: String,
    what: &'static str,
    columns: Vec<(String, Vec<f64>)>,
    annotations: Vec<(String, f64, f64)>,
}

struct ProfileData {
    x_label: &'static str,
    y_label: &'static str,
    title: String,
    names: Vec<&'static str>,
    columns: Vec<Vec<f64>>,
    annotations: Vec<Annotation>,
}

fn psi_profile(cfg: &RunConfig) -> Result<ProfileData, CommandError> {
    let r = &cfg.verify.regime;
    let p = PsiParams::new(r.nu, r.l)?;
    let n = cfg.plot_samples;
    let ts: Vec<f64> = (0..n).map(|k| FRAC_PI_4 * k as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = ts.iter().map(|&t| psi::psi(t, 0.0, &p).psi).collect();
    let (d1, d2): (Vec<f64>, Vec<f64>) = ts.iter().map(|&t| psi::meridian_psi(t, &p)).unzip();
    let end = *values.last().expect("at least two samples");
    Ok(ProfileData {
        x_label: "t",
        y_label: "value",
        title: format!("psi along the meridian, nu = {:.5}, l = {:.5}", r.nu, r.l),
        names: vec!["t", "psi", "d_zeta_psi", "d_zeta_d_zeta_psi"],
        columns: vec![ts, values, d1, d2],
        annotations: vec![Annotation {
            x: FRAC_PI_4,
            y: end,
            label: format!("psi(pi/4) = nu_l/2 = {:.6}", p.nu_l() / 2.0),
        }],
    })
}

fn meridian_curvature_profile(cfg: &RunConfig) -> Result<ProfileData, CommandError> {
    let r = &cfg.verify.regime;
    let p = r.psi_params();
    let n = cfg.plot_samples;
    let stage = r.at_stage(Stage::FiberScaled);
    let ts: Vec<f64> = (0..n).map(|k| FRAC_PI_4 * k as f64 / (n - 1) as f64).collect();
    let closed: Vec<f64> = ts
        .iter()
        .map(|&t| verify::meridian_curv_closed_form(t, r.s, r.nu, &p))
        .collect();
    let numeric: Vec<f64> = ts
        .iter()
        .map(|&t| {
            if t < r.t_min || t >= FRAC_PI_4 {
                return f64::NAN;
            }
            zero_locus::zero_plane_at(t, 0.0, Quaternion::I, Quaternion::J, r.nu, None)
                .and_then(|z| curvature_tensor(&stage, &z.point).map(|tensor| tensor.curv(&z.zeta, &z.w)))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let mut annotations = Vec::new();
    if let Some(k) = (1..n).find(|&k| closed[k - 1] < 0.0 && closed[k] >= 0.0) {
        annotations.push(Annotation {
            x: ts[k],
            y: 0.0,
            label: format!("sign change at t = {:.4} (nu = {:.4})", ts[k], r.nu),
        });
    }
    Ok(ProfileData {
        x_label: "t",
        y_label: "curv_s(zeta, W)",
        title: format!("curvature of the zero planes after fiber scaling, s = {}", r.s),
        names: vec!["t", "closed_form", "numeric"],
        columns: vec![ts, closed, numeric],
        annotations,
    })
}

fn zero_locus_profile(cfg: &RunConfig) -> ProfileData {
    let n = cfg.plot_samples + cfg.plot_samples % 2;
    let thetas: Vec<f64> = (0..=n)
        .map(|k| std::f64::consts::FRAC_PI_2 * k as f64 / n as f64)
        .collect();
    let boundary: Vec<f64> = thetas
        .iter()
        .map(|&th| {
            let g = |t: f64| psi::zero_gauge(t, th) - 1.0;
            if g(0.0) <= 0.0 {
                return 0.0;
            }
            let (mut lo, mut hi) = (0.0, FRAC_PI_4);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    ProfileData {
        x_label: "theta",
        y_label: "t",
        title: "boundary of {L <= 1}: zero planes lie above the curve".into(),
        names: vec!["theta", "t_boundary"],
        columns: vec![thetas, boundary],
        annotations: vec![Annotation {
            x: FRAC_PI_4,
            y: FRAC_PI_6,
            label: "t = pi/6 on cos 2theta = 0".into(),
        }],
    }
}

/// Computes one profile and writes it as CSV, SVG and JSON.
pub fn cmd_profile(opts: &Options, what: ProfileKind) -> Result<i32, CommandError> {
    let all = [Format::Csv, Format::Json, Format::Svg];
    let fmts = formats(opts, &[Format::Csv, Format::Svg], &all, "profile")?;
    let cfg = load_config(opts)?;
    let data = match what {
        ProfileKind::Psi => psi_profile(&cfg)?,
        ProfileKind::MeridianCurvature => meridian_curvature_profile(&cfg)?,
        ProfileKind::ZeroLocus => zero_locus_profile(&cfg),
    };
    let stem = format!("profile_{}", what.name());
    for f in fmts {
        match f {
            Format::Csv => {
                let mut buf = Vec::new();
                output::write_columns(&mut buf, &data.names, &data.columns)?;
                write(&opts.out, &format!("{stem}.csv"), &buf)?;
            }
            Format::Svg => {
                let series: Vec<(&str, &[f64])> = data
                    .names
                    .iter()
                    .zip(&data.columns)
                    .skip(1)
                    .map(|(n, c)| (*n, c.as_slice()))
                    .collect();
                let svg = output::line_plot(
                    &data.title,
                    data.x_label,
                    data.y_label,
                    &data.columns[0],
                    &series,
                    &data.annotations,
                );
                write(&opts.out, &format!("{stem}.svg"), svg.as_bytes())?;
            }
            Format::Json => {
                let out = ProfileOutput {
                    config_hash: cfg.hash(),
                    what: what.name(),
                    columns: data
                        .names
                        .iter()
                        .map(|n| n.to_string())
                        .zip(data.columns.iter().cloned())
                        .collect(),
                    annotations: data.annotations.iter().map(|a| (a.label.clone(), a.x, a.y)).collect(),
                };
                write(&opts.out, &format!("{stem}.json"), output::to_json(&out)?.as_bytes())?;
            }
        }
    }
    for a in &data.annotations {
        println!("{}", a.label);
    }
    Ok(EXIT_PASS)
}
