//! Run configuration: a TOML file with flat metric keys and optional
//! `[scan]` and `[plot]` sections.
//!
//! Every key is optional. The metric keys describe the regime metric used
//! by the asymptotic suites, by `scan` and by `profile`; when `nu` or `l`
//! are absent they follow `ν = s^{6/7}` and `l = ν^{1/3}`. The exact
//! identities always run at the fixed metric `(ν, l, s) = (0.5, 1, 0.2)`.
//!
//! ```toml
//! seed = 7
//! suites = ["psi", "cheeger"]
//! s = 0.05
//! C = 1.05
//! grid_t = 12
//! grid_theta = 12
//!
//! [scan]
//! radius = 0.25
//! ```

use exotic_curv::metric::{PiecewiseProfile, RedistributionProfile, Stage, StageConfig};
use exotic_curv::scan::ScanSpec;
use exotic_curv::verify::{Suite, VerifyConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A configuration problem, located in the source text when possible.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// One-based line, zero when unknown.
    pub line: usize,
    /// One-based column, zero when unknown.
    pub column: usize,
    /// Description.
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line > 0 {
            write!(
                f,
                "config error at line {}, column {}: {}",
                self.line, self.column, self.message
            )
        } else {
            write!(f, "config error: {}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// The file as written: every key optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Seed of every random stream.
    pub seed: Option<u64>,
    /// Suites run by `verify`; empty or absent means all.
    pub suites: Option<Vec<String>>,
    /// Constant multiplying the order-of-magnitude budgets.
    pub o_budget_kappa: Option<f64>,
    /// Grid cells in `t`, for suites and scans.
    pub grid_t: Option<usize>,
    /// Grid cells in `θ`, for suites and scans.
    pub grid_theta: Option<usize>,
    /// Random planes per scanned point.
    pub planes_per_point: Option<usize>,
    /// Fiber scale `s`.
    pub s: Option<f64>,
    /// `h₁ ⊕ h₂` scale `ν`.
    pub nu: Option<f64>,
    /// `U ⊕ D` Cheeger scale `l`.
    pub l: Option<f64>,
    /// Constant part `C` of the conformal exponent.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Multiplier of `s²ψ²/(2ν²)` in the conformal exponent.
    pub psi_weight: Option<f64>,
    /// Amplitude constant of the conformal bump.
    pub kappa_iota: Option<f64>,
    /// Support radius of the conformal bump.
    pub bump_radius: Option<f64>,
    /// Diagonal `U × D` scale of the last stage.
    pub l_diag: Option<f64>,
    /// `h₁` scale of the last stage.
    pub l_h1: Option<f64>,
    /// Lower bound on `t` for the conformal stages.
    pub t_min: Option<f64>,
    /// Finite-difference step.
    pub fd_step: Option<f64>,
    /// Stage scanned by `scan`.
    pub stage: Option<String>,
    /// `"piecewise"` or `"identity"`.
    pub redistribution: Option<String>,
    /// Length of the concave piece of the piecewise profile, in units of `ν`.
    pub redistribution_k1: Option<f64>,
    /// Width of the ramps of the piecewise profile.
    pub redistribution_width: Option<f64>,
    /// Scan settings.
    pub scan: Option<ScanSection>,
    /// Plot settings.
    pub plot: Option<PlotSection>,
}

/// The `[scan]` section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// `(α, p)` samples per cell.
    pub alpha_samples: Option<usize>,
    /// Maximum coordinate-descent sweeps.
    pub refine_iterations: Option<usize>,
    /// Largest `|σ|, |τ|` around the zero planes.
    pub radius: Option<f64>,
    /// Lower end of the scanned `t` range; defaults to `t_min`.
    pub t_min: Option<f64>,
    /// Whether to run the neighborhood scan as well.
    pub neighborhood: Option<bool>,
}

/// The `[plot]` section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSection {
    /// Samples along each profile curve.
    pub samples: Option<usize>,
}

/// A fully resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Verification parameters, including the regime metric.
    pub verify: VerifyConfig,
    /// Scan parameters; `scan.config` is the regime metric at the scanned
    /// stage.
    pub scan: ScanSpec,
    /// Suites selected for `verify`, in run order.
    pub suites: Vec<Suite>,
    /// Whether `scan` also runs the neighborhood scan.
    pub neighborhood: bool,
    /// Samples along each profile curve.
    pub plot_samples: usize,
    /// `(k₁, width)` of the piecewise profile, absent for the identity.
    pub redistribution: Option<(f64, f64)>,
}

const DEFAULT_S: f64 = 0.05;
const DEFAULT_K1: f64 = 0.95;
const DEFAULT_WIDTH: f64 = 0.006;

/// One-based `(line, column)` of a byte offset.
fn line_column(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Location of the first assignment to `key`, or `(0, 0)`.
fn key_location(src: &str, key: &str) -> (usize, usize) {
    for (i, line) in src.lines().enumerate() {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return (i + 1, line.len() - trimmed.len() + 1);
            }
        }
    }
    (0, 0)
}

fn at_key(src: &str, key: &str, message: impl Into<String>) -> ConfigError {
    let (line, column) = key_location(src, key);
    ConfigError {
        line,
        column,
        message: message.into(),
    }
}

impl RunConfig {
    /// Parses and resolves a configuration file.
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_column(src, s.start));
            ConfigError {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        Self::resolve(&file, src)
    }

    /// Resolves defaults and validates. `src` is used to locate errors.
    pub fn resolve(file: &ConfigFile, src: &str) -> Result<Self, ConfigError> {
        let s = file.s.unwrap_or(DEFAULT_S);
        if !(s > 0.0 && s < 1.0) {
            return Err(at_key(src, "s", format!("s = {s} must lie in (0, 1)")));
        }
        let nu = file.nu.unwrap_or_else(|| s.powf(6.0 / 7.0));
        let l = file.l.unwrap_or_else(|| nu.powf(1.0 / 3.0));
        let redistribution = match file.redistribution.as_deref().unwrap_or("piecewise") {
            "piecewise" => Some((
                file.redistribution_k1.unwrap_or(DEFAULT_K1),
                file.redistribution_width.unwrap_or(DEFAULT_WIDTH),
            )),
            "identity" => None,
            other => {
                return Err(at_key(
                    src,
                    "redistribution",
                    format!("unknown redistribution {other:?}; expected \"piecewise\" or \"identity\""),
                ))
            }
        };
        let mut regime = StageConfig::positivity_regime(DEFAULT_S).map_err(|e| at_key(src, "s", e.to_string()))?;
        regime.nu = nu;
        regime.l = l;
        regime.s = s;
        regime.bump_radius = 4.0 * nu;
        regime.profile = match redistribution {
            Some((k1, width)) => RedistributionProfile::Piecewise(
                PiecewiseProfile::build(nu, k1, width)
                    .map_err(|e| at_key(src, "redistribution_width", e.to_string()))?,
            ),
            None => RedistributionProfile::Identity,
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut regime.c, file.c);
        set(&mut regime.psi_weight, file.psi_weight);
        set(&mut regime.kappa_iota, file.kappa_iota);
        set(&mut regime.bump_radius, file.bump_radius);
        set(&mut regime.l_diag, file.l_diag);
        set(&mut regime.l_h1, file.l_h1);
        set(&mut regime.t_min, file.t_min);
        set(&mut regime.fd_step, file.fd_step);
        if let Some(name) = &file.stage {
            regime.stage = Stage::parse(name).ok_or_else(|| at_key(src, "stage", format!("unknown stage {name:?}")))?;
        }
        regime.validate().map_err(|e| at_key(src, "nu", e.to_string()))?;

        let mut verify = VerifyConfig::defaults().map_err(|e| at_key(src, "s", e.to_string()))?;
        verify.regime = regime.clone();
        verify.seed = file.seed.unwrap_or(verify.seed);
        verify.o_budget_kappa = file.o_budget_kappa.unwrap_or(verify.o_budget_kappa);
        verify.grid_t = file.grid_t.unwrap_or(verify.grid_t);
        verify.grid_theta = file.grid_theta.unwrap_or(verify.grid_theta);
        if verify.grid_t < 2 || verify.grid_theta < 2 {
            return Err(at_key(src, "grid_t", "grid_t and grid_theta must be at least 2"));
        }
        if !(verify.o_budget_kappa > 0.0) {
            return Err(at_key(src, "o_budget_kappa", "o_budget_kappa must be positive"));
        }

        let suites = match &file.suites {
            None => Suite::ALL.to_vec(),
            Some(names) if names.is_empty() => Suite::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| Suite::parse(n).ok_or_else(|| at_key(src, "suites", format!("unknown suite {n:?}"))))
                .collect::<Result<_, _>>()?,
        };

        let section = file.scan.clone().unwrap_or_default();
        let mut scan = ScanSpec::new(regime.clone(), verify.seed);
        scan.grid_t = verify.grid_t;
        scan.grid_theta = verify.grid_theta;
        scan.planes_per_point = file.planes_per_point.unwrap_or(scan.planes_per_point);
        scan.alpha_samples = section.alpha_samples.unwrap_or(scan.alpha_samples);
        scan.refine_iterations = section.refine_iterations.unwrap_or(scan.refine_iterations);
        scan.radius = section.radius.unwrap_or(scan.radius);
        scan.t_min = section.t_min.unwrap_or(regime.t_min);
        scan.validate()
            .map_err(|e| at_key(src, "planes_per_point", e.to_string()))?;

        let plot_samples = file.plot.as_ref().and_then(|p| p.samples).unwrap_or(200);
        if plot_samples < 2 {
            return Err(at_key(src, "samples", "plot samples must be at least 2"));
        }
        Ok(RunConfig {
            verify,
            scan,
            suites,
            neighborhood: section.neighborhood.unwrap_or(true),
            plot_samples,
            redistribution,
        })
    }

    /// Replaces the seed everywhere it is used.
    pub fn set_seed(&mut self, seed: u64) {
        self.verify.seed = seed;
        self.scan.seed = seed;
    }

    /// The file that resolves to this configuration, with every key set.
    pub fn to_file(&self) -> ConfigFile {
        let r = &self.verify.regime;
        ConfigFile {
            seed: Some(self.verify.seed),
            suites: Some(self.suites.iter().map(|s| s.name().to_string()).collect()),
            o_budget_kappa: Some(self.verify.o_budget_kappa),
            grid_t: Some(self.verify.grid_t),
            grid_theta: Some(self.verify.grid_theta),
            planes_per_point: Some(self.scan.planes_per_point),
            s: Some(r.s),
            nu: Some(r.nu),
            l: Some(r.l),
            c: Some(r.c),
            psi_weight: Some(r.psi_weight),
            kappa_iota: Some(r.kappa_iota),
            bump_radius: Some(r.bump_radius),
            l_diag: Some(r.l_diag),
            l_h1: Some(r.l_h1),
            t_min: Some(r.t_min),
            fd_step: Some(r.fd_step),
            stage: Some(r.stage.name().to_string()),
            redistribution: Some(
                if self.redistribution.is_some() {
                    "piecewise"
                } else {
                    "identity"
                }
                .into(),
            ),
            redistribution_k1: self.redistribution.map(|r| r.0),
            redistribution_width: self.redistribution.map(|r| r.1),
            scan: Some(ScanSection {
                alpha_samples: Some(self.scan.alpha_samples),
                refine_iterations: Some(self.scan.refine_iterations),
                radius: Some(self.scan.radius),
                t_min: Some(self.scan.t_min),
                neighborhood: Some(self.neighborhood),
            }),
            plot: Some(PlotSection {
                samples: Some(self.plot_samples),
            }),
        }
    }

    /// The canonical TOML text of this configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML text, in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_the_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.verify, VerifyConfig::defaults().unwrap());
        assert_eq!(cfg.suites, Suite::ALL.to_vec());
    }

    #[test]
    fn canonical_text_round_trips() {
        let cfg = RunConfig::parse("seed = 3\nC = 0.5\nsuites = [\"psi\"]\n[scan]\nradius = 0.1\n").unwrap();
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = RunConfig::parse("seed = 1\ns = = 2\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.column > 0);
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let err = RunConfig::parse("seed = 1\n  suites = [\"nope\"]\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        let err = RunConfig::parse("bogus = 1\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
