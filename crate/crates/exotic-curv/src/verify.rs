//! Check suites comparing closed-form identities of the construction with
//! the numerical curvature engine.
//!
//! Every suite returns a [`CheckReport`] made of named [`Part`]s. A part
//! holds one residual or extreme value together with the bound it is
//! compared against, and passes exactly when the value respects the bound.
//! Reports are deterministic functions of the [`VerifyConfig`]: random
//! samples are drawn from [`CellRng`] streams keyed by the seed, and no
//! timing information is recorded.

use crate::curvature::{
    biinvariant_sectional, curvature_polynomial, curvature_tensor, curvature_tensor_with, horizontal_part,
    quadratic_subpoly, sigma7_sectional, BaseSubmersion, CurvatureTensor, Plane,
};
use crate::error::{Error, Result};
use crate::lie::{self, Mat10, Vec10, K_DIM};
use crate::metric::{
    conformal_exponent, conformal_exponent_differential, gram_at, projector, random_point, stage_invariance_check,
    vertical_basis, z_perp_projector, RedistributionProfile, Stage, StageConfig,
};
use crate::psi::{self, PsiParams};
use crate::quat::{QMatrix2, Quaternion};
use crate::rng::CellRng;
use crate::sp2::{self, Sp2Point};
use crate::zero_locus::{self, ZeroPlaneSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

/// How a part compares its value with its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Largest absolute residual; passes when `value ≤ bound`.
    Abs,
    /// Largest relative residual; passes when `value ≤ bound`.
    Rel,
    /// Smallest observed value; passes when `value > bound`.
    Lower,
    /// Largest observed value; passes when `value ≤ bound`.
    Upper,
    /// A constraint with its own pass rule; `value` is the extreme observed
    /// and `bound` is zero.
    Constraint,
}

/// Where a worst case was observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    /// Base coordinate `t`, absent for samples not tied to a base point.
    pub t: Option<f64>,
    /// Base coordinate `θ`, absent for samples not tied to a base point.
    pub theta: Option<f64>,
    /// Free-form description of the sample.
    pub detail: String,
}

impl Location {
    fn new(t: f64, theta: f64, detail: impl Into<String>) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Location {
            t: finite(t),
            theta: finite(theta),
            detail: detail.into(),
        }
    }
}

/// One compared quantity of a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Part {
    /// Short name.
    pub name: String,
    /// Comparison rule.
    pub measure: Measure,
    /// Observed residual or extreme.
    pub value: f64,
    /// The bound.
    pub bound: f64,
    /// Whether `value` respects `bound`.
    pub pass: bool,
    /// Number of samples.
    pub samples: usize,
    /// Sample attaining `value`.
    pub worst_location: Option<Location>,
}

/// The outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Suite name.
    pub id: String,
    /// Parameters used.
    pub params: BTreeMap<String, f64>,
    /// Description of the sample grid.
    pub grid: String,
    /// Largest value over the absolute-residual parts.
    pub max_abs: f64,
    /// Largest value over the relative-residual parts.
    pub max_rel: f64,
    /// Location of the part closest to (or furthest past) its bound.
    pub worst_location: Option<Location>,
    /// True when every part passes.
    pub pass: bool,
    /// The individual comparisons.
    pub parts: Vec<Part>,
    /// Set when the suite did not run, with the reason.
    pub skipped: Option<String>,
    /// Diagnostics that are reported but not compared.
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(
        id: &str,
        params: BTreeMap<String, f64>,
        grid: impl Into<String>,
        parts: Vec<Part>,
        notes: Vec<String>,
    ) -> Self {
        let max_of = |m: Measure| {
            parts
                .iter()
                .filter(|p| p.measure == m)
                .fold(0.0f64, |a, p| a.max(p.value))
        };
        let utilization = |p: &Part| -> f64 {
            if !p.pass {
                return f64::INFINITY;
            }
            match p.measure {
                Measure::Lower => {
                    if p.value > 0.0 && p.bound >= 0.0 {
                        p.bound / p.value
                    } else {
                        0.0
                    }
                }
                _ => p.value.abs() / p.bound.abs().max(1e-300),
            }
        };
        let worst = parts
            .iter()
            .filter(|p| p.worst_location.is_some())
            .max_by(|a, b| utilization(a).total_cmp(&utilization(b)))
            .and_then(|p| p.worst_location.clone());
        CheckReport {
            id: id.into(),
            params,
            grid: grid.into(),
            max_abs: max_of(Measure::Abs),
            max_rel: max_of(Measure::Rel),
            worst_location: worst,
            pass: parts.iter().all(|p| p.pass),
            parts,
            skipped: None,
            notes,
        }
    }

    fn skipped(id: &str, params: BTreeMap<String, f64>, reason: String) -> Self {
        CheckReport {
            id: id.into(),
            params,
            grid: String::new(),
            max_abs: 0.0,
            max_rel: 0.0,
            worst_location: None,
            pass: true,
            parts: Vec::new(),
            skipped: Some(reason),
            notes: Vec::new(),
        }
    }

    /// The part called `name`.
    pub fn part(&self, name: &str) -> Option<&Part> {
        self.parts.iter().find(|p| p.name == name)
    }
}

/// Running extreme of one part.
#[derive(Clone, Debug)]
struct Track {
    name: String,
    measure: Measure,
    bound: f64,
    value: f64,
    worst: Option<Location>,
    samples: usize,
    poisoned: bool,
}

impl Track {
    fn new(name: &str, measure: Measure, bound: f64) -> Self {
        let value = if measure == Measure::Lower { f64::INFINITY } else { 0.0 };
        let value = if measure == Measure::Upper {
            f64::NEG_INFINITY
        } else {
            value
        };
        Track {
            name: name.into(),
            measure,
            bound,
            value,
            worst: None,
            samples: 0,
            poisoned: false,
        }
    }

    fn abs(name: &str, bound: f64) -> Self {
        Track::new(name, Measure::Abs, bound)
    }

    fn rel(name: &str, bound: f64) -> Self {
        Track::new(name, Measure::Rel, bound)
    }

    fn lower(name: &str, bound: f64) -> Self {
        Track::new(name, Measure::Lower, bound)
    }

    fn upper(name: &str, bound: f64) -> Self {
        Track::new(name, Measure::Upper, bound)
    }

    fn add(&mut self, v: f64, loc: impl FnOnce() -> Location) {
        self.samples += 1;
        if v.is_nan() {
            if !self.poisoned {
                self.poisoned = true;
                self.worst = Some(loc());
            }
            return;
        }
        if self.poisoned {
            return;
        }
        let better = match self.measure {
            Measure::Lower => v < self.value,
            _ => v > self.value,
        };
        if better || self.worst.is_none() {
            if better {
                self.value = v;
            }
            self.worst = Some(loc());
        }
    }

    fn finish(self) -> Part {
        let value = if self.poisoned { f64::NAN } else { self.value };
        let pass = !self.poisoned
            && self.samples > 0
            && match self.measure {
                Measure::Lower => value > self.bound,
                _ => value <= self.bound,
            };
        Part {
            name: self.name,
            measure: self.measure,
            value,
            bound: self.bound,
            pass,
            samples: self.samples,
            worst_location: self.worst,
        }
    }
}

/// `|a − b| / max(|b|, floor)`.
fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// The verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Numerical sectional curvature of `(½)b` against the bracket formula.
    Biinvariant,
    /// The closed forms for `ψ` and its partials.
    Psi,
    /// The generic Cheeger evaluator against the displayed norms.
    Cheeger,
    /// Flat planes over `{L ≤ 1}` and positivity elsewhere.
    ZeroLocus,
    /// The closed form for `λ` against root finding.
    Lambda,
    /// Curvature of the canonical variation in terms of base data.
    Canonical,
    /// Curvature and `A`-tensor of the base along `H_w`.
    Base,
    /// Pointwise and integrated curvature of the zero planes for `g_s`.
    Formula,
    /// Curvature identities of the redistribution.
    Redistribution,
    /// Location of the curvature of `g_s` near the pole.
    Concentration,
    /// The partial conformal change.
    Conformal,
    /// Quadratic perturbation analysis near the former zero planes.
    MainLemma,
    /// Sampled bounds on the remaining curvature coefficients.
    HigherOrder,
    /// Isometric actions at every stage.
    Invariance,
    /// Constraints on the redistribution profile.
    Profile,
}

impl Suite {
    /// All suites in report order.
    pub const ALL: [Suite; 15] = [
        Suite::Biinvariant,
        Suite::Psi,
        Suite::Cheeger,
        Suite::ZeroLocus,
        Suite::Lambda,
        Suite::Canonical,
        Suite::Base,
        Suite::Formula,
        Suite::Redistribution,
        Suite::Concentration,
        Suite::Conformal,
        Suite::MainLemma,
        Suite::HigherOrder,
        Suite::Invariance,
        Suite::Profile,
    ];

    /// The command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Biinvariant => "biinvariant",
            Suite::Psi => "psi",
            Suite::Cheeger => "cheeger",
            Suite::ZeroLocus => "zero-locus",
            Suite::Lambda => "lambda",
            Suite::Canonical => "canonical",
            Suite::Base => "base",
            Suite::Formula => "formula",
            Suite::Redistribution => "redistribution",
            Suite::Concentration => "concentration",
            Suite::Conformal => "conformal",
            Suite::MainLemma => "main-lemma",
            Suite::HigherOrder => "higher-order",
            Suite::Invariance => "invariance",
            Suite::Profile => "profile",
        }
    }

    /// Parses a command-line name.
    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|x| x.name() == s)
    }

    /// Whether the suite needs the asymptotic parameter regime.
    pub fn needs_regime(self) -> bool {
        matches!(
            self,
            Suite::Redistribution | Suite::Concentration | Suite::Conformal | Suite::MainLemma | Suite::HigherOrder
        )
    }
}

/// Parameters of a verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// The regime metric used by the asymptotic suites.
    pub regime: StageConfig,
    /// The fixed metric used by the exact identities.
    pub identity: StageConfig,
    /// Seed of every random stream.
    pub seed: u64,
    /// Constant `κ` multiplying every order-of-magnitude budget.
    pub o_budget_kappa: f64,
    /// Grid resolution in `t`.
    pub grid_t: usize,
    /// Grid resolution in `θ`.
    pub grid_theta: usize,
}

impl VerifyConfig {
    /// The regime at `s = 0.05`, the identity metric `(ν, l, s) = (0.5, 1, 0.2)`,
    /// seed 1, `κ = 10` and a 40 × 40 grid.
    pub fn defaults() -> Result<Self> {
        Ok(VerifyConfig {
            regime: StageConfig::positivity_regime(0.05)?,
            identity: StageConfig::formula_check(),
            seed: 1,
            o_budget_kappa: 10.0,
            grid_t: 40,
            grid_theta: 40,
        })
    }
}

/// `None` when `cfg` lies in the asymptotic regime `ν = c s^{6/7}`,
/// `l = c′ν^{1/3}` with `c, c′ ∈ [½, 2]`, `s ≤ 0.1` and a constructed
/// redistribution profile; otherwise the reason.
pub fn regime_violation(cfg: &StageConfig) -> Option<String> {
    if !(cfg.s > 0.0 && cfg.s <= 0.1) {
        return Some(format!("s = {} outside (0, 0.1]", cfg.s));
    }
    let c = cfg.nu / cfg.s.powf(6.0 / 7.0);
    if !(0.5..=2.0).contains(&c) {
        return Some(format!("nu / s^(6/7) = {c} outside [0.5, 2]"));
    }
    let c2 = cfg.l / cfg.nu.powf(1.0 / 3.0);
    if !(0.5..=2.0).contains(&c2) {
        return Some(format!("l / nu^(1/3) = {c2} outside [0.5, 2]"));
    }
    if !matches!(cfg.profile, RedistributionProfile::Piecewise(_)) {
        return Some("the redistribution profile is the identity".into());
    }
    None
}

fn stage_params(cfg: &StageConfig) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("nu".into(), cfg.nu);
    m.insert("l".into(), cfg.l);
    m.insert("s".into(), cfg.s);
    m.insert("C".into(), cfg.c);
    m.insert("kappa_iota".into(), cfg.kappa_iota);
    m.insert("t_min".into(), cfg.t_min);
    m.insert("fd_step".into(), cfg.fd_step);
    m
}

/// Runs one suite.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<CheckReport> {
    if suite.needs_regime() {
        if let Some(reason) = regime_violation(&cfg.regime) {
            return Ok(CheckReport::skipped(
                suite.name(),
                stage_params(&cfg.regime),
                format!("off-regime: {reason}"),
            ));
        }
    }
    match suite {
        Suite::Biinvariant => check_biinvariant(cfg),
        Suite::Psi => check_psi_suite(cfg),
        Suite::Cheeger => check_cheeger(cfg),
        Suite::ZeroLocus => check_zero_locus(cfg),
        Suite::Lambda => check_lambda(cfg),
        Suite::Canonical => check_canonical_variation(cfg),
        Suite::Base => check_base_curvature_lemmas(cfg),
        Suite::Formula => check_curv_formula_and_integral(cfg),
        Suite::Redistribution => check_redistribution(cfg),
        Suite::Concentration => check_concentration(cfg),
        Suite::Conformal => check_conformal(cfg),
        Suite::MainLemma => check_main_lemma(cfg, 4),
        Suite::HigherOrder => check_higher_order(cfg, 60),
        Suite::Invariance => check_invariance(cfg),
        Suite::Profile => check_profile(cfg),
    }
}

/// Runs several suites in the given order.
pub fn run_suites(suites: &[Suite], cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    suites.iter().map(|s| run_suite(*s, cfg)).collect()
}

fn identity_params(cfg: &VerifyConfig) -> BTreeMap<String, f64> {
    stage_params(&cfg.identity)
}

/// Standard-normal left-coordinate vector.
fn normal_vec(rng: &mut CellRng) -> Vec10 {
    Vec10::from_fn(|_, _| rng.normal())
}

/// `m exp(a X)`.
fn shift(m: &QMatrix2, x: &Vec10, a: f64) -> QMatrix2 {
    *m * lie::from_coords(&(x * a)).exp()
}

/// The zero plane over the meridian `θ = 0` with `α = i`, `γ̈₁ = j`.
fn meridian_zero_plane(t: f64, nu: f64) -> Result<ZeroPlaneSpec> {
    let branch = if t <= 0.0 || t >= FRAC_PI_4 { Some(0.0) } else { None };
    zero_locus::zero_plane_at(t, 0.0, Quaternion::I, Quaternion::J, nu, branch)
}

fn check_biinvariant(cfg: &VerifyConfig) -> Result<CheckReport> {
    let stage = cfg.identity.at_stage(Stage::Biinvariant);
    let (n_points, n_planes) = (20usize, 10usize);
    let rows: Vec<Result<Vec<(f64, f64, f64, f64)>>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = CellRng::new(cfg.seed, 1000 + i as u64, 0);
            let q = random_point(&mut rng, 0.02);
            let (t, th) = sp2::base_coords(&q);
            let tensor = curvature_tensor(&stage, &q)?;
            let mut out = Vec::with_capacity(n_planes);
            for _ in 0..n_planes {
                let x = normal_vec(&mut rng);
                let y = normal_vec(&mut rng);
                out.push((t, th, tensor.sectional(&x, &y)?, biinvariant_sectional(&x, &y)));
            }
            Ok(out)
        })
        .collect();
    let mut part = Track::rel("sectional vs bracket formula", 1e-5);
    for row in rows {
        for (t, th, num, exact) in row? {
            part.add(rel_err(num, exact, 1e-2), || {
                Location::new(t, th, format!("sec {num:e} vs {exact:e}"))
            });
        }
    }
    Ok(CheckReport::new(
        "biinvariant",
        identity_params(cfg),
        format!("{n_points} random points x {n_planes} random planes"),
        vec![part.finish()],
        vec![],
    ))
}

/// Sixth-order first and second derivatives of `f` at `x`: fourth-order
/// central stencils at `h` and `h/2` combined by Richardson extrapolation.
fn fd_first(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
    (16.0 * d(h / 2.0) - d(h)) / 15.0
}

fn fd_second(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d =
        |h: f64| (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
    (16.0 * d(h / 2.0) - d(h)) / 15.0
}

/// `ψ` computed from a metric: the length of the part of the Killing field
/// `(0, ϑ/2)` that is horizontal for the projection to `S⁴`.
pub fn psi_from_metric(gram: &Mat10, q: &Sp2Point) -> Result<f64> {
    let frame = sp2::frame_at(q)?;
    let k = lie::kvec(Quaternion::ZERO, frame.gamma1 * 0.5);
    let p = projector(gram, &vertical_basis(&q.m));
    let kh = k - p * k;
    Ok((kh.transpose() * gram * kh)[0].sqrt())
}

/// The quantity bounded in the derivative lemma,
/// `|ψ/(D_ζD_ζψ) · D_ζ(ψD_ζψ)|`, on the meridian `θ = 0`.
pub fn derivative_lemma_ratio(t: f64, params: &PsiParams) -> f64 {
    let v = psi::psi(t, 0.0, params);
    let (d1, d2) = psi::meridian_psi(t, params);
    (v.psi / d2 * (d1 * d1 + v.psi * d2)).abs()
}

fn check_psi_suite(cfg: &VerifyConfig) -> Result<CheckReport> {
    let pairs = [(0.5, 1.0), (0.2, 0.6), (cfg.regime.nu, cfg.regime.l)];
    let (nt, nth) = (cfg.grid_t, cfg.grid_theta);
    let h = 2e-3;
    let names = [
        "psi_t",
        "psi_theta",
        "psi_tt",
        "psi_t_theta",
        "psi_theta_theta",
        "psi_tt expanded",
    ];
    let mut parts: Vec<Track> = names
        .iter()
        .map(|n| Track::rel(&format!("{n} vs finite differences"), 1e-6))
        .collect();
    for &(nu, l) in &pairs {
        let p = PsiParams::new(nu, l)?;
        let f = |t: f64, th: f64| psi::psi(t, th, &p).psi;
        let mut vals: Vec<Vec<_>> = (0..6).map(|_| Vec::with_capacity(nt * nth)).collect();
        for i in 0..nt {
            let t = (i as f64 + 0.5) / nt as f64 * FRAC_PI_4;
            for j in 0..nth {
                let th = (j as f64 + 0.5) / nth as f64 * PI;
                let cf = psi::psi(t, th, &p);
                let fd = [
                    fd_first(&|x| f(x, th), t, h),
                    fd_first(&|y| f(t, y), th, h),
                    fd_second(&|x| f(x, th), t, h),
                    fd_first(&|y| fd_first(&|x| f(x, y), t, h), th, h),
                    fd_second(&|y| f(t, y), th, h),
                    fd_second(&|x| f(x, th), t, h),
                ];
                let closed = [
                    cf.psi_t,
                    cf.psi_theta,
                    cf.psi_tt,
                    cf.psi_t_theta,
                    cf.psi_theta_theta,
                    psi::psi_tt_expanded(t, th, &p),
                ];
                for k in 0..6 {
                    vals[k].push((t, th, fd[k], closed[k]));
                }
            }
        }
        for (k, part) in parts.iter_mut().enumerate() {
            let scale = vals[k].iter().fold(0.0f64, |m, v| m.max(v.3.abs()));
            for &(t, th, a, b) in &vals[k] {
                part.add(rel_err(a, b, 1e-2 * scale), || {
                    Location::new(t, th, format!("nu = {nu}, l = {l}"))
                });
            }
        }
    }
    let mut out: Vec<Part> = parts.into_iter().map(Track::finish).collect();

    let mut metric_part = Track::rel("psi vs metric horizontal part", 1e-10);
    let mut base_part = Track::rel("psi vs base-point formula", 1e-10);
    for &(nu, l) in &pairs {
        let p = PsiParams::new(nu, l)?;
        let stage = StageConfig {
            nu,
            l,
            profile: RedistributionProfile::Identity,
            ..cfg.identity.at_stage(Stage::CheegerL)
        };
        for i in 0..10 {
            let mut rng = CellRng::new(cfg.seed, 2000 + i, 0);
            let q = random_point(&mut rng, 0.01);
            let (t, th) = sp2::base_coords(&q);
            let closed = psi::psi(t, th, &p).psi;
            let from_metric = psi_from_metric(&gram_at(&stage, &q.m)?, &q)?;
            metric_part.add(rel_err(from_metric, closed, 1e-12), || {
                Location::new(t, th, format!("nu = {nu}, l = {l}"))
            });
            let from_base = crate::metric::psi_sq_at(&q.m, &p).sqrt();
            base_part.add(rel_err(from_base, closed, 1e-12), || {
                Location::new(t, th, format!("nu = {nu}, l = {l}"))
            });
        }
    }
    out.push(metric_part.finish());
    out.push(base_part.finish());

    let mut notes = Vec::new();
    for (label, (nu, l)) in [
        ("identity", (cfg.identity.nu, cfg.identity.l)),
        ("regime", (cfg.regime.nu, cfg.regime.l)),
    ] {
        let p = PsiParams::new(nu, l)?;
        let bound = p.nu_l().powi(2) / 4.0;
        let mut part = Track::upper(&format!("derivative lemma ({label})"), bound);
        let n = 4 * nt;
        for i in 1..n {
            let t = i as f64 / n as f64 * FRAC_PI_4;
            part.add(derivative_lemma_ratio(t, &p), || {
                Location::new(t, 0.0, format!("nu = {nu}, l = {l}"))
            });
        }
        let fin = part.finish();
        notes.push(format!(
            "derivative lemma ({label}): sup {:.6e} vs nu_l^2/4 = {bound:.6e}",
            fin.value
        ));
        out.push(fin);
    }

    if let RedistributionProfile::Piecewise(profile) = &cfg.regime.profile {
        let nu = cfg.regime.nu;
        let p = cfg.regime.psi_params();
        let kappa = cfg.o_budget_kappa;
        let stage = cfg.regime.at_stage(Stage::CheegerL);
        let mut part = Track::upper("redistribution effect on psi^2 / (nu^3 psi^2)", kappa);
        let support = profile.knots[4];
        for i in 0..12 {
            let t = (i as f64 + 0.5) / 12.0 * 1.5 * support;
            for j in 0..4 {
                let th = (j as f64 + 0.5) / 4.0 * PI;
                let mut rng = CellRng::new(cfg.seed, 3000 + (i * 4 + j) as u64, 0);
                let q = sp2::representative_point(t, th, rng.unit_imaginary(), rng.unit_quaternion())?;
                let re = psi_from_metric(&gram_at(&stage, &q.m)?, &q)?.powi(2);
                let old = psi::psi(t, th, &p).psi.powi(2);
                part.add((re - old).abs() / (nu.powi(3) * old), || {
                    Location::new(t, th, "redistributed metric")
                });
            }
        }
        out.push(part.finish());
    } else {
        notes.push("redistribution effect on psi not checked: identity profile".into());
    }

    Ok(CheckReport::new(
        "psi",
        identity_params(cfg),
        format!(
            "{nt} x {nth} (t, theta) grid for {} (nu, l) pairs; fd step {h}",
            pairs.len()
        ),
        out,
        notes,
    ))
}

/// `|X|²` of the vector `g_{ν,l}`-dual to the 1-form `G_ν x`.
fn dual_norm_sq(g: &Mat10, gn: &Mat10, x: &Vec10) -> Result<f64> {
    let w = gn * x;
    let sol = g
        .cholesky()
        .ok_or_else(|| Error::IllConditioned("metric not positive definite".into()))?
        .solve(&w);
    Ok((w.transpose() * sol)[0])
}

fn check_cheeger(cfg: &VerifyConfig) -> Result<CheckReport> {
    let pairs = [(0.5, 1.0), (0.3, 0.7), (cfg.regime.nu, cfg.regime.l)];
    let (nt, nth) = (cfg.grid_t.min(16), cfg.grid_theta.min(16));
    let mut x_part = Track::rel("|x^{2,0}|^2 vs 1 + sin^2(2 theta)/(2 l^2)", 1e-10);
    let mut e_part = Track::rel("|cos(2t) eta^{2,0}|^2 vs displayed norm", 1e-10);
    let mut mono = Track::upper("Cheeger deformation shrinks lengths", 1e-12);
    for (k, &(nu, l)) in pairs.iter().enumerate() {
        let p = PsiParams::new(nu, l)?;
        let stage = StageConfig {
            nu,
            l,
            profile: RedistributionProfile::Identity,
            ..cfg.identity.at_stage(Stage::CheegerL)
        };
        let gn = lie::nu_gram(nu);
        for i in 0..nt {
            let t = (i as f64 + 0.5) / nt as f64 * FRAC_PI_4;
            for j in 0..nth {
                let th = (j as f64 + 0.5) / nth as f64 * PI;
                let mut rng = CellRng::new(cfg.seed, 4000 + (k * 10000 + i * nth + j) as u64, 0);
                let q = sp2::representative_point(t, th, rng.unit_imaginary(), rng.unit_quaternion())?;
                let frame = sp2::frame_at(&q)?;
                let g = gram_at(&stage, &q.m)?;
                let x = frame.vectors[0].left_coords(&q);
                let eta = frame.vectors[2].left_coords(&q) * (2.0 * t).cos()
                    + frame.vectors[8].left_coords(&q) * ((2.0 * t).sin() / (nu * nu));
                let xn = dual_norm_sq(&g, &gn, &x)?;
                let en = dual_norm_sq(&g, &gn, &eta)?;
                let loc = || Location::new(t, th, format!("nu = {nu}, l = {l}"));
                x_part.add(rel_err(xn, psi::x_norm_sq(th, &p), 1e-12), loc);
                e_part.add(rel_err(en, psi::eta_norm_sq(t, th, &p), 1e-12), loc);
                let v = normal_vec(&mut rng);
                let after = (v.transpose() * g * v)[0];
                let before = (v.transpose() * gn * v)[0];
                mono.add((after - before) / before, loc);
            }
        }
    }

    let mut neutral = cfg.identity.clone();
    neutral.nu = std::f64::consts::FRAC_1_SQRT_2;
    neutral.l = f64::INFINITY;
    neutral.s = 0.0;
    neutral.c = 0.0;
    neutral.kappa_iota = 0.0;
    neutral.l_diag = f64::INFINITY;
    neutral.l_h1 = f64::INFINITY;
    neutral.profile = RedistributionProfile::Identity;
    let mut collapse = Track::abs("neutral parameters give (1/2)b", 1e-12);
    for i in 0..10 {
        let mut rng = CellRng::new(cfg.seed, 5000 + i, 0);
        let q = random_point(&mut rng, 0.01);
        let (t, th) = sp2::base_coords(&q);
        let g = gram_at(&neutral, &q.m)?;
        let d = (g - lie::biinvariant_gram()).abs().max();
        collapse.add(d, || Location::new(t, th, "all stages at neutral parameters"));
    }

    Ok(CheckReport::new(
        "cheeger",
        identity_params(cfg),
        format!("{nt} x {nth} (t, theta) grid for {} (nu, l) pairs", pairs.len()),
        vec![x_part.finish(), e_part.finish(), mono.finish(), collapse.finish()],
        vec!["x^{2,0} and eta^{2,0} are the g_{nu,l}-duals of the fixed forms G_nu x".into()],
    ))
}

fn check_zero_locus(cfg: &VerifyConfig) -> Result<CheckReport> {
    let stage = cfg.identity.at_stage(Stage::CheegerL);
    let n = 30usize;
    let planes_per_point = 60usize;
    let inside: Vec<Result<(f64, f64, f64, bool)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = CellRng::new(cfg.seed, 6000 + i as u64, 0);
            let (t, th) = loop {
                let t = 0.01 + (FRAC_PI_4 - 0.02) * rng.uniform();
                let th = PI * rng.uniform();
                if psi::zero_gauge(t, th) <= 1.0 {
                    break (t, th);
                }
            };
            let alpha = rng.unit_imaginary();
            let g1 = sp2::gamma1_for(alpha);
            let g2 = g1.conj() * alpha;
            let chi = 2.0 * PI * rng.uniform();
            let spec = zero_locus::zero_plane_at(t, th, alpha, g1 * chi.cos() + g2 * chi.sin(), stage.nu, None)?;
            let tensor = curvature_tensor(&stage, &spec.point)?;
            let plane = Plane {
                x: spec.zeta,
                y: spec.w,
            };
            let horizontal = spec.horizontality_residual <= 1e-7;
            let sec = if horizontal {
                sigma7_sectional(&tensor, &spec.point.m, &plane)?.0
            } else {
                tensor.sectional(&spec.zeta, &spec.w)?
            };
            Ok((t, th, sec, horizontal))
        })
        .collect();
    let mut flat = Track::abs("|sec| of constructed zero planes", 1e-7);
    let mut upstairs_only = 0;
    for r in inside {
        let (t, th, sec, horizontal) = r?;
        if !horizontal {
            upstairs_only += 1;
        }
        flat.add(sec.abs(), || {
            Location::new(t, th, format!("L = {:.6}", psi::zero_gauge(t, th)))
        });
    }
    let outside: Vec<Result<(f64, f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = CellRng::new(cfg.seed, 7000 + i as u64, 0);
            let (t, th) = loop {
                let t = 0.01 + (FRAC_PI_4 - 0.02) * rng.uniform();
                let th = PI * rng.uniform();
                if psi::zero_gauge(t, th) > 1.0 && (2.0 * th).cos().abs() > 0.05 {
                    break (t, th);
                }
            };
            let q = sp2::representative_point(t, th, rng.unit_imaginary(), rng.unit_quaternion())?;
            let tensor = curvature_tensor(&stage, &q)?;
            let mut best = f64::INFINITY;
            for _ in 0..planes_per_point {
                let plane = Plane {
                    x: normal_vec(&mut rng),
                    y: normal_vec(&mut rng),
                };
                best = best.min(sigma7_sectional(&tensor, &q.m, &plane)?.0);
            }
            Ok((t, th, best))
        })
        .collect();
    let mut positive = Track::lower("min sec over sampled planes where L > 1", 0.0);
    for r in outside {
        let (t, th, sec) = r?;
        positive.add(sec, || {
            Location::new(t, th, format!("L = {:.6}", psi::zero_gauge(t, th)))
        });
    }
    let positive = positive.finish();
    let notes = vec![
        format!("positive margin off the zero locus: {:.6e}", positive.value),
        format!("{upstairs_only} zero planes checked upstairs only (horizontality residual above 1e-7)"),
    ];
    Ok(CheckReport::new(
        "zero-locus",
        identity_params(cfg),
        format!("{n} points with L <= 1 and {n} points with L > 1 ({planes_per_point} planes each)"),
        vec![flat.finish(), positive],
        notes,
    ))
}

fn check_lambda(_cfg: &VerifyConfig) -> Result<CheckReport> {
    let mut closed = Track::abs("closed form vs circle-ellipse root", 1e-12);
    let mut formula = Track::abs("cos^2 lambda = (1 - L^2)/(4 - L^2)", 1e-14);
    let n = 1000;
    for i in 0..=n {
        let l = i as f64 / n as f64;
        let (c, s) = zero_locus::lambda_from_l(l)?;
        let (c2, s2) = zero_locus::lambda_by_root_finding(l)?;
        closed.add((c - c2).abs().max((s - s2).abs()), || {
            Location::new(f64::NAN, f64::NAN, format!("L = {l}"))
        });
        formula.add(
            (c * c - (1.0 - l * l) / (4.0 - l * l))
                .abs()
                .max((c * c + s * s - 1.0).abs()),
            || Location::new(f64::NAN, f64::NAN, format!("L = {l}")),
        );
    }
    let mut ends = Track::abs("endpoints (1/2, sqrt3/2) and (0, 1)", 1e-15);
    let (c0, s0) = zero_locus::lambda_from_l(0.0)?;
    ends.add((c0 - 0.5).abs().max((s0 - 3f64.sqrt() / 2.0).abs()), || {
        Location::new(f64::NAN, f64::NAN, "L = 0")
    });
    let (c1, s1) = zero_locus::lambda_from_l(1.0)?;
    ends.add(c1.abs().max((s1 - 1.0).abs()), || {
        Location::new(f64::NAN, f64::NAN, "L = 1")
    });
    let mut params = BTreeMap::new();
    params.insert("samples".into(), (n + 1) as f64);
    Ok(CheckReport::new(
        "lambda",
        params,
        format!("{} equally spaced L in [0, 1]", n + 1),
        vec![closed.finish(), formula.finish(), ends.finish()],
        vec![],
    ))
}

/// Residuals of the two canonical-variation identities for horizontal `x`
/// and arbitrary `w`, relative to the size of the terms.
fn canonical_residuals(
    t: &CurvatureTensor,
    ts: &CurvatureTensor,
    m: &QMatrix2,
    s: f64,
    x: &Vec10,
    w: &Vec10,
) -> Result<(f64, f64)> {
    let sub = BaseSubmersion::new(t, m)?;
    let s2 = s * s;
    let norm = |v: &Vec10| t.inner(v, v).sqrt();
    let wv = sub.vertical(w);
    let wh = w - wv;
    let lhs = ts.riemann_vector(w, x, x);
    let r = t.riemann_vector(w, x, x);
    let terms = [
        r * (1.0 - s2),
        sub.vertical(&r) * s2,
        sub.base_riemann_vector(&wh, x, x) * s2,
        sub.a_horizontal(x, &sub.a_vertical(x, &wv)) * s2,
    ];
    let rhs = terms.iter().fold(Vec10::zeros(), |a, b| a + b);
    let scale = terms.iter().map(norm).fold(norm(&lhs), f64::max);
    let first = norm(&(lhs - rhs)) / scale.max(1e-300);

    let lhs2 = sub.horizontal(&ts.riemann_vector(x, w, w));
    let r2 = t.riemann_vector(x, w, w);
    let terms2 = [
        sub.horizontal(&r2) * (1.0 - s2),
        sub.a_vertical(&sub.a_vertical(x, &wv), &wv) * ((1.0 - s2) * s2),
        sub.base_riemann_vector(x, &wh, &wh) * s2,
    ];
    let rhs2 = terms2.iter().fold(Vec10::zeros(), |a, b| a + b);
    let scale2 = terms2.iter().map(norm).fold(norm(&lhs2), f64::max);
    Ok((first, norm(&(lhs2 - rhs2)) / scale2.max(1e-300)))
}

fn check_canonical_variation(cfg: &VerifyConfig) -> Result<CheckReport> {
    let g = cfg.identity.at_stage(Stage::CheegerL);
    let gs = cfg.identity.at_stage(Stage::FiberScaled);
    let s = cfg.identity.s;
    let n = 8usize;
    let rows: Vec<Result<Vec<(f64, f64, f64, f64, &'static str)>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = CellRng::new(cfg.seed, 8000 + i as u64, 0);
            let q = random_point(&mut rng, 0.05);
            let (t, th) = sp2::base_coords(&q);
            let tensor = curvature_tensor(&g, &q)?;
            let tensor_s = curvature_tensor(&gs, &q)?;
            let sub = BaseSubmersion::new(&tensor, &q.m)?;
            let mut out = Vec::new();
            for _ in 0..3 {
                let x = sub.horizontal(&normal_vec(&mut rng));
                let w = normal_vec(&mut rng);
                let (a, b) = canonical_residuals(&tensor, &tensor_s, &q.m, s, &x, &w)?;
                out.push((t, th, a, b, "random horizontal X, random W"));
            }
            Ok(out)
        })
        .collect();
    let meridian: Vec<Result<(f64, f64, f64, f64, &'static str)>> = [0.1, 0.3, 0.5, 0.7]
        .par_iter()
        .map(|&t| {
            let spec = meridian_zero_plane(t, g.nu)?;
            let tensor = curvature_tensor(&g, &spec.point)?;
            let tensor_s = curvature_tensor(&gs, &spec.point)?;
            let (a, b) = canonical_residuals(&tensor, &tensor_s, &spec.point.m, s, &spec.zeta, &spec.w)?;
            let r = tensor.riemann_vector(&spec.w, &spec.zeta, &spec.zeta);
            let r2 = tensor.riemann_vector(&spec.zeta, &spec.w, &spec.w);
            let scale = tensor.inner(&spec.w, &spec.w) * tensor.inner(&spec.zeta, &spec.zeta).sqrt();
            let flat = tensor.inner(&r, &r).sqrt().max(tensor.inner(&r2, &r2).sqrt()) / scale;
            Ok((t, a, b, flat, "zero plane on the meridian"))
        })
        .collect();
    let mut first = Track::rel("R^s(W,X)X decomposition", 1e-4);
    let mut second = Track::rel("(R^s(X,W)W)^H decomposition", 1e-4);
    for row in rows {
        for (t, th, a, b, what) in row? {
            first.add(a, || Location::new(t, th, what));
            second.add(b, || Location::new(t, th, what));
        }
    }
    let mut flat = Track::abs("first curvature terms vanish on the flat torus", 1e-7);
    for r in meridian {
        let (t, a, b, f, what) = r?;
        first.add(a, || Location::new(t, 0.0, what));
        second.add(b, || Location::new(t, 0.0, what));
        flat.add(f, || Location::new(t, 0.0, what));
    }
    Ok(CheckReport::new(
        "canonical",
        identity_params(cfg),
        format!("{n} random points x 3 pairs and 4 meridian zero planes"),
        vec![first.finish(), second.finish(), flat.finish()],
        vec![],
    ))
}

fn check_base_curvature_lemmas(cfg: &VerifyConfig) -> Result<CheckReport> {
    let g = cfg.identity.at_stage(Stage::CheegerL);
    let p = g.psi_params();
    let n = 12usize;
    let ts: Vec<f64> = (0..n)
        .map(|i| 0.02 + (FRAC_PI_4 - 0.025) * i as f64 / (n - 1) as f64)
        .collect();
    let rows: Vec<Result<(f64, f64, f64, f64, f64)>> = ts
        .par_iter()
        .map(|&t| {
            let spec = meridian_zero_plane(t, g.nu)?;
            let tensor = curvature_tensor(&g, &spec.point)?;
            let sub = BaseSubmersion::new(&tensor, &spec.point.m)?;
            let z = spec.zeta;
            let hw = sub.horizontal(&spec.w);
            let v = spec.w - hw;
            let wh = spec.w_h(g.nu);
            let ps = psi::psi(t, 0.0, &p).psi;
            let (d1, d2) = psi::meridian_psi(t, &p);
            let norm = |x: &Vec10| tensor.inner(x, x).sqrt();
            let rb = sub.base_riemann_vector(&hw, &z, &z);
            let rb_pred = hw * (-d2 / ps);
            let a = sub.a_vertical(&z, &v);
            let a_pred = hw * (-d1 / ps);
            let cb = sub.base_riemann(&z, &hw, &hw, &z);
            let cb_pred = -wh * ps * wh * d2;
            let hw_err = rel_err(norm(&hw), wh * ps, 1e-12);
            Ok((
                t,
                norm(&(rb - rb_pred)) / norm(&rb_pred).max(norm(&rb)).max(1e-12),
                norm(&(a - a_pred)) / norm(&a_pred).max(norm(&a)).max(1e-3 * norm(&hw)),
                rel_err(cb, cb_pred, 1e-12),
                hw_err,
            ))
        })
        .collect();
    let mut rb = Track::rel("R^B(H_w, X)X = -(D_X D_X |H_w| / |H_w|) H_w", 1e-4);
    let mut a = Track::rel("A_X V = -(D_X |H_w| / |H_w|) H_w", 1e-4);
    let mut cb = Track::rel("curv_B(X, H_w) = -|H_w| D_X D_X |H_w|", 1e-4);
    let mut hw = Track::rel("|H_w| = w_h psi", 1e-8);
    for r in rows {
        let (t, x1, x2, x3, x4) = r?;
        let loc = || Location::new(t, 0.0, "meridian zero plane");
        rb.add(x1, loc);
        a.add(x2, loc);
        cb.add(x3, loc);
        hw.add(x4, loc);
    }
    let li = lie::LeftInvariant::new(lie::biinvariant_gram());
    let mut homogeneous = Track::abs("O'Neill formula: Sp(2)/Sp(1)xSp(1) has sec 4", 1e-12);
    let mut notes = Vec::new();
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..20 {
        let mut rng = CellRng::new(cfg.seed, 9000 + i, 0);
        let x = Vec10::from_fn(|k, _| if k >= K_DIM { rng.normal() } else { 0.0 });
        let y = Vec10::from_fn(|k, _| if k >= K_DIM { rng.normal() } else { 0.0 });
        let mut a2 = Vec10::zeros();
        for k in 0..K_DIM {
            let mut e = Vec10::zeros();
            e[k] = 1.0;
            a2[k] = -li.inner(&li.nabla(&x, &e), &y) / li.inner(&e, &e);
        }
        let area = li.inner(&x, &x) * li.inner(&y, &y) - li.inner(&x, &y).powi(2);
        let sec = (li.curv(&x, &y) + 3.0 * li.inner(&a2, &a2)) / area;
        homogeneous.add((sec - 4.0).abs(), || {
            Location::new(f64::NAN, f64::NAN, "left-invariant sample")
        });
        if i < 4 {
            let q = random_point(&mut rng, 0.05);
            let tensor = curvature_tensor(&cfg.identity.at_stage(Stage::Biinvariant), &q)?;
            let sub = BaseSubmersion::new(&tensor, &q.m)?;
            let hb = sub.horizontal_basis();
            for (j, k) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
                let sec = sub.base_sectional(&hb[j], &hb[k]);
                range = (range.0.min(sec), range.1.max(sec));
            }
        }
    }
    notes.push(format!(
        "base of the Gromoll-Meyer projection under (1/2)b: sampled sec in [{:.6}, {:.6}]; the metric is not round",
        range.0, range.1
    ));
    Ok(CheckReport::new(
        "base",
        identity_params(cfg),
        format!("{n} meridian points t in [0.02, pi/4 - 0.005]"),
        vec![rb.finish(), a.finish(), cb.finish(), hw.finish(), homogeneous.finish()],
        notes,
    ))
}

/// Composite Simpson rule on equally spaced samples (even interval count).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "Simpson needs an even number of intervals"
    );
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// The closed form of `curv_{g_s}(ζ, W)` on the meridian.
pub fn meridian_curv_closed_form(t: f64, s: f64, nu: f64, params: &PsiParams) -> f64 {
    let wh = psi::w_h(3f64.sqrt() / 2.0, nu);
    let v = psi::psi(t, 0.0, params);
    let (d1, d2) = psi::meridian_psi(t, params);
    -s * s * wh * wh * (d1 * d1 + v.psi * d2) + s.powi(4) * wh * wh * d1 * d1
}

fn meridian_curvatures(stage: &StageConfig, ts: &[f64]) -> Result<Vec<f64>> {
    ts.par_iter()
        .map(|&t| {
            let spec = meridian_zero_plane(t, stage.nu)?;
            let tensor = curvature_tensor(stage, &spec.point)?;
            Ok(tensor.curv(&spec.zeta, &spec.w))
        })
        .collect()
}

fn check_curv_formula_and_integral(cfg: &VerifyConfig) -> Result<CheckReport> {
    let base = cfg.identity.at_stage(Stage::FiberScaled);
    let s = base.s;
    let p = base.psi_params();
    let n = 64usize;
    let h = FRAC_PI_4 / n as f64;
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let num = meridian_curvatures(&base, &ts)?;
    let closed: Vec<f64> = ts
        .iter()
        .map(|&t| meridian_curv_closed_form(t, s, base.nu, &p))
        .collect();
    let scale = closed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut pointwise = Track::rel("pointwise curv_s(zeta, W) vs closed form", 1e-4);
    for ((t, a), b) in ts.iter().zip(&num).zip(&closed) {
        pointwise.add(rel_err(*a, *b, 1e-3 * scale), || {
            Location::new(*t, 0.0, "meridian zero plane")
        });
    }

    let wh = psi::w_h(3f64.sqrt() / 2.0, base.nu);
    let fine = 4096usize;
    let hf = FRAC_PI_4 / fine as f64;
    let dpsi_sq: Vec<f64> = (0..=fine)
        .map(|i| (wh * psi::meridian_psi(i as f64 * hf, &p).0).powi(2))
        .collect();
    let rhs = s.powi(4) * simpson(&dpsi_sq, hf);
    let total = simpson(&num, h);
    let coarse: Vec<f64> = num.iter().step_by(2).copied().collect();
    let total_coarse = simpson(&coarse, 2.0 * h);
    let first_abs: Vec<f64> = (0..=fine)
        .map(|i| {
            let t = i as f64 * hf;
            let v = psi::psi(t, 0.0, &p);
            let (d1, d2) = psi::meridian_psi(t, &p);
            (s * s * wh * wh * (d1 * d1 + v.psi * d2)).abs()
        })
        .collect();
    let first_scale = simpson(&first_abs, hf);

    let mut integral = Track::rel("integral of curv_s vs s^4 integral of (D(w_h psi))^2", 1e-2);
    integral.add(rel_err(total, rhs, 1e-300), || {
        Location::new(f64::NAN, 0.0, format!("{total:e} vs {rhs:e}"))
    });
    let mut positive = Track::lower("both integrals positive", 0.0);
    positive.add(total, || Location::new(f64::NAN, 0.0, "numeric integral"));
    positive.add(rhs, || Location::new(f64::NAN, 0.0, "closed-form integral"));
    let mut refine = Track::rel("Simpson refinement change", 5e-3);
    refine.add(rel_err(total_coarse, total, 1e-300), || {
        Location::new(f64::NAN, 0.0, format!("n = {} vs {n}", n / 2))
    });
    let mut first = Track::upper("first term integrates to zero (relative to its L1 norm)", 1e-3);
    first.add((total - rhs).abs() / first_scale, || {
        Location::new(f64::NAN, 0.0, "numeric first-term integral")
    });

    let base2 = StageConfig {
        s: 2.0 * s,
        ..base.clone()
    };
    let num2 = meridian_curvatures(&base2, &ts)?;
    let ratio = simpson(&num2, h) / total;
    let mut scaling = Track::abs("integral ratio s -> 2s equals 16 (fraction)", 0.02);
    scaling.add((ratio / 16.0 - 1.0).abs(), || {
        Location::new(f64::NAN, 0.0, format!("ratio {ratio:.8}"))
    });

    let notes = vec![format!(
        "integral {total:.12e}, closed form {rhs:.12e}, ratio at 2s {ratio:.8}"
    )];
    Ok(CheckReport::new(
        "formula",
        identity_params(cfg),
        format!("theta = 0 meridian, {} Simpson nodes on [0, pi/4]", n + 1),
        vec![
            pointwise.finish(),
            integral.finish(),
            positive.finish(),
            refine.finish(),
            first.finish(),
            scaling.finish(),
        ],
        notes,
    ))
}

/// Sample positions for the redistribution checks: the midpoints of the
/// profile pieces, a point close to the pole and one beyond the support.
fn redistribution_samples(profile: &crate::metric::PiecewiseProfile) -> Vec<f64> {
    let k = &profile.knots;
    let mut ts = vec![0.3 * k[1], 0.7 * k[1]];
    for w in k.windows(2).skip(1) {
        ts.push(0.5 * (w[0] + w[1]));
    }
    ts.push(1.5 * k[4]);
    ts
}

fn check_redistribution(cfg: &VerifyConfig) -> Result<CheckReport> {
    let RedistributionProfile::Piecewise(profile) = &cfg.regime.profile else {
        return Err(Error::Domain("redistribution suite needs a constructed profile".into()));
    };
    let old = cfg.regime.at_stage(Stage::Nu);
    let new = cfg.regime.at_stage(Stage::Redistributed);
    let ts = redistribution_samples(profile);
    let rows: Vec<Result<Vec<(f64, &'static str, f64)>>> = ts
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let spec = meridian_zero_plane(t, cfg.regime.nu)?;
            let m = spec.point.m;
            let h = new.fd_step_at(&m);
            let co = curvature_tensor_with(&old, &m, h)?;
            let cn = curvature_tensor_with(&new, &m, h)?;
            let r = sp2::base_distance(&m);
            let (phi, _, phi2) = cfg.regime.profile.eval(r);
            let z = spec.zeta / cn.inner(&spec.zeta, &spec.zeta).sqrt();
            let w = spec.w / cn.inner(&spec.w, &spec.w).sqrt();
            let norm = |x: &Vec10| cn.inner(x, x).sqrt();
            let mut out = vec![
                (t, "R(zeta,W)W", norm(&cn.riemann_vector(&z, &w, &w))),
                (t, "R(W,zeta)zeta", norm(&cn.riemann_vector(&w, &z, &z))),
            ];
            let pp = z_perp_projector(&m, cfg.regime.nu)?;
            let (z_basis, _) = sp2::z_split(&m, cfg.regime.nu)?;
            let mut rng = CellRng::new(cfg.seed, 10_000 + i as u64, 0);
            for _ in 0..3 {
                let k = Vec10::from_fn(|j, _| if j < K_DIM { rng.normal() } else { 0.0 });
                let pv = pp * k;
                let p_new = cn.inner(&pv, &pv);
                let p_old = co.inner(&pv, &pv);
                let lhs = cn.riemann(&pv, &z, &z, &pv);
                let pred = phi * phi * co.riemann(&pv, &z, &z, &pv) - phi2 / phi * p_new;
                let scale = (phi2 / phi * p_new).abs().max(1e-12 * p_new);
                out.push((t, "warped", (lhs - pred).abs() / scale));
                let diff = cn.curv(&z, &pv) - co.curv(&z, &pv);
                let expected = phi * phi2 * p_old;
                out.push((
                    t,
                    "difference",
                    (diff - expected).abs() / expected.abs().max(1e-12 * p_old),
                ));
                out.push((t, "diff/|P|^2", diff / p_old));
                let zr = Vec10::from_fn(|j, _| if j >= K_DIM { rng.normal() } else { 0.0 });
                let zr = zr - z * cn.inner(&z, &zr);
                let zr = zr / norm(&zr);
                let coeff = nalgebra::DVector::from_fn(3, |_, _| rng.normal());
                let wz_k = &z_basis * coeff;
                let wz = Vec10::from_fn(|j, _| if j < K_DIM { wz_k[j] } else { 0.0 });
                let wz = wz / norm(&wz);
                let a = cn.riemann_vector(&zr, &wz, &wz);
                let b = co.riemann_vector(&zr, &wz, &wz);
                out.push((t, "R(z,W)W", norm(&(a - b))));
            }
            Ok(out)
        })
        .collect();
    let mut rv = Track::abs("R^re(zeta,W)W and R^re(W,zeta)zeta vanish", 1e-7);
    let mut warped = Track::rel(
        "<R^re(P,zeta)zeta,P> = phi^2 <R^nu(P,zeta)zeta,P> - (phi''/phi)|P|^2",
        1e-3,
    );
    let mut difference = Track::rel("curv^new - curv^old = phi phi'' |P|^2", 1e-3);
    let mut same = Track::abs("R^re(z,W)W = R^nu(z,W)W for z in H perp zeta, W in Z", 1e-5);
    let mut near = Track::upper("curv^new - curv^old negative near 0", 0.0);
    let mut mid = Track::lower("curv^new - curv^old positive on the mid interval", 0.0);
    let mut notes = Vec::new();
    let k1 = profile.knots[1];
    let end = profile.knots[4];
    for row in rows {
        for (t, what, v) in row? {
            let loc = || Location::new(t, 0.0, what);
            match what {
                "R(zeta,W)W" | "R(W,zeta)zeta" => rv.add(v, loc),
                "warped" => warped.add(v, loc),
                "difference" => difference.add(v, loc),
                "R(z,W)W" => same.add(v, loc),
                "diff/|P|^2" => {
                    if t < k1 {
                        near.add(v, loc);
                    } else if t < end {
                        mid.add(v, loc);
                    }
                    notes.push(format!("t = {t:.6}: (curv^new - curv^old)/|P|^2 = {v:.6e}"));
                }
                _ => {}
            }
        }
    }
    notes.dedup();
    Ok(CheckReport::new(
        "redistribution",
        stage_params(&cfg.regime),
        format!(
            "{} meridian zero planes across the profile pieces, 3 vectors P in Z-perp each",
            ts.len()
        ),
        vec![
            rv.finish(),
            warped.finish(),
            same.finish(),
            difference.finish(),
            near.finish(),
            mid.finish(),
        ],
        notes,
    ))
}

fn check_concentration(cfg: &VerifyConfig) -> Result<CheckReport> {
    let c = &cfg.regime;
    let p = c.psi_params();
    let (s, nu) = (c.s, c.nu);
    let wh = psi::w_h(3f64.sqrt() / 2.0, nu);
    let n = 4000usize;
    let h = FRAC_PI_4 / n as f64;
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let curv: Vec<f64> = ts.iter().map(|&t| meridian_curv_closed_form(t, s, nu, &p)).collect();
    let total_term: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let v = psi::psi(t, 0.0, &p);
            let (d1, d2) = psi::meridian_psi(t, &p);
            -s * s * wh * wh * (d1 * d1 + v.psi * d2)
        })
        .collect();
    let mut a = Track::lower("-s^2 w_h^2 D(psi D psi) > 0 for t > nu/2", 0.0);
    for (t, v) in ts.iter().zip(&total_term) {
        if *t > nu / 2.0 && *t < FRAC_PI_4 - 1e-9 {
            a.add(*v / (s * s * wh * wh), || Location::new(*t, 0.0, "closed form"));
        }
    }
    let integral = simpson(&curv, h);
    let mut tc = FRAC_PI_4;
    for i in (0..=n).rev() {
        if curv[i] > integral {
            break;
        }
        tc = ts[i];
    }
    let mut tail = Track::upper("tail start t_c where curv_s <= integral on [t_c, pi/4]", FRAC_PI_4);
    tail.add(tc, || Location::new(tc, 0.0, format!("integral {integral:e}")));
    let (imin, _) = curv
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
    let mut loc_min = Track::upper("location of the minimum of curv_s relative to nu", 1.0);
    loc_min.add(ts[imin] / nu, || {
        Location::new(ts[imin], 0.0, format!("min {:e}", curv[imin]))
    });
    let flip = (1..=n)
        .find(|&i| total_term[i - 1] < 0.0 && total_term[i] >= 0.0)
        .map(|i| ts[i]);
    let mut flip_part = Track::upper("sign flip of D(psi D psi) relative to nu", 1.0);
    match flip {
        Some(tf) => flip_part.add(tf / nu, || Location::new(tf, 0.0, "sign flip")),
        None => flip_part.add(f64::NAN, || Location::new(f64::NAN, 0.0, "no sign flip")),
    }
    let mut beyond = Track::lower("curv_s > 0 for t > nu/sqrt8", 0.0);
    for (t, v) in ts.iter().zip(&curv) {
        if *t > nu / 8f64.sqrt() {
            beyond.add(*v, || Location::new(*t, 0.0, "closed form"));
        }
    }
    let negative_beyond = ts.iter().zip(&curv).filter(|(t, v)| **t > nu && **v < 0.0).count();
    let mut neg = Track::upper("samples with curv_s < 0 beyond t = nu", 0.0);
    neg.add(negative_beyond as f64, || Location::new(f64::NAN, 0.0, "count"));
    let notes = vec![
        format!("integral of curv_s along the meridian: {integral:.10e}"),
        format!(
            "t_c = {tc:.6} (nu = {nu:.6}, nu/sqrt8 = {:.6}), sign flip of D(psi D psi) at {:?}",
            nu / 8f64.sqrt(),
            flip
        ),
        "curv_s is evaluated from the closed form checked pointwise by the formula suite".into(),
    ];
    Ok(CheckReport::new(
        "concentration",
        stage_params(c),
        format!("{} points on the theta = 0 meridian", n + 1),
        vec![
            a.finish(),
            tail.finish(),
            loc_min.finish(),
            flip_part.finish(),
            beyond.finish(),
            neg.finish(),
        ],
        notes,
    ))
}

/// `Hess_f(X, Y)` of the conformal exponent for the metric whose
/// Christoffel symbols are carried by `tensor`, with `X, Y` extended with
/// constant left coordinates.
pub fn conformal_hessian(
    cfg: &StageConfig,
    tensor: &CurvatureTensor,
    m: &QMatrix2,
    x: &Vec10,
    y: &Vec10,
    h: f64,
) -> f64 {
    let df = |a: f64| conformal_exponent_differential(&shift(m, x, a), cfg).dot(y);
    let d = |h: f64| (-df(2.0 * h) + 8.0 * df(h) - 8.0 * df(-h) + df(-2.0 * h)) / (12.0 * h);
    let second = (16.0 * d(h / 2.0) - d(h)) / 15.0;
    second - conformal_exponent_differential(m, cfg).dot(&tensor.nabla_const(x, y))
}

fn check_conformal(cfg: &VerifyConfig) -> Result<CheckReport> {
    let c = &cfg.regime;
    let (s, nu) = (c.s, c.nu);
    let p = c.psi_params();
    let kappa = cfg.o_budget_kappa;
    let old = c.at_stage(Stage::FiberScaled);
    let new = c.at_stage(Stage::Conformal);
    let start = meridian_zero_plane(c.t_min, nu)?;
    let n_steps = 40usize;
    let path = zero_locus::meridian_flow(&start.point, &p, FRAC_PI_4 - c.t_min - 1e-3, n_steps)?;
    let bump = c.bump();
    let rows: Vec<Result<(f64, f64, f64, f64, f64, f64, f64)>> = path
        .samples
        .par_iter()
        .map(|sample| {
            let t = sample.t.max(c.t_min);
            let spec = meridian_zero_plane(t, nu)?;
            let m = spec.point.m;
            let tn = curvature_tensor(&new, &spec.point)?;
            let to = curvature_tensor_with(&old, &m, new.fd_step_at(&m))?;
            let f = conformal_exponent(&m, c);
            let lhs = (-2.0 * f).exp() * tn.curv(&spec.zeta, &spec.w);
            let v = psi::psi(t, 0.0, &p);
            let (d1, d2) = psi::meridian_psi(t, &p);
            let wh = spec.w_h(nu);
            let r = sp2::base_distance(&m);
            let (_, _, i2) = bump.eval(r);
            let main = s.powi(4) * wh * wh * d1 * d1 + s.powi(4) * wh * wh / (nu * nu) * v.psi.powi(2) * d1 * d1;
            let iota = -nu * nu * wh * wh * i2;
            let budget = kappa * s.powi(4) * wh * wh * nu;
            let hess = conformal_hessian(c, &to, &m, &spec.zeta, &spec.zeta, (t / 8.0).min(1e-3));
            let hess_pred = -c.psi_weight * s * s / (nu * nu) * (d1 * d1 + v.psi * d2) + i2;
            let hess_scale = (s * s / (nu * nu) * (d1 * d1 + v.psi * d2.abs())).max(i2.abs());
            let d = sp2::delta_alpha(&m);
            let d = d / to.inner(&d, &d).sqrt();
            let wg = spec.w - d * to.inner(&d, &spec.w);
            let wg_ratio = to.inner(&wg, &wg) / (nu * nu * wh * wh);
            Ok((
                t,
                lhs,
                main + iota,
                budget,
                (hess - hess_pred).abs() / hess_scale.max(1e-300),
                wg_ratio,
                hess,
            ))
        })
        .collect();
    let mut hess = Track::rel("Hess_f(zeta,zeta) vs closed form", 1e-3);
    let mut budget = Track::upper("|e^{-2f} curv^new - (main + iota)| / budget", 1.0);
    let mut positive = Track::lower("e^{-2f} curv^new(zeta, W) > 0 along the flow", 0.0);
    let mut wg_min = f64::INFINITY;
    let mut wg_max = f64::NEG_INFINITY;
    for r in rows {
        let (t, lhs, pred, b, herr, wg, _) = r?;
        let loc = || Location::new(t, 0.0, "flow sample");
        hess.add(herr, loc);
        budget.add((lhs - pred).abs() / b, || {
            Location::new(t, 0.0, format!("lhs {lhs:e}, closed form {pred:e}"))
        });
        positive.add(lhs, loc);
        wg_min = wg_min.min(wg);
        wg_max = wg_max.max(wg);
    }

    let mut identity = Track::upper("partial conformal change identity / O-budget", 1.0);
    let c0 = StageConfig { c: 0.0, ..c.clone() };
    let new0 = c0.at_stage(Stage::Conformal);
    for (i, &t) in [0.01, 0.05, 0.2].iter().enumerate() {
        let mut rng = CellRng::new(cfg.seed, 11_000 + i as u64, 0);
        let q = sp2::representative_point(t, 0.4, rng.unit_imaginary(), rng.unit_quaternion())?;
        let h = new0.fd_step_at(&q.m);
        let to = curvature_tensor_with(&old, &q.m, h)?;
        let tn = curvature_tensor_with(&new0, &q.m, h)?;
        let f = conformal_exponent(&q.m, &c0);
        let df = conformal_exponent_differential(&q.m, &c0);
        let grad = to
            .gram
            .cholesky()
            .ok_or_else(|| Error::IllConditioned("g_s".into()))?
            .solve(&df);
        let grad_sq = df.dot(&grad);
        let d = sp2::delta_alpha(&q.m);
        let d = d / to.inner(&d, &d).sqrt();
        let perp = |v: Vec10| {
            let v = v - d * to.inner(&d, &v);
            v / to.inner(&v, &v).sqrt()
        };
        let hh = (t / 8.0).min(1e-3);
        for _ in 0..4 {
            let [x, y, z, u] = [0; 4].map(|_| perp(normal_vec(&mut rng)));
            let g = |a: &Vec10, b: &Vec10| to.inner(a, b);
            let hs = |a: &Vec10, b: &Vec10| {
                0.5 * (conformal_hessian(&c0, &to, &q.m, a, b, hh) + conformal_hessian(&c0, &to, &q.m, b, a, hh))
            };
            let dfv = |a: &Vec10| df.dot(a);
            let rhs = to.riemann(&x, &y, &z, &u) - g(&x, &u) * hs(&y, &z) - g(&y, &z) * hs(&x, &u)
                + g(&x, &z) * hs(&y, &u)
                + g(&y, &u) * hs(&x, &z)
                + g(&x, &u) * dfv(&y) * dfv(&z)
                + g(&y, &z) * dfv(&x) * dfv(&u)
                - g(&y, &u) * dfv(&x) * dfv(&z)
                - g(&x, &z) * dfv(&y) * dfv(&u)
                - g(&y, &z) * g(&x, &u) * grad_sq
                + g(&x, &z) * g(&y, &u) * grad_sq;
            let lhs = (-2.0 * f).exp() * tn.riemann(&x, &y, &z, &u);
            let size = ((2.0 * f).exp() - 1.0).abs().max(grad_sq.sqrt());
            let allowed = kappa * size * to.riemann(&x, &y, &z, &u).abs().max(1.0);
            identity.add((lhs - rhs).abs() / allowed, || {
                Location::new(t, 0.4, "random 4-tuple orthogonal to Delta(alpha)")
            });
        }
    }

    let notes = vec![
        format!("|W^gamma|^2 / (nu^2 w_h^2) along the flow: [{wg_min:.6}, {wg_max:.6}]"),
        format!(
            "C = {}, psi weight m = {}, kappa_iota = {}, bump radius = {}",
            c.c, c.psi_weight, c.kappa_iota, c.bump_radius
        ),
        "the 4-tuple identity is evaluated with C = 0".into(),
    ];
    Ok(CheckReport::new(
        "conformal",
        stage_params(c),
        format!("{} samples of the zeta flow from t_min to pi/4", path.samples.len()),
        vec![hess.finish(), budget.finish(), positive.finish(), identity.finish()],
        notes,
    ))
}

/// Sample points for the perturbation analysis: meridian points at
/// multiples of `ν` and off-meridian points inside `{L ≤ 1}`.
fn perturbation_points(cfg: &StageConfig, n: usize) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0].iter().map(|k| ((k * cfg.nu).min(0.7), 0.0)).collect();
    let candidates = [0.15, 0.3, 0.45, 0.6, 0.7]
        .iter()
        .flat_map(|&t| [0.2, 0.45, 1.3, 2.7, 2.95].map(|th| (t, th)))
        .filter(|&(t, th)| psi::zero_gauge(t, th) <= 1.0);
    pts.extend(candidates.take(n.max(1)));
    pts
}

fn k_vector(rng: &mut CellRng) -> Vec10 {
    Vec10::from_fn(|j, _| if j < K_DIM { rng.normal() } else { 0.0 })
}

/// The part of `v` orthogonal to `basis` for the metric of `tensor`,
/// normalized; `basis` must be orthonormal.
fn unit_perp(tensor: &CurvatureTensor, v: &Vec10, basis: &[Vec10]) -> Vec10 {
    let mut w = *v;
    for b in basis {
        w -= b * tensor.inner(b, &w);
    }
    w / tensor.inner(&w, &w).sqrt()
}

/// A zero plane prepared for perturbation analysis: unit `ζ` and the unit
/// horizontal part of `W` for `g_{ν,re,l}`, with the tensors of
/// `g_new` and `g_{ν,re,l}`.
struct PerturbationSite {
    m: QMatrix2,
    point: Sp2Point,
    new: CurvatureTensor,
    old: CurvatureTensor,
    zeta: Vec10,
    w: Vec10,
    w_h: f64,
}

impl PerturbationSite {
    fn at(c: &StageConfig, t: f64, theta: f64) -> Result<Self> {
        let new = c.at_stage(Stage::Conformal);
        let old = c.at_stage(Stage::CheegerL);
        let spec = zero_locus::zero_plane_at(t, theta, Quaternion::I, Quaternion::J, c.nu, None)?;
        let m = spec.point.m;
        let h = new.fd_step_at(&m);
        let tn = curvature_tensor_with(&new, &m, h)?;
        let to = curvature_tensor_with(&old, &m, h)?;
        let zeta = spec.zeta / tn.inner(&spec.zeta, &spec.zeta).sqrt();
        // The zero plane belongs to the unperturbed metric, so W is projected with its gram.
        let w = unit_perp(&tn, &horizontal_part(&to.gram, &m, &spec.w), &[zeta]);
        Ok(PerturbationSite {
            m,
            point: spec.point,
            new: tn,
            old: to,
            zeta,
            w,
            w_h: spec.w_h(c.nu),
        })
    }

    /// A unit horizontal vector orthogonal to `ζ`, `W` and `extra`.
    fn perturbation(&self, v: &Vec10, extra: &[Vec10]) -> Vec10 {
        let mut basis = vec![self.zeta, self.w];
        basis.extend_from_slice(extra);
        unit_perp(&self.new, &horizontal_part(&self.new.gram, &self.m, v), &basis)
    }

    fn diff(&self, a: &Vec10, b: &Vec10, c: &Vec10, d: &Vec10) -> f64 {
        self.new.riemann(a, b, c, d) - self.old.riemann(a, b, c, d)
    }
}

fn check_main_lemma(cfg: &VerifyConfig, n_planes: usize) -> Result<CheckReport> {
    let c = &cfg.regime;
    let pts = perturbation_points(c, n_planes);
    let rows: Vec<Result<Vec<(f64, f64, String, f64)>>> = pts
        .par_iter()
        .enumerate()
        .map(|(i, &(t, th))| {
            let mut rng = CellRng::new(cfg.seed, 12_000 + i as u64, 0);
            let site = PerturbationSite::at(c, t, th)?;
            let xi = sp2::xi_at(&site.point)?.left_coords(&site.point);
            let frame = sp2::frame_at(&site.point)?;
            let y20 = frame.vectors[1].left_coords(&site.point);
            let mut pairs: Vec<(String, Vec10, Vec10)> = Vec::new();
            for k in 0..2 {
                let kv = k_vector(&mut rng);
                for (label, z0) in [("xi", xi), ("y20", y20)] {
                    let z = site.perturbation(&z0, &[]);
                    let v = site.perturbation(&kv, &[z]);
                    pairs.push((format!("z = {label}, V from V1+V2 ({k})"), z, v));
                }
            }
            for k in 0..3 {
                let z = site.perturbation(&normal_vec(&mut rng), &[]);
                let v = site.perturbation(&normal_vec(&mut rng), &[z]);
                pairs.push((format!("random horizontal ({k})"), z, v));
            }
            let mut out = vec![(
                t,
                th,
                "curv^diff(zeta, W)".to_string(),
                site.diff(&site.zeta, &site.w, &site.w, &site.zeta),
            )];
            for (name, z, v) in pairs {
                let pn = curvature_polynomial(&site.new, &site.zeta, &site.w, &z, &v);
                let po = curvature_polynomial(&site.old, &site.zeta, &site.w, &z, &v);
                let q = quadratic_subpoly(&pn.minus(&po), &po);
                let value = match q.minimum() {
                    Some((v, _, _)) => v,
                    None => {
                        let mut best = f64::INFINITY;
                        for a in -40..=40 {
                            for b in -40..=40 {
                                best = best.min(q.eval(a as f64 * 0.05, b as f64 * 0.05));
                            }
                        }
                        best
                    }
                };
                out.push((t, th, name, value));
            }
            Ok(out)
        })
        .collect();
    let mut diff = Track::lower("curv^diff(zeta, W) > 0", 0.0);
    let mut pq = Track::lower("min of P_Q over the case list", 0.0);
    let mut notes = Vec::new();
    let mut failures = 0;
    for row in rows {
        for (t, th, name, v) in row? {
            let loc = || Location::new(t, th, name.clone());
            if name.starts_with("curv^diff") {
                diff.add(v, loc);
            } else {
                if v <= 0.0 {
                    failures += 1;
                    notes.push(format!(
                        "nonpositive P_Q minimum {v:.6e} at t = {t:.5}, theta = {th:.5}: {name}"
                    ));
                }
                pq.add(v, loc);
            }
        }
    }
    notes.push(format!("{failures} nonpositive quadratic minima"));
    notes.push("all vectors are unit length for g_new; z and V are horizontal and orthogonal to zeta and W".into());
    Ok(CheckReport::new(
        "main-lemma",
        stage_params(c),
        format!("{} zero planes x 7 perturbation pairs", pts.len()),
        vec![diff.finish(), pq.finish()],
        notes,
    ))
}

fn check_higher_order(cfg: &VerifyConfig, n_samples: usize) -> Result<CheckReport> {
    let c = &cfg.regime;
    let kappa = cfg.o_budget_kappa;
    let vanishing = kappa * c.s;
    let pts = perturbation_points(c, 4);
    let per_point = n_samples.div_ceil(pts.len()).max(1);
    let rows: Vec<Result<Vec<(f64, f64, &'static str, f64)>>> = pts
        .par_iter()
        .enumerate()
        .map(|(i, &(t, th))| {
            let mut rng = CellRng::new(cfg.seed, 13_000 + i as u64, 0);
            let site = PerturbationSite::at(c, t, th)?;
            let budget = kappa * c.s.powi(4) * site.w_h * site.w_h * c.nu;
            let (zeta, w) = (site.zeta, site.w);
            let old = |a: &Vec10, b: &Vec10| site.old.curv(a, b);
            let mut out = Vec::new();
            let frame = sp2::frame_at(&site.point)?;
            let y20 = site.perturbation(&frame.vectors[1].left_coords(&site.point), &[]);
            let cy = site.diff(&zeta, &y20, &y20, &zeta);
            out.push((t, th, "y20", cy.abs() / (vanishing * old(&zeta, &y20).abs() + budget)));
            for _ in 0..per_point {
                let z = site.perturbation(&normal_vec(&mut rng), &[]);
                let v = site.perturbation(&normal_vec(&mut rng), &[z]);
                let cv = site.diff(&z, &v, &v, &z);
                let cw = site.diff(&z, &w, &w, &z);
                let ov = old(&z, &v).abs();
                let ow = old(&z, &w).abs();
                let excess = site.diff(&z, &v, &w, &z).abs() - cv.max(0.0).sqrt() * cw.max(0.0).sqrt();
                out.push((t, th, "cs", excess / (vanishing * (ov * ow).sqrt()).max(1e-300)));
                out.push((
                    t,
                    th,
                    "nonneg",
                    (-cv / (vanishing * ov).max(1e-300)).max(-cw / (vanishing * ow).max(1e-300)),
                ));
                let kv = site.perturbation(&k_vector(&mut rng), &[]);
                let ck = site.diff(&zeta, &kv, &kv, &zeta);
                out.push((t, th, "k", ck.abs() / (vanishing * old(&zeta, &kv).abs() + budget)));
            }
            Ok(out)
        })
        .collect();
    let mut cs = Track::upper(
        "|R^diff(z,V,W,z)| - sqrt(curv^diff(z,V) curv^diff(z,W)) within the ignorable share",
        1.0,
    );
    let mut nonneg = Track::upper(
        "curv^diff(z,V) and curv^diff(z,W) nonnegative up to the ignorable share",
        1.0,
    );
    let mut y = Track::upper("curv^diff(zeta, y20) negligible", 1.0);
    let mut kv = Track::upper("curv^diff(zeta, V) negligible for V from V1+V2 perpendicular to W", 1.0);
    for row in rows {
        for (t, th, what, v) in row? {
            let loc = || Location::new(t, th, what);
            match what {
                "cs" => cs.add(v, loc),
                "nonneg" => nonneg.add(v, loc),
                "y20" => y.add(v, loc),
                _ => kv.add(v, loc),
            }
        }
    }
    Ok(CheckReport::new(
        "higher-order",
        stage_params(c),
        format!("{} zero planes x {per_point} random samples", pts.len()),
        vec![cs.finish(), nonneg.finish(), y.finish(), kv.finish()],
        vec![
            format!("a term of R^diff is ignorable when it is below kappa s = {vanishing} times the matching g_(nu,re,l) term"),
            format!("budget = kappa s^4 w_h^2 nu with kappa = {kappa}"),
        ],
    ))
}

fn check_invariance(cfg: &VerifyConfig) -> Result<CheckReport> {
    let rep = stage_invariance_check(&cfg.regime.at_stage(Stage::Final), 100, cfg.seed)?;
    let parts = rep
        .rows
        .iter()
        .map(|(stage, action, v)| {
            let mut tr = Track::abs(&format!("{} under {:?}", stage.name(), action), 1e-9);
            tr.samples = rep.samples.saturating_sub(1);
            tr.add(*v, || Location::new(f64::NAN, f64::NAN, "worst of the samples"));
            tr.finish()
        })
        .collect();
    Ok(CheckReport::new(
        "invariance",
        stage_params(&cfg.regime),
        format!("{} random points and vectors per stage and action", rep.samples),
        parts,
        vec![],
    ))
}

fn check_profile(cfg: &VerifyConfig) -> Result<CheckReport> {
    let checks = cfg.regime.profile.validate(20_000);
    let parts = checks
        .into_iter()
        .map(|c| Part {
            name: c.name,
            measure: Measure::Constraint,
            value: c.worst,
            bound: 0.0,
            pass: c.pass,
            samples: 20_000,
            worst_location: None,
        })
        .collect();
    Ok(CheckReport::new(
        "profile",
        stage_params(&cfg.regime),
        "20000 radii across the support",
        parts,
        vec![],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let h = 0.1;
        let v: Vec<f64> = (0..=10).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&v, h) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn track_semantics() {
        let mut t = Track::lower("x", 0.0);
        t.add(2.0, || Location::new(0.0, 0.0, ""));
        t.add(1.0, || Location::new(1.0, 0.0, ""));
        let p = t.finish();
        assert!(p.pass && p.value == 1.0 && p.worst_location.unwrap().t == Some(1.0));
        let mut t = Track::abs("y", 1e-3);
        t.add(f64::NAN, || Location::new(0.0, 0.0, ""));
        assert!(!t.finish().pass);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
    }
}
