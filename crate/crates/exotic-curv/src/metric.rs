//! The deformation pipeline. Each stage's metric is a field of Gram
//! matrices in left coordinates:
//!
//! | stage | metric | operation |
//! |---|---|---|
//! | 0 | `(½)b` | biinvariant |
//! | 1 | `g_ν` | Cheeger deformation by `h₁ ⊕ h₂`, scaling `V₁ ⊕ V₂` by `ν²` |
//! | 2 | `g_{ν,re}` | multiply the metric on `Z^⊥` by `φ²` |
//! | 3 | `g_{ν,re,l}` | Cheeger deformation by `U ⊕ D` at scale `l` |
//! | 4 | `g_s` | scale the fibers of the projection to `S⁴` by `1 − s²` |
//! | 5 | `g_new` | multiply by `e^{2f}` on the complement of `Δ(α)` |
//! | 6 | `g_final` | Cheeger deformation by the diagonal of `U × D` and by `h₁` |
//!
//! Every stage splits vectors with respect to the previous stage's metric.

use crate::error::{Error, Result};
use crate::lie::{self, Mat10, Vec10};
use crate::psi::{psi_sq_from_base, PsiParams};
use crate::quat::{QMatrix2, Quaternion};
use crate::rng::CellRng;
use crate::sp2::{self, Action, Sp2Point, TangentVector};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// The seven metrics of the pipeline, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    /// `(½)b`.
    Biinvariant,
    /// `g_ν`.
    Nu,
    /// `g_{ν,re}`.
    Redistributed,
    /// `g_{ν,re,l}`.
    CheegerL,
    /// `g_s`.
    FiberScaled,
    /// `g_new`.
    Conformal,
    /// `g_final`.
    Final,
}

impl Stage {
    /// All stages in pipeline order.
    pub const ALL: [Stage; 7] = [
        Stage::Biinvariant,
        Stage::Nu,
        Stage::Redistributed,
        Stage::CheegerL,
        Stage::FiberScaled,
        Stage::Conformal,
        Stage::Final,
    ];

    /// Position in the pipeline, `0..=6`.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Short name used in reports and configuration files.
    pub fn name(self) -> &'static str {
        match self {
            Stage::Biinvariant => "biinvariant",
            Stage::Nu => "nu",
            Stage::Redistributed => "redistributed",
            Stage::CheegerL => "cheeger_l",
            Stage::FiberScaled => "fiber_scaled",
            Stage::Conformal => "conformal",
            Stage::Final => "final",
        }
    }

    /// Parses a stage from its name or index.
    pub fn parse(s: &str) -> Option<Stage> {
        Stage::ALL
            .iter()
            .copied()
            .find(|st| st.name() == s || st.index().to_string() == s)
    }
}

/// Quintic smoothstep `x³(10 − 15x + 6x²)`, with vanishing first and
/// second derivatives at both ends.
fn smoothstep(x: f64) -> f64 {
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

fn smoothstep_int(x: f64) -> f64 {
    x.powi(4) * (2.5 - 3.0 * x + x * x)
}

fn smoothstep_int2(x: f64) -> f64 {
    x.powi(5) * (0.5 - 0.5 * x + x * x / 7.0)
}

/// A `C²` piecewise-polynomial redistribution profile `φ(r)`.
///
/// `φ″ = −A` on `[0, k₁ν]`, a quintic ramp up to `B`, a plateau at `B`, a
/// quintic ramp down to `0`, and `φ ≡ 1` afterwards. The plateau length is
/// chosen so that `φ′` returns to zero, and the additive constant so that
/// `φ = 1` at the end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseProfile {
    /// The `ν` the profile was built for.
    pub nu: f64,
    /// `−φ″` near `0`.
    pub a: f64,
    /// `φ″` on the plateau.
    pub b: f64,
    /// Ramp width.
    pub width: f64,
    /// Knots `[0, k₁ν, k₁ν + w, c, c + w]`.
    pub knots: [f64; 5],
    d1k: [f64; 5],
    vk: [f64; 5],
    off: f64,
}

impl PiecewiseProfile {
    /// Builds the profile with `A = 100.5ν²`, `B = 10000.5ν³`, a near-zero
    /// interval of length `k₁ν` and ramps of width `width`.
    pub fn build(nu: f64, k1: f64, width: f64) -> Result<Self> {
        if !(nu > 0.0 && k1 > 0.0 && width > 0.0) {
            return Err(Error::InvalidProfile("nu, k1 and width must be positive".into()));
        }
        let a = 100.5 * nu * nu;
        let b = 10000.5 * nu.powi(3);
        let x0 = k1 * nu;
        let plateau = (a * x0 + a * width - (a + b) * width / 2.0 - b * width / 2.0) / b;
        if plateau <= 0.0 {
            return Err(Error::InvalidProfile(format!(
                "no plateau balances the profile at nu = {nu} (length {plateau:e})"
            )));
        }
        let c = x0 + width + plateau;
        let knots = [0.0, x0, x0 + width, c, c + width];
        if knots[4] >= FRAC_PI_4 {
            return Err(Error::InvalidProfile(format!(
                "profile support {:.6} exceeds π/4 at nu = {nu}",
                knots[4]
            )));
        }
        let mut d1k = [0.0; 5];
        let mut vk = [0.0; 5];
        let h = knots[1];
        d1k[1] = -a * h;
        vk[1] = -a * h * h / 2.0;
        let h = width;
        d1k[2] = d1k[1] - a * h + (a + b) * h * smoothstep_int(1.0);
        vk[2] = vk[1] + d1k[1] * h - a * h * h / 2.0 + (a + b) * h * h * smoothstep_int2(1.0);
        let h = knots[3] - knots[2];
        d1k[3] = d1k[2] + b * h;
        vk[3] = vk[2] + d1k[2] * h + b * h * h / 2.0;
        let h = width;
        d1k[4] = d1k[3] + b * h - b * h * smoothstep_int(1.0);
        vk[4] = vk[3] + d1k[3] * h + b * h * h / 2.0 - b * h * h * smoothstep_int2(1.0);
        let off = 1.0 - vk[4];
        Ok(PiecewiseProfile {
            nu,
            a,
            b,
            width,
            knots,
            d1k,
            vk,
            off,
        })
    }

    /// `(φ, φ′, φ″)` at `r ≥ 0`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let k = &self.knots;
        let (a, b, w) = (self.a, self.b, self.width);
        if r >= k[4] {
            return (1.0, 0.0, 0.0);
        }
        if r < k[1] {
            return (self.off - a * r * r / 2.0, -a * r, -a);
        }
        if r < k[2] {
            let x = r - k[1];
            let u = x / w;
            return (
                self.off + self.vk[1] + self.d1k[1] * x - a * x * x / 2.0 + (a + b) * w * w * smoothstep_int2(u),
                self.d1k[1] - a * x + (a + b) * w * smoothstep_int(u),
                -a + (a + b) * smoothstep(u),
            );
        }
        if r < k[3] {
            let x = r - k[2];
            return (
                self.off + self.vk[2] + self.d1k[2] * x + b * x * x / 2.0,
                self.d1k[2] + b * x,
                b,
            );
        }
        let x = r - k[3];
        let u = x / w;
        (
            self.off + self.vk[3] + self.d1k[3] * x + b * x * x / 2.0 - b * w * w * smoothstep_int2(u),
            self.d1k[3] + b * x - b * w * smoothstep_int(u),
            b - b * smoothstep(u),
        )
    }
}

/// The redistribution profile of stage 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RedistributionProfile {
    /// `φ ≡ 1`: stage 2 leaves the metric unchanged.
    Identity,
    /// A constructed profile.
    Piecewise(PiecewiseProfile),
}

/// One certified inequality of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    /// Description of the constraint.
    pub name: String,
    /// Whether it holds on the whole grid.
    pub pass: bool,
    /// The extreme value observed.
    pub worst: f64,
}

impl RedistributionProfile {
    /// `(φ, φ′, φ″)` at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match self {
            RedistributionProfile::Identity => (1.0, 0.0, 0.0),
            RedistributionProfile::Piecewise(p) => p.eval(r),
        }
    }

    /// Radius beyond which `φ ≡ 1`.
    pub fn support(&self) -> f64 {
        match self {
            RedistributionProfile::Identity => 0.0,
            RedistributionProfile::Piecewise(p) => p.knots[4],
        }
    }

    /// Certifies every constraint on a grid of `n` points of `[0, π/4]`
    /// plus the knots.
    pub fn validate(&self, n: usize) -> Vec<ProfileCheck> {
        let p = match self {
            RedistributionProfile::Identity => {
                return vec![ProfileCheck {
                    name: "phi identically 1".into(),
                    pass: true,
                    worst: 0.0,
                }];
            }
            RedistributionProfile::Piecewise(p) => p,
        };
        let nu = p.nu;
        let mut grid: Vec<f64> = (0..=n).map(|i| FRAC_PI_4 * i as f64 / n as f64).collect();
        for w in p.knots.windows(2) {
            for j in 0..=50 {
                grid.push(w[0] + (w[1] - w[0]) * j as f64 / 50.0);
            }
        }
        let mut out = Vec::new();
        let d0 = p.eval(0.0).1;
        out.push(ProfileCheck {
            name: "phi'(0) = 0".into(),
            pass: d0.abs() <= 1e-14,
            worst: d0,
        });

        let mut worst_near: f64 = -100.5;
        let mut ok_near = true;
        let mut worst_plat: f64 = 10000.5;
        let mut ok_plat = true;
        let mut worst_sq: f64 = 0.0;
        let mut worst_d1: f64 = 0.0;
        let mut worst_tail: f64 = 0.0;
        for &r in &grid {
            let (f, d1, d2) = p.eval(r);
            if r < p.knots[1] {
                let v = d2 / (nu * nu);
                ok_near &= v > -101.0 && v < -100.0;
                if (v + 100.5).abs() > (worst_near + 100.5).abs() {
                    worst_near = v;
                }
            }
            if r >= p.knots[2] && r < p.knots[3] {
                let v = d2 / nu.powi(3);
                ok_plat &= v > 10000.0 && v < 10001.0;
                if (v - 10000.5).abs() > (worst_plat - 10000.5).abs() {
                    worst_plat = v;
                }
            }
            if r >= p.knots[4] {
                worst_tail = worst_tail.max((f - 1.0).abs());
            }
            worst_sq = worst_sq.max((f * f - 1.0).abs());
            worst_d1 = worst_d1.max(d1.abs());
        }
        let bound = 101.0 * nu.powi(3);
        out.push(ProfileCheck {
            name: format!("phi''/nu^2 in (-101, -100) on [0, {:.6}]", p.knots[1]),
            pass: ok_near,
            worst: worst_near,
        });
        out.push(ProfileCheck {
            name: format!("phi''/nu^3 in (10000, 10001) on [{:.6}, {:.6}]", p.knots[2], p.knots[3]),
            pass: ok_plat,
            worst: worst_plat,
        });
        out.push(ProfileCheck {
            name: format!("phi = 1 on [{:.6}, pi/4]", p.knots[4]),
            pass: worst_tail <= 1e-12,
            worst: worst_tail,
        });
        out.push(ProfileCheck {
            name: "|phi^2 - 1| <= 101 nu^3".into(),
            pass: worst_sq <= bound,
            worst: worst_sq,
        });
        out.push(ProfileCheck {
            name: "|phi'| <= 101 nu^3".into(),
            pass: worst_d1 <= bound,
            worst: worst_d1,
        });
        let mut jump: f64 = 0.0;
        for &k in &p.knots[1..] {
            let l = p.eval(k - 1e-12);
            let r = p.eval(k + 1e-12);
            jump = jump
                .max((l.0 - r.0).abs())
                .max((l.1 - r.1).abs())
                .max((l.2 - r.2).abs() * 1e-6);
        }
        out.push(ProfileCheck {
            name: "C2 continuity at the knots".into(),
            pass: jump <= 1e-8,
            worst: jump,
        });
        out
    }
}

/// The bump `I(r)` added to the conformal exponent, with
/// `I″(r) = A cos(2πr/r₀)` on `[0, r₀]` and zero beyond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalBump {
    /// `A = sup |I″|`.
    pub amplitude: f64,
    /// Support radius `r₀`.
    pub radius: f64,
}

impl ConformalBump {
    /// `A = κ s⁴/ν²` with support `r₀`.
    pub fn new(kappa: f64, s: f64, nu: f64, radius: f64) -> Self {
        ConformalBump {
            amplitude: kappa * s.powi(4) / (nu * nu),
            radius,
        }
    }

    /// `(I, I′, I″)` at `r`. `I`, `I′` vanish at `0` and on `[r₀, ∞)`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        if self.amplitude == 0.0 || r >= self.radius {
            return (0.0, 0.0, 0.0);
        }
        let k = 2.0 * PI / self.radius;
        let a = self.amplitude;
        (
            a * (1.0 - (k * r).cos()) / (k * k),
            a * (k * r).sin() / k,
            a * (k * r).cos(),
        )
    }
}

/// The full parameter set of the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    /// Last stage applied.
    pub stage: Stage,
    /// `h₁ ⊕ h₂` scale.
    pub nu: f64,
    /// `U ⊕ D` Cheeger scale; infinite disables stage 3.
    pub l: f64,
    /// Fiber scale: fibers are multiplied by `1 − s²`.
    pub s: f64,
    /// Constant part of the conformal exponent.
    pub c: f64,
    /// Multiplier `m` in `f = C − m s²ψ²/(2ν²) + I`.
    pub psi_weight: f64,
    /// `κ` in the bump amplitude `κ s⁴/ν²`.
    pub kappa_iota: f64,
    /// Bump support `r₀`.
    pub bump_radius: f64,
    /// Diagonal `U × D` scale of stage 6; infinite disables it.
    pub l_diag: f64,
    /// `h₁` scale of stage 6; infinite disables it.
    pub l_h1: f64,
    /// Lower bound on `t` for stages 5 and 6.
    pub t_min: f64,
    /// Finite-difference step for curvature.
    pub fd_step: f64,
    /// Redistribution profile.
    pub profile: RedistributionProfile,
}

impl StageConfig {
    /// The positivity regime `ν = s^{6/7}`, `l = ν^{1/3}` with a constructed
    /// redistribution profile.
    pub fn positivity_regime(s: f64) -> Result<Self> {
        let nu = s.powf(6.0 / 7.0);
        let l = nu.powf(1.0 / 3.0);
        let profile = RedistributionProfile::Piecewise(PiecewiseProfile::build(nu, 0.95, 0.006)?);
        Ok(StageConfig {
            stage: Stage::Final,
            nu,
            l,
            s,
            c: 1.05,
            psi_weight: 1.0,
            kappa_iota: 0.01,
            bump_radius: 4.0 * nu,
            l_diag: 1.0,
            l_h1: 1.0,
            t_min: 1e-3,
            fd_step: 5e-4,
            profile,
        })
    }

    /// The regime `ν = 0.5`, `l = 1`, `s = 0.2` used for identity checks.
    /// The redistribution profile is the identity.
    pub fn formula_check() -> Self {
        StageConfig {
            stage: Stage::Final,
            nu: 0.5,
            l: 1.0,
            s: 0.2,
            c: 1.05,
            psi_weight: 1.0,
            kappa_iota: 0.01,
            bump_radius: 2.0,
            l_diag: 1.0,
            l_h1: 1.0,
            t_min: 1e-3,
            fd_step: 4e-3,
            profile: RedistributionProfile::Identity,
        }
    }

    /// The same parameters truncated at `stage`.
    pub fn at_stage(&self, stage: Stage) -> Self {
        StageConfig { stage, ..self.clone() }
    }

    /// Checks the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::Domain(format!("nu = {} outside (0, 1)", self.nu)));
        }
        if !(self.l > 0.0 && self.l_diag > 0.0 && self.l_h1 > 0.0) {
            return Err(Error::Domain("Cheeger scales must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.s) {
            return Err(Error::Domain(format!("s = {} outside [0, 1)", self.s)));
        }
        if !(self.bump_radius > 0.0 && self.bump_radius.is_finite()) {
            return Err(Error::Domain("bump radius must be positive".into()));
        }
        if !(self.t_min >= 0.0 && self.fd_step > 0.0) {
            return Err(Error::Domain(
                "t_min and fd_step must be nonnegative and positive".into(),
            ));
        }
        Ok(())
    }

    /// The finite-difference step at `m`. A constructed redistribution
    /// profile and the conformal change depend on the distance to the pole,
    /// so from those stages on the step shrinks to `t/24` near it. A
    /// piecewise profile also caps the step at a sixteenth of its ramp width,
    /// which keeps the stencil inside one smooth piece at ramp midpoints.
    pub fn fd_step_at(&self, m: &QMatrix2) -> f64 {
        let (radial, cap) = match &self.profile {
            RedistributionProfile::Identity => (self.stage >= Stage::Conformal, f64::INFINITY),
            RedistributionProfile::Piecewise(p) => (self.stage >= Stage::Redistributed, p.width / 16.0),
        };
        if !radial {
            return self.fd_step;
        }
        let (t, _) = sp2::base_coords_of(m);
        self.fd_step.min(t / 24.0).min(cap)
    }

    /// Checks that curvature may be evaluated at `m`: stages 5 and 6 need
    /// `t ≥ t_min` at the center of the stencil.
    pub fn check_curvature_domain(&self, m: &QMatrix2) -> Result<()> {
        if self.stage >= Stage::Conformal {
            check_t_min(m, self, 1.0)?;
        }
        Ok(())
    }

    /// The `(ν, l)` pair entering `ψ`.
    pub fn psi_params(&self) -> PsiParams {
        PsiParams { nu: self.nu, l: self.l }
    }

    /// The conformal bump.
    pub fn bump(&self) -> ConformalBump {
        ConformalBump::new(self.kappa_iota, self.s, self.nu, self.bump_radius)
    }
}

/// Generic Cheeger deformation: the metric induced on `M` by `(G × M)/G`
/// where the group factor carries `lᵢ²` times the biinvariant metric in the
/// direction of the `i`-th Killing field.
///
/// With `S` the matrix of Killing fields and `P = SᵀGS`, the result is
/// `G − GS(L + P)⁻¹SᵀG` with `L = diag(lᵢ²)`.
pub fn cheeger_gram(g: &Mat10, fields: &[Vec10], scales: &[f64]) -> Result<Mat10> {
    let k = fields.len();
    let mut s = DMatrix::zeros(10, k);
    for (j, f) in fields.iter().enumerate() {
        for i in 0..10 {
            s[(i, j)] = f[i];
        }
    }
    let gd = DMatrix::from_fn(10, 10, |r, c| g[(r, c)]);
    let gs = &gd * &s;
    let mut sys = s.transpose() * &gs;
    for (j, l) in scales.iter().enumerate() {
        sys[(j, j)] += l * l;
    }
    let eig = SymmetricEigen::new(sys.clone());
    let (mn, mx) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if mn <= 0.0 || mx / mn > 1e12 {
        return Err(Error::IllConditioned(format!("orbit system condition {:e}", mx / mn)));
    }
    let chol = sys
        .cholesky()
        .ok_or_else(|| Error::IllConditioned("orbit system not positive definite".into()))?;
    let x = chol.solve(&gs.transpose());
    let corr = &gs * x;
    Ok(Mat10::from_fn(|r, c| g[(r, c)] - 0.5 * (corr[(r, c)] + corr[(c, r)])))
}

/// A basis of `ker dπ` for the projection to `S⁴`, in left coordinates.
pub fn vertical_basis(m: &QMatrix2) -> [Vec10; 6] {
    let mut a = nalgebra::SMatrix::<f64, 5, 10>::zeros();
    for (i, e) in lie::BASIS.iter().enumerate() {
        let d = sp2::gm_differential(m, &(*m * *e));
        for r in 0..5 {
            a[(r, i)] = d[r];
        }
    }
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    let mut idx: Vec<usize> = (0..10).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());
    let mut out = [Vec10::zeros(); 6];
    for (k, o) in out.iter_mut().enumerate() {
        *o = Vec10::from_fn(|r, _| eig.eigenvectors[(r, idx[k])]);
    }
    out
}

/// `G`-orthogonal projector onto the span of `basis`, as a matrix acting on
/// left coordinates.
pub fn projector(g: &Mat10, basis: &[Vec10]) -> Mat10 {
    let k = basis.len();
    let b = DMatrix::from_fn(10, k, |r, c| basis[c][r]);
    let gd = DMatrix::from_fn(10, 10, |r, c| g[(r, c)]);
    let bg = b.transpose() * &gd;
    let small = &bg * &b;
    let sol = small.cholesky().expect("basis must be independent").solve(&bg);
    let p = b * sol;
    Mat10::from_fn(|r, c| p[(r, c)])
}

/// Fiber scaling: `G − s² PᵀGP` with `P` the `G`-projector onto `ker dπ`.
pub fn fiber_scaled_gram(g: &Mat10, m: &QMatrix2, s: f64) -> Mat10 {
    if s == 0.0 {
        return *g;
    }
    let p = projector(g, &vertical_basis(m));
    let c = p.transpose() * g * p;
    let out = g - c * (s * s);
    (out + out.transpose()) * 0.5
}

/// The `G_{ν}`-orthogonal projector onto `Z^⊥ ⊂ V₁ ⊕ V₂`.
pub fn z_perp_projector(m: &QMatrix2, nu: f64) -> Result<Mat10> {
    let g = lie::nu_gram(nu);
    let zeta = sp2::zeta_field(m, &g)?;
    let li = lie::LeftInvariant::new(g);
    let q = li.curvature_form(&zeta, lie::K_DIM);
    let eig = SymmetricEigen::new(q);
    let mut idx: Vec<usize> = (0..lie::K_DIM).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut p = Mat10::zeros();
    for &k in &idx[3..] {
        let v = eig.eigenvectors.column(k);
        for i in 0..lie::K_DIM {
            for j in 0..lie::K_DIM {
                p[(i, j)] += v[i] * v[j];
            }
        }
    }
    Ok(p)
}

/// Base-point data `(y₀, y_r, |Im y|)` and the distance `r` from the pole.
fn base_data(m: &QMatrix2) -> (f64, f64, f64) {
    let y = sp2::gm_of(m);
    (y.q.w, y.r, y.q.im_part().norm())
}

/// `ψ²` at a point of `Sp(2)`.
pub fn psi_sq_at(m: &QMatrix2, params: &PsiParams) -> f64 {
    let (y0, yr, im) = base_data(m);
    psi_sq_from_base(y0, yr, im, params)
}

/// The differential of `ψ²` in left coordinates.
pub fn psi_sq_differential(m: &QMatrix2, params: &PsiParams) -> Vec10 {
    let (y0, yr, im) = base_data(m);
    let a = params.inv_two_l_sq();
    let inl = params.inv_nu_l_sq();
    let e = 4.0 * (y0 * y0 + yr * yr) + 4.0 * y0 * y0 * a + 4.0 * im * im * inl;
    let f_e = -im * im / (e * e);
    let d_y0 = f_e * (8.0 * y0 + 8.0 * y0 * a);
    let d_yr = f_e * 8.0 * yr;
    let d_im2 = 1.0 / e + f_e * 4.0 * inl;
    let y = sp2::gm_of(m);
    let imq = y.q.im_part();
    let mut out = Vec10::zeros();
    for (i, b) in lie::BASIS.iter().enumerate() {
        let d = sp2::gm_differential(m, &(*m * *b));
        let dim2 = 2.0 * (imq.x * d[1] + imq.y * d[2] + imq.z * d[3]);
        out[i] = d_y0 * d[0] + d_yr * d[4] + d_im2 * dim2;
    }
    out
}

/// Fraction of `t_min` down to which stages 5 and 6 can be sampled, so that
/// curvature stencils centered at `t_min` stay inside the domain.
pub const T_MIN_STENCIL_FRACTION: f64 = 0.5;

fn check_t_min(m: &QMatrix2, cfg: &StageConfig, fraction: f64) -> Result<()> {
    let (t, _) = sp2::base_coords_of(m);
    if t < cfg.t_min * fraction * (1.0 - 1e-9) {
        return Err(Error::Domain(format!("t = {t:e} below t_min = {:e}", cfg.t_min)));
    }
    Ok(())
}

/// The conformal exponent `f = C − m s²ψ²/(2ν²) + I(r)` at `m`.
pub fn conformal_exponent(m: &QMatrix2, cfg: &StageConfig) -> f64 {
    let psi2 = psi_sq_at(m, &cfg.psi_params());
    let r = sp2::base_distance(m);
    cfg.c - cfg.psi_weight * cfg.s * cfg.s * psi2 / (2.0 * cfg.nu * cfg.nu) + cfg.bump().eval(r).0
}

/// The differential of the conformal exponent in left coordinates.
pub fn conformal_exponent_differential(m: &QMatrix2, cfg: &StageConfig) -> Vec10 {
    let k = cfg.psi_weight * cfg.s * cfg.s / (2.0 * cfg.nu * cfg.nu);
    let r = sp2::base_distance(m);
    let ip = cfg.bump().eval(r).1;
    let mut out = psi_sq_differential(m, &cfg.psi_params()) * (-k);
    if ip != 0.0 {
        out += sp2::base_distance_differential(m) * ip;
    }
    out
}

/// `(f, grad f)` with the gradient taken for the fiber-scaled metric `g_s`.
pub fn conformal_f(cfg: &StageConfig, q: &Sp2Point) -> Result<(f64, TangentVector)> {
    check_t_min(&q.m, cfg, 1.0)?;
    let g = gram_at(&cfg.at_stage(Stage::FiberScaled), &q.m)?;
    let df = conformal_exponent_differential(&q.m, cfg);
    let grad = g
        .cholesky()
        .ok_or_else(|| Error::IllConditioned("g_s not positive definite".into()))?
        .solve(&df);
    Ok((conformal_exponent(&q.m, cfg), TangentVector::from_left(q, &grad)))
}

/// Partial conformal change: `e^{2f}` on the complement of the unit vector
/// `d`, unchanged along `d`.
pub fn partial_conformal_gram(g: &Mat10, d: &Vec10, f: f64) -> Mat10 {
    let n = (d.transpose() * g * d)[0].sqrt();
    let gd = g * d / n;
    let e = (2.0 * f).exp();
    let out = g * e + gd * gd.transpose() * (1.0 - e);
    (out + out.transpose()) * 0.5
}

/// The Gram matrix of the configured stage at `m`, in left coordinates.
pub fn gram_at(cfg: &StageConfig, m: &QMatrix2) -> Result<Mat10> {
    if cfg.stage == Stage::Biinvariant {
        return Ok(lie::biinvariant_gram());
    }
    let mut g = lie::nu_gram(cfg.nu);
    if cfg.stage == Stage::Nu {
        return Ok(g);
    }
    let r = sp2::base_distance(m);
    if r < cfg.profile.support() {
        let phi = cfg.profile.eval(r).0;
        if phi != 1.0 {
            let p = z_perp_projector(m, cfg.nu)?;
            g += p.transpose() * g * p * (phi * phi - 1.0);
        }
    }
    if cfg.stage == Stage::Redistributed {
        return Ok(g);
    }
    if cfg.l.is_finite() {
        let mut fields = Vec::with_capacity(6);
        for u in [Quaternion::I, Quaternion::J, Quaternion::K] {
            fields.push(Action::U.killing(m, u));
        }
        for u in [Quaternion::I, Quaternion::J, Quaternion::K] {
            fields.push(Action::D.killing(m, u));
        }
        g = cheeger_gram(&g, &fields, &[cfg.l; 6])?;
    }
    if cfg.stage == Stage::CheegerL {
        return Ok(g);
    }
    g = fiber_scaled_gram(&g, m, cfg.s);
    if cfg.stage == Stage::FiberScaled {
        return Ok(g);
    }
    check_t_min(m, cfg, T_MIN_STENCIL_FRACTION)?;
    let d = sp2::delta_alpha(m);
    g = partial_conformal_gram(&g, &d, conformal_exponent(m, cfg));
    if cfg.stage == Stage::Conformal {
        return Ok(g);
    }
    let mut fields = Vec::with_capacity(6);
    let mut scales = Vec::with_capacity(6);
    if cfg.l_diag.is_finite() {
        fields.extend(Action::DiagUd.killing_fields(m));
        scales.extend([cfg.l_diag; 3]);
    }
    if cfg.l_h1.is_finite() {
        fields.extend(Action::H1.killing_fields(m));
        scales.extend([cfg.l_h1; 3]);
    }
    if !fields.is_empty() {
        g = cheeger_gram(&g, &fields, &scales)?;
    }
    Ok(g)
}

/// `g(X, Y)` for the configured stage.
pub fn metric_eval(cfg: &StageConfig, q: &Sp2Point, x: &TangentVector, y: &TangentVector) -> Result<f64> {
    let g = gram_at(cfg, &q.m)?;
    Ok((x.left_coords(q).transpose() * g * y.left_coords(q))[0])
}

/// Result of [`stage_invariance_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// Per stage and action: `(stage, action, max residual)`.
    pub rows: Vec<(Stage, Action, f64)>,
    /// Number of samples per row.
    pub samples: usize,
}

impl InvarianceReport {
    /// Largest residual over all rows.
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.2))
    }
}

/// A random point with `t ∈ [t_lo, π/4 − 0.01]`.
pub fn random_point(rng: &mut CellRng, t_lo: f64) -> Sp2Point {
    let t = t_lo + (FRAC_PI_4 - 0.01 - t_lo) * rng.uniform();
    let theta = PI * rng.uniform();
    let alpha = rng.unit_imaginary();
    let p = rng.unit_quaternion();
    sp2::representative_point(t, theta, alpha, p).expect("sampled coordinates are in range")
}

/// Checks `g(dA X, dA Y) = g(X, Y)` for `A_{2,-1}` and `A^{h₂}` at every
/// stage up to `cfg.stage`, on `n` random samples.
pub fn stage_invariance_check(cfg: &StageConfig, n: usize, seed: u64) -> Result<InvarianceReport> {
    let mut rows = Vec::new();
    for stage in Stage::ALL.iter().copied().filter(|s| *s <= cfg.stage) {
        let c = cfg.at_stage(stage);
        for action in [Action::GromollMeyer, Action::H2] {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let mut rng = CellRng::new(
                    seed,
                    (stage.index() * 2 + (action == Action::H2) as usize) as u64,
                    i as u64,
                );
                let t_lo = if i % 4 == 0 { 0.02 } else { c.t_min.max(0.01) };
                let q = random_point(&mut rng, t_lo);
                let g = rng.unit_quaternion();
                let xv = Vec10::from_fn(|_, _| rng.normal());
                let yv = Vec10::from_fn(|_, _| rng.normal());
                let x = TangentVector::from_left(&q, &xv);
                let y = TangentVector::from_left(&q, &yv);
                let q2 = sp2::act(action, g, &q);
                let x2 = sp2::act_vector(action, g, &x);
                let y2 = sp2::act_vector(action, g, &y);
                let a = metric_eval(&c, &q, &x, &y)?;
                let b = metric_eval(&c, &q2, &x2, &y2)?;
                let scale = metric_eval(&c, &q, &x, &x)?.abs().sqrt() * metric_eval(&c, &q, &y, &y)?.abs().sqrt();
                worst = worst.max((a - b).abs() / scale.max(1e-300));
            }
            rows.push((stage, action, worst));
        }
    }
    Ok(InvarianceReport { rows, samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_c1_and_ends_at_one() {
        let p = PiecewiseProfile::build(0.05f64.powf(6.0 / 7.0), 1.0, 0.002).unwrap();
        let (f, d, _) = p.eval(p.knots[4]);
        assert_eq!((f, d), (1.0, 0.0));
        let (f, d, _) = p.eval(p.knots[4] - 1e-13);
        assert!((f - 1.0).abs() < 1e-12 && d.abs() < 1e-9);
    }

    #[test]
    fn bump_integrates_to_zero_slope() {
        let b = ConformalBump {
            amplitude: 2.0,
            radius: 0.3,
        };
        assert!(b.eval(0.0).1.abs() < 1e-15);
        assert!(b.eval(0.3 - 1e-12).1.abs() < 1e-9);
        assert!(b.eval(0.3 - 1e-12).0.abs() < 1e-9);
    }
}
