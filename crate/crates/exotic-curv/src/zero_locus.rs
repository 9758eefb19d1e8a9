//! Zero-curvature planes of `g_{ν,l}`: the circle-ellipse angle `λ`, the
//! horizontal planes `span{ζ, W}`, the wider family of `W` with
//! `curv(ζ, W) = 0`, and integral curves of ζ.

use crate::curvature::horizontality_residual;
use crate::error::{Error, Result};
use crate::lie::{self, kvec, Vec10};
use crate::psi::{self, zero_gauge, PsiParams};
use crate::quat::{conj_by, Quaternion};
use crate::sp2::{self, Sp2Point, TangentVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// `(cos λ, sin λ)` at the first-quadrant intersection of the unit circle
/// with the ellipse `σ ↦ (cos σ/2, sin σ/L)`:
/// `cos²λ = (1 − L²)/(4 − L²)`, `sin²λ = 3/(4 − L²)`.
pub fn lambda_from_l(l: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::NoSolution(format!(
            "L = {l} outside [0, 1]: the curves do not meet"
        )));
    }
    let d = 4.0 - l * l;
    Ok((((1.0 - l * l) / d).sqrt(), (3.0 / d).sqrt()))
}

/// The same intersection found by bisection on
/// `cos²σ/4 + sin²σ/L² = 1`, with `cos λ = cos σ / 2`. The residual is
/// evaluated as `(1/L² − 1) − cos²σ (1/L² − 1/4)` so that it keeps full
/// relative accuracy where the curves become tangent at `L = 1`.
pub fn lambda_by_root_finding(l: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::NoSolution(format!(
            "L = {l} outside [0, 1]: the curves do not meet"
        )));
    }
    let sigma = if l == 0.0 {
        0.0
    } else {
        let inv = 1.0 / (l * l);
        let f = |s: f64| (inv - 1.0) - s.cos().powi(2) * (inv - 0.25);
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let c = sigma.cos() / 2.0;
    Ok((c, (1.0 - c * c).sqrt()))
}

/// The unit quaternion `p` with `p̄ β p = τ` for unit imaginary `β, τ`,
/// built from the axis-angle rotation taking `β` to `τ`.
pub fn align(beta: Quaternion, tau: Quaternion) -> Quaternion {
    let b = beta.im();
    let t = tau.im();
    let ax = [
        b[1] * t[2] - b[2] * t[1],
        b[2] * t[0] - b[0] * t[2],
        b[0] * t[1] - b[1] * t[0],
    ];
    let s = (ax[0] * ax[0] + ax[1] * ax[1] + ax[2] * ax[2]).sqrt();
    let c = b[0] * t[0] + b[1] * t[1] + b[2] * t[2];
    let r = if s < 1e-12 {
        if c > 0.0 {
            Quaternion::ONE
        } else {
            sp2::gamma1_for(beta.normalize())
        }
    } else {
        let ang = s.atan2(c);
        Quaternion::exp_unit_imag(Quaternion::from_im([ax[0] / s, ax[1] / s, ax[2] / s]), ang / 2.0)
    };
    r.conj()
}

/// A constructed zero plane `span{ζ, W}` at a point over `{L ≤ 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPlaneSpec {
    /// The point `(N₁p, N₂)` with `p` solving the alignment.
    pub point: Sp2Point,
    /// Branch angle with `ζ = x cos φ + y sin φ`.
    pub phi: f64,
    /// ζ in left coordinates.
    pub zeta: Vec10,
    /// `L(t, θ)` evaluated through `2 cos 2t |sin φ|`.
    pub gauge: f64,
    /// `(cos λ, sin λ)`.
    pub lambda: (f64, f64),
    /// Rotation angle `π − 2φ`.
    pub psi_angle: f64,
    /// `β = α cos λ + γ̈₁ sin λ`.
    pub beta: Quaternion,
    /// `δ`, the rotation of `β` about `α` by `π − 2φ`.
    pub delta: Quaternion,
    /// `W = (N₁βp, N₂δ)/ν²` in left coordinates.
    pub w: Vec10,
    /// Largest normalized `g_ν` inner product of `W` with the
    /// Gromoll-Meyer Killing fields.
    pub horizontality_residual: f64,
}

impl ZeroPlaneSpec {
    /// ζ as a tangent vector.
    pub fn zeta_vector(&self) -> TangentVector {
        TangentVector::from_left(&self.point, &self.zeta)
    }

    /// W as a tangent vector.
    pub fn w_vector(&self) -> TangentVector {
        TangentVector::from_left(&self.point, &self.w)
    }

    /// `w_h = 2 sin λ / ν²`.
    pub fn w_h(&self, nu: f64) -> f64 {
        psi::w_h(self.lambda.1, nu)
    }
}

/// The branch angle of ζ at `(t, θ)`; at poles `0` is used.
pub fn default_branch(t: f64, theta: f64) -> f64 {
    sp2::zeta_angle(t, theta).unwrap_or(0.0)
}

/// Builds the zero plane over `(t, θ)` with direction `α` and the free
/// unit `γ̈₁ ⊥ α`. `branch` overrides the angle of ζ (required at poles).
pub fn zero_plane_at(
    t: f64,
    theta: f64,
    alpha: Quaternion,
    gamma_dd: Quaternion,
    nu: f64,
    branch: Option<f64>,
) -> Result<ZeroPlaneSpec> {
    let phi = match branch {
        Some(p) => p,
        None => sp2::zeta_angle(t, theta)?,
    };
    let gauge = 2.0 * (2.0 * t).cos() * phi.sin().abs();
    let lambda = lambda_from_l(gauge)?;
    let psi_angle = PI - 2.0 * phi;
    let beta = alpha * lambda.0 + gamma_dd * lambda.1;
    let delta = Quaternion::rotate_about(alpha, psi_angle, beta);
    let sum = beta + delta;
    let a_comp = alpha * sum.dot(alpha);
    let tau = a_comp + (sum - a_comp) * (2.0 * t).cos();
    if tau.norm() < 1e-12 {
        return Err(Error::NoSolution("alignment target vanishes".into()));
    }
    let p = align(beta, tau.normalize());
    let point = sp2::representative_point(t, theta, alpha, p)?;
    let frame = sp2::frame_with_gamma(&point, &point.coords.unwrap(), sp2::gamma1_for(alpha))?;
    let zeta = frame.x().combine(phi.cos(), &frame.y(), phi.sin()).left_coords(&point);
    let w = kvec(conj_by(p, beta), delta) / (nu * nu);
    let horizontality = horizontality_residual(&lie::nu_gram(nu), &point.m, &w);
    Ok(ZeroPlaneSpec {
        point,
        phi,
        zeta,
        gauge,
        lambda,
        psi_angle,
        beta,
        delta,
        w,
        horizontality_residual: horizontality,
    })
}

/// The horizontal part, for the projection to `S⁴`, of a left-coordinate
/// vector.
fn base_horizontal(gram: &lie::Mat10, m: &crate::quat::QMatrix2, x: &Vec10) -> Vec10 {
    let p = crate::metric::projector(gram, &crate::metric::vertical_basis(m));
    x - p * x
}

/// `w_h` recovered from a metric as `g(W, K^h)/ψ²`, where `K^h` is the
/// part of the Killing field `(0, ϑ/2)` horizontal for the projection to
/// `S⁴` and `ϑ` is the direction of `δ` orthogonal to `α`. Returns
/// `(w_h, |H_w|)` with `H_w` the horizontal part of `W`.
pub fn w_h_at(spec: &ZeroPlaneSpec, gram: &lie::Mat10, psi_value: f64) -> Result<(f64, f64)> {
    if psi_value < 1e-10 {
        return Err(Error::Degenerate("w_h undefined where ψ vanishes".into()));
    }
    let c = spec.point.coords.unwrap();
    let u = spec.delta - c.alpha * spec.delta.dot(c.alpha);
    if u.norm() < 1e-12 {
        return Err(Error::Degenerate("δ has no component orthogonal to α".into()));
    }
    let k = kvec(Quaternion::ZERO, u.normalize() * 0.5);
    let kh = base_horizontal(gram, &spec.point.m, &k);
    let hw = base_horizontal(gram, &spec.point.m, &spec.w);
    let wh = (spec.w.transpose() * gram * kh)[0] / (psi_value * psi_value);
    Ok((wh, (hw.transpose() * gram * hw)[0].sqrt()))
}

/// One member of the family of vectors `W = (N₁βp, N₂δ)/ν²` with
/// `β = α cos μ + γ̈ sin μ` and `δ` the rotation of `β` about `α` by
/// `π − 2φ`. The plane `span{ζ_φ, W}` is flat for `g_{ν,l}`, and `W` is not
/// required to be horizontal.
pub fn w_family_member(point: &Sp2Point, phi: f64, mu: f64, chi: f64, nu: f64) -> Result<Vec10> {
    let c = point
        .coords
        .ok_or_else(|| Error::Domain("family needs representative coordinates".into()))?;
    let g1 = sp2::gamma1_for(c.alpha);
    let g2 = g1.conj() * c.alpha;
    let gdd = g1 * chi.cos() + g2 * chi.sin();
    let beta = c.alpha * mu.cos() + gdd * mu.sin();
    let delta = Quaternion::rotate_about(c.alpha, PI - 2.0 * phi, beta);
    Ok(kvec(conj_by(c.p, beta), delta) / (nu * nu))
}

/// Samples `n` members of the family at a point within `radius` of
/// `{L ≤ 1} ∪ {cos 2θ = 0}`. Each entry is `(μ, χ, W)`.
pub fn w_family_at(point: &Sp2Point, phi: f64, nu: f64, n: usize, radius: f64) -> Result<Vec<(f64, f64, Vec10)>> {
    let c = point
        .coords
        .ok_or_else(|| Error::Domain("family needs representative coordinates".into()))?;
    let near_gauge = zero_gauge(c.t, c.theta) <= 1.0 + radius;
    let near_equator = (2.0 * c.theta).cos().abs() <= radius;
    if !(near_gauge || near_equator) {
        return Err(Error::Domain(format!(
            "(t, θ) = ({}, {}) is not near the zero locus",
            c.t, c.theta
        )));
    }
    (0..n)
        .map(|i| {
            let mu = PI * (i as f64 + 0.5) / n as f64;
            let chi = 2.0 * PI * ((i * 7) % n.max(1)) as f64 / n.max(1) as f64;
            Ok((mu, chi, w_family_member(point, phi, mu, chi, nu)?))
        })
        .collect()
}

/// One sample of an integral curve of ζ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    /// The point.
    pub point: Sp2Point,
    /// Arclength parameter.
    pub s: f64,
    /// Base coordinate `t`.
    pub t: f64,
    /// Base coordinate `θ`.
    pub theta: f64,
    /// `ψ` from the closed form.
    pub psi: f64,
}

/// Samples of an integral curve of ζ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeridianPath {
    /// Samples in flow order.
    pub samples: Vec<FlowSample>,
}

fn zeta_ambient(m: &crate::quat::QMatrix2) -> Result<crate::quat::QMatrix2> {
    let q = Sp2Point { m: *m, coords: None };
    Ok(sp2::zeta_at(&q)?.ambient)
}

/// RK4 integration of ζ from `start` over arclength `length` in `n_steps`
/// steps, re-projecting onto `Sp(2)` after every stage.
pub fn meridian_flow(start: &Sp2Point, params: &PsiParams, length: f64, n_steps: usize) -> Result<MeridianPath> {
    let (t0, _) = sp2::base_coords(start);
    if t0 < 1e-9 {
        return Err(Error::Pole("start the flow away from t = 0".into()));
    }
    let ds = length / n_steps as f64;
    let mut m = start.m;
    let mut out = Vec::with_capacity(n_steps + 1);
    let record = |m: &crate::quat::QMatrix2, s: f64| {
        let (t, theta) = sp2::base_coords_of(m);
        FlowSample {
            point: Sp2Point { m: *m, coords: None },
            s,
            t,
            theta,
            psi: psi::psi(t, theta, params).psi,
        }
    };
    out.push(record(&m, 0.0));
    for step in 0..n_steps {
        let proj = |x: crate::quat::QMatrix2| sp2::project_to_sp2(&x).map(|p| p.m);
        let k1 = zeta_ambient(&m)?;
        let k2 = zeta_ambient(&proj(m + k1.scale(ds / 2.0))?)?;
        let k3 = zeta_ambient(&proj(m + k2.scale(ds / 2.0))?)?;
        let k4 = zeta_ambient(&proj(m + k3.scale(ds))?)?;
        let next = m + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(ds / 6.0);
        let projected = proj(next)?;
        let moved = (projected - next).norm();
        if moved > 1e-6 {
            return Err(Error::Degenerate(format!("re-projection moved the point by {moved:e}")));
        }
        m = projected;
        out.push(record(&m, ds * (step + 1) as f64));
    }
    Ok(MeridianPath { samples: out })
}

/// The arclength from `t` to `π/4` along the meridian `θ = 0`.
pub fn meridian_length(t: f64) -> f64 {
    FRAC_PI_4 - t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_endpoints() {
        let (c, s) = lambda_from_l(0.0).unwrap();
        assert!((c - 0.5).abs() < 1e-15 && (s - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let (c, s) = lambda_from_l(1.0).unwrap();
        assert!(c.abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
        assert!(lambda_from_l(1.01).is_err());
    }

    #[test]
    fn alignment_conjugates() {
        let b = Quaternion::imaginary(0.3, 0.4, -0.2).normalize();
        let t = Quaternion::imaginary(-0.5, 0.1, 0.8).normalize();
        let p = align(b, t);
        assert!((p.conj() * b * p - t).norm() < 1e-14);
    }
}
