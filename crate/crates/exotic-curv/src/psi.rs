//! Closed-form scalar functions of the base coordinates `(t, θ)`: the
//! orbit-radius function `ψ` with its first and second partials, the norms
//! `|x^{2,0}|²` and `|(cos 2t) η^{2,0}|²` for `g_{ν,l}`, and the zero-locus
//! gauge `L(t, θ)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The two Cheeger scales entering `ψ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiParams {
    /// Scale of the `h₁ ⊕ h₂` deformation.
    pub nu: f64,
    /// Scale of the `U ⊕ D` deformation; `f64::INFINITY` disables it.
    pub l: f64,
}

impl PsiParams {
    /// Validates `0 < ν < 1` and `l > 0`.
    pub fn new(nu: f64, l: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::Domain(format!("nu = {nu} outside (0, 1)")));
        }
        if !(l > 0.0) {
            return Err(Error::Domain(format!("l = {l} must be positive")));
        }
        Ok(PsiParams { nu, l })
    }

    /// `1/(2l²)`, zero when `l` is infinite.
    pub fn inv_two_l_sq(&self) -> f64 {
        0.5 / (self.l * self.l)
    }

    /// `1/ν_l² = 1/ν² + 1/(2l²)`.
    pub fn inv_nu_l_sq(&self) -> f64 {
        1.0 / (self.nu * self.nu) + self.inv_two_l_sq()
    }

    /// `ν_l`.
    pub fn nu_l(&self) -> f64 {
        self.inv_nu_l_sq().sqrt().recip()
    }
}

/// `ψ` and its partial derivatives at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    /// `ψ`.
    pub psi: f64,
    /// `∂ψ/∂t`.
    pub psi_t: f64,
    /// `∂ψ/∂θ`.
    pub psi_theta: f64,
    /// `∂²ψ/∂t²`.
    pub psi_tt: f64,
    /// `∂²ψ/∂t∂θ`.
    pub psi_t_theta: f64,
    /// `∂²ψ/∂θ²`.
    pub psi_theta_theta: f64,
}

impl PsiValue {
    /// The six values in declaration order.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.psi,
            self.psi_t,
            self.psi_theta,
            self.psi_tt,
            self.psi_t_theta,
            self.psi_theta_theta,
        ]
    }
}

/// `|x^{2,0}|²_{ν,l} = 1 + sin²2θ/(2l²)`.
pub fn x_norm_sq(theta: f64, params: &PsiParams) -> f64 {
    1.0 + (2.0 * theta).sin().powi(2) * params.inv_two_l_sq()
}

/// `|(cos 2t) η^{2,0}|²_{ν,l} = cos²2t + sin²2t/ν² + (1 − cos²2t cos²2θ)/(2l²)`.
pub fn eta_norm_sq(t: f64, theta: f64, params: &PsiParams) -> f64 {
    let c = (2.0 * t).cos();
    let s = (2.0 * t).sin();
    let c2 = (2.0 * theta).cos();
    c * c + s * s / (params.nu * params.nu) + (1.0 - c * c * c2 * c2) * params.inv_two_l_sq()
}

/// The grouped form `|x^{2,0}|² cos²2t + sin²2t/ν_l²` of [`eta_norm_sq`].
pub fn eta_norm_sq_grouped(t: f64, theta: f64, params: &PsiParams) -> f64 {
    let c = (2.0 * t).cos();
    let s = (2.0 * t).sin();
    x_norm_sq(theta, params) * c * c + s * s * params.inv_nu_l_sq()
}

/// `ψ` and all first and second partials from the closed forms.
pub fn psi(t: f64, theta: f64, params: &PsiParams) -> PsiValue {
    let c = (2.0 * t).cos();
    let s = (2.0 * t).sin();
    let x = x_norm_sq(theta, params);
    let inl = params.inv_nu_l_sq();
    let il2 = 2.0 * params.inv_two_l_sq();
    let e = eta_norm_sq_grouped(t, theta, params);
    let e_half = e.sqrt();
    let e32 = e * e_half;
    let e52 = e32 * e;
    let s4 = (4.0 * theta).sin();
    let c4 = (4.0 * theta).cos();
    PsiValue {
        psi: 0.5 * s / e_half,
        psi_t: x * c / e32,
        psi_theta: -0.25 * il2 * s * c * c * s4 / e32,
        psi_tt: -x * s / e52 * (-4.0 * x * c * c + 2.0 * inl + 4.0 * inl * c * c),
        psi_t_theta: c * s4 * il2 / e52 * (-0.5 * x * c * c + s * s * inl),
        psi_theta_theta: -s * c * c * il2 * c4 / e32 + 0.375 * il2 * il2 * s * c.powi(4) * s4 * s4 / e52,
    }
}

/// The expanded form of `∂²ψ/∂t²` before regrouping the constants; agrees
/// with [`psi`]'s value identically.
pub fn psi_tt_expanded(t: f64, theta: f64, params: &PsiParams) -> f64 {
    let c = (2.0 * t).cos();
    let s = (2.0 * t).sin();
    let x = x_norm_sq(theta, params);
    let inl = params.inv_nu_l_sq();
    let e = eta_norm_sq_grouped(t, theta, params);
    let e_t = 4.0 * s * c * (inl - x);
    -2.0 * x * s / e.powf(1.5) - 1.5 * x * c * e_t / e.powf(2.5)
}

/// `ψ²` evaluated from the coordinates `(y₀, y_r, |Im y|)` of the base
/// point `y ∈ S⁴(½)`. This form is smooth on all of `Sp(2)`.
pub fn psi_sq_from_base(y0: f64, yr: f64, im: f64, params: &PsiParams) -> f64 {
    let e = 4.0 * (y0 * y0 + yr * yr) + 4.0 * y0 * y0 * params.inv_two_l_sq() + 4.0 * im * im * params.inv_nu_l_sq();
    im * im / e
}

/// The zero-locus gauge
/// `L = 2 cos2t |sin2θ| / √(sin²2θ + sin²2t cos²2θ)`, set to 0 at the poles.
pub fn zero_gauge(t: f64, theta: f64) -> f64 {
    let s2 = (2.0 * theta).sin();
    let c2 = (2.0 * theta).cos();
    let st = (2.0 * t).sin();
    let d = s2 * s2 + st * st * c2 * c2;
    if d <= 1e-300 {
        return 0.0;
    }
    2.0 * (2.0 * t).cos() * s2.abs() / d.sqrt()
}

/// Rates `a = dt/ds`, `b = dθ/ds` along ζ and their partials in `t`, `θ`.
#[derive(Clone, Copy, Debug)]
struct ZetaRates {
    a: f64,
    b: f64,
    a_t: f64,
    a_th: f64,
    b_t: f64,
    b_th: f64,
}

fn zeta_rates(t: f64, theta: f64) -> Result<ZetaRates> {
    let st = (2.0 * t).sin();
    let ct = (2.0 * t).cos();
    let s2 = (2.0 * theta).sin();
    let c2 = (2.0 * theta).cos();
    let d = st * st * c2 * c2 + s2 * s2;
    if d <= 1e-16 {
        return Err(Error::Pole(format!("zeta undefined at (t, theta) = ({t}, {theta})")));
    }
    if ct.abs() < 1e-12 {
        return Err(Error::Domain("zeta rates singular at t = π/4".into()));
    }
    let rd = d.sqrt();
    let d32 = d * rd;
    let d_t = 4.0 * st * ct * c2 * c2;
    let d_th = 4.0 * s2 * c2 * ct * ct;
    let a = st * c2 / rd;
    let b = s2 / (ct * rd);
    Ok(ZetaRates {
        a,
        b,
        a_t: 2.0 * ct * c2 / rd - 0.5 * st * c2 * d_t / d32,
        a_th: -2.0 * st * s2 / rd - 0.5 * st * c2 * d_th / d32,
        b_t: s2 * (2.0 * st / (ct * ct * rd) - 0.5 * d_t / (ct * d32)),
        b_th: 2.0 * c2 / (ct * rd) - 0.5 * s2 * d_th / (ct * d32),
    })
}

/// `(D_ζψ, D_ζD_ζψ)` from the closed-form partials and the chain rule.
///
/// Along ζ the base coordinates move at rates `dt/ds = cos φ` and
/// `dθ/ds = −sin φ / cos 2t`.
pub fn directional_psi(t: f64, theta: f64, params: &PsiParams) -> Result<(f64, f64)> {
    let r = zeta_rates(t, theta)?;
    let v = psi(t, theta, params);
    let d1 = r.a * v.psi_t + r.b * v.psi_theta;
    let d2 = r.a * r.a * v.psi_tt
        + 2.0 * r.a * r.b * v.psi_t_theta
        + r.b * r.b * v.psi_theta_theta
        + (r.a * r.a_t + r.b * r.a_th) * v.psi_t
        + (r.a * r.b_t + r.b * r.b_th) * v.psi_theta;
    Ok((d1, d2))
}

/// `(D_ζψ, D_ζD_ζψ)` on the meridian `θ = 0` including the pole `t = 0`,
/// where ζ moves `t` at unit rate.
pub fn meridian_psi(t: f64, params: &PsiParams) -> (f64, f64) {
    let v = psi(t, 0.0, params);
    (v.psi_t, v.psi_tt)
}

/// `w_h = 2 sin λ / ν²`, the multiple relating the horizontal part of a
/// zero-plane vector to the Killing field `(0, ϑ/2)`.
pub fn w_h(sin_lambda: f64, nu: f64) -> f64 {
    2.0 * sin_lambda / (nu * nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groupings_agree() {
        let p = PsiParams::new(0.3, 0.7).unwrap();
        for i in 0..20 {
            let t = 0.01 + 0.037 * i as f64;
            let th = 0.11 * i as f64;
            let a = eta_norm_sq(t, th, &p);
            let b = eta_norm_sq_grouped(t, th, &p);
            assert!((a - b).abs() < 1e-13 * a);
            let tt = psi(t, th, &p).psi_tt;
            let te = psi_tt_expanded(t, th, &p);
            assert!((tt - te).abs() < 1e-10 * tt.abs().max(1.0), "{tt} {te}");
        }
    }

    #[test]
    fn gauge_on_the_equator_family() {
        let t = std::f64::consts::PI / 6.0;
        assert!((zero_gauge(t, std::f64::consts::FRAC_PI_4) - 1.0).abs() < 1e-14);
        assert_eq!(zero_gauge(0.3, 0.0), 0.0);
    }
}
