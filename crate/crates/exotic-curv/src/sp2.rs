//! The manifold `Sp(2) ⊂ S⁷ × S⁷`: points, tangent vectors, group actions,
//! representative coordinates, the adapted frame and the distinguished
//! distributions.
//!
//! A point is a 2×2 quaternionic matrix with orthonormal columns. Tangent
//! vectors are stored as ambient matrices; numerical work converts them to
//! left coordinates with [`TangentVector::left_coords`].

use crate::error::{Error, Result};
use crate::lie::{self, kvec, LeftInvariant, Mat10, Vec10, K_DIM};
use crate::quat::{qh_inner, QMatrix2, Quaternion, H2};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

/// Below this value of `t` the vectors `v, ϑ₁, ϑ₂` of the two factors
/// become indistinguishable and only the coarse splitting is returned.
pub const FINE_SPLITTING_T_MIN: f64 = 1e-3;

/// Representative coordinates `(t, θ, α, p)` of a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCoords {
    /// Distance-like parameter in `[0, π/4]`.
    pub t: f64,
    /// Rotation angle in `[0, π)`.
    pub theta: f64,
    /// Unit imaginary quaternion.
    pub alpha: Quaternion,
    /// Unit quaternion.
    pub p: Quaternion,
}

/// A point of `Sp(2)` with optional cached representative coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sp2Point {
    /// The matrix `[a b; c d]` with orthonormal columns.
    pub m: QMatrix2,
    /// Representative coordinates, when known.
    pub coords: Option<PointCoords>,
}

/// A tangent vector stored by its ambient matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    /// Ambient components on the two `S⁷` factors, arranged as a matrix.
    pub ambient: QMatrix2,
}

impl TangentVector {
    /// Wraps an ambient matrix.
    pub fn new(ambient: QMatrix2) -> Self {
        TangentVector { ambient }
    }

    /// The vector at `q` with the given left coordinates.
    pub fn from_left(q: &Sp2Point, v: &Vec10) -> Self {
        TangentVector {
            ambient: lie::from_left_coords(&q.m, v),
        }
    }

    /// Left coordinates `M† X` of this vector at `q`.
    pub fn left_coords(&self, q: &Sp2Point) -> Vec10 {
        lie::left_coords(&q.m, &self.ambient)
    }

    /// Residual of the linearized orthonormality constraints at `q`.
    pub fn tangency_residual(&self, q: &Sp2Point) -> f64 {
        let xi = q.m.dagger() * self.ambient;
        let s = xi + xi.dagger();
        s.norm()
    }

    /// Linear combination `a self + b other`.
    pub fn combine(&self, a: f64, other: &TangentVector, b: f64) -> TangentVector {
        TangentVector {
            ambient: self.ambient.scale(a) + other.ambient.scale(b),
        }
    }
}

/// A point of the base `S⁴(½) ⊂ H ⊕ R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct S4Point {
    /// Quaternionic component `b̄ d`.
    pub q: Quaternion,
    /// Real component `(|b|² − |d|²)/2`.
    pub r: f64,
}

impl S4Point {
    /// Euclidean norm in `R⁵`.
    pub fn norm(&self) -> f64 {
        (self.q.norm_sq() + self.r * self.r).sqrt()
    }
}

/// The ten adapted frame vectors, in the order
/// `x, y, (η₁,η₁), (η₂,η₂), (v,0), (ϑ₁,0), (ϑ₂,0), (0,v), (0,ϑ₁), (0,ϑ₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameAtPoint {
    /// The frame vectors.
    pub vectors: [TangentVector; 10],
    /// The quaternion `γ₁ ⊥ α` used to build the frame.
    pub gamma1: Quaternion,
    /// The quaternion `γ₂ = γ̄₁ α`.
    pub gamma2: Quaternion,
}

impl FrameAtPoint {
    /// `x^{2,0}`.
    pub fn x(&self) -> TangentVector {
        self.vectors[0]
    }
    /// `y^{2,0}`.
    pub fn y(&self) -> TangentVector {
        self.vectors[1]
    }
}

/// The group actions on `Sp(2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    /// `A^u`: left multiplication of the first row.
    U,
    /// `A^d`: left multiplication of the second row.
    D,
    /// `A^{h₁}`: right multiplication of the first column by `q̄`.
    H1,
    /// `A^{h₂}`: right multiplication of the second column by `q̄`.
    H2,
    /// `A_{2,-1}`: `(qaq̄, qb; qcq̄, qd)`, whose quotient is the Gromoll-Meyer sphere.
    GromollMeyer,
    /// The diagonal of `A^u × A^d`: left multiplication of both rows.
    DiagUd,
}

impl Action {
    /// All six actions.
    pub const ALL: [Action; 6] = [
        Action::U,
        Action::D,
        Action::H1,
        Action::H2,
        Action::GromollMeyer,
        Action::DiagUd,
    ];

    /// Applies the action of `g` to an arbitrary matrix. The actions are
    /// linear in the matrix, so this also pushes tangent vectors forward.
    pub fn apply(self, g: Quaternion, m: &QMatrix2) -> QMatrix2 {
        let gb = g.conj();
        match self {
            Action::U => QMatrix2::new(g * m.a, g * m.b, m.c, m.d),
            Action::D => QMatrix2::new(m.a, m.b, g * m.c, g * m.d),
            Action::H1 => QMatrix2::new(m.a * gb, m.b, m.c * gb, m.d),
            Action::H2 => QMatrix2::new(m.a, m.b * gb, m.c, m.d * gb),
            Action::GromollMeyer => QMatrix2::new(g * m.a * gb, g * m.b, g * m.c * gb, g * m.d),
            Action::DiagUd => m.left_scalar(g),
        }
    }

    /// Left coordinates at `m` of the Killing field generated by the
    /// imaginary quaternion `u`.
    pub fn killing(self, m: &QMatrix2, u: Quaternion) -> Vec10 {
        let z = Quaternion::ZERO;
        let conj = |x: QMatrix2| lie::coords(&(m.dagger() * x * *m));
        match self {
            Action::U => conj(QMatrix2::diag(u, z)),
            Action::D => conj(QMatrix2::diag(z, u)),
            Action::H1 => -kvec(u, z),
            Action::H2 => -kvec(z, u),
            Action::GromollMeyer => conj(QMatrix2::diag(u, u)) - kvec(u, z),
            Action::DiagUd => conj(QMatrix2::diag(u, u)),
        }
    }

    /// Derivative of the left coordinates of [`Action::killing`] along the
    /// left-invariant direction `x`. Right actions give constant
    /// coordinates, so only the left-multiplication part contributes.
    pub fn killing_derivative(self, m: &QMatrix2, u: Quaternion, x: &Vec10) -> Vec10 {
        let z = Quaternion::ZERO;
        let left = match self {
            Action::U => QMatrix2::diag(u, z),
            Action::D => QMatrix2::diag(z, u),
            Action::H1 | Action::H2 => return Vec10::zeros(),
            Action::GromollMeyer | Action::DiagUd => QMatrix2::diag(u, u),
        };
        let full = m.dagger() * left * *m;
        lie::coords(&full.bracket(&lie::from_coords(x)))
    }

    /// The three Killing fields generated by `i, j, k`.
    pub fn killing_fields(self, m: &QMatrix2) -> [Vec10; 3] {
        [
            self.killing(m, Quaternion::I),
            self.killing(m, Quaternion::J),
            self.killing(m, Quaternion::K),
        ]
    }
}

/// Applies an action to a point; cached coordinates are dropped.
pub fn act(action: Action, g: Quaternion, q: &Sp2Point) -> Sp2Point {
    Sp2Point {
        m: action.apply(g, &q.m),
        coords: None,
    }
}

/// Pushes a tangent vector forward by an action.
pub fn act_vector(action: Action, g: Quaternion, x: &TangentVector) -> TangentVector {
    TangentVector {
        ambient: action.apply(g, &x.ambient),
    }
}

/// Residual of the column orthonormality constraints.
pub fn orthonormality_residual(m: &QMatrix2) -> f64 {
    let c1 = m.col1();
    let c2 = m.col2();
    let n1 = qh_inner(&c1, &c1).w - 1.0;
    let n2 = qh_inner(&c2, &c2).w - 1.0;
    let x = qh_inner(&c1, &c2).norm();
    n1.abs().max(n2.abs()).max(x)
}

fn rot_column(theta: f64, top: Quaternion, bottom: Quaternion) -> H2 {
    let (s, c) = theta.sin_cos();
    [top * c + bottom * s, top * (-s) + bottom * c]
}

fn col_right(col: H2, q: Quaternion) -> H2 {
    [col[0] * q, col[1] * q]
}

fn check_alpha(alpha: Quaternion) -> Result<()> {
    if alpha.w.abs() > 1e-10 || (alpha.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain("alpha must be a unit imaginary quaternion".into()));
    }
    Ok(())
}

/// The columns `N₁` and `N₂` of the representative point.
fn n_columns(t: f64, theta: f64, alpha: Quaternion) -> (H2, H2) {
    let (st, ct) = t.sin_cos();
    let n1 = rot_column(theta, Quaternion::ONE * ct, alpha * st);
    let n2 = rot_column(theta, alpha * st, Quaternion::ONE * ct);
    (n1, n2)
}

/// The representative point `(N₁p, N₂)`.
pub fn representative_point(t: f64, theta: f64, alpha: Quaternion, p: Quaternion) -> Result<Sp2Point> {
    if !(-1e-12..=FRAC_PI_4 + 1e-12).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, π/4]")));
    }
    if !(-1e-12..=std::f64::consts::PI + 1e-12).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, π]")));
    }
    check_alpha(alpha)?;
    if (p.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain("p must be a unit quaternion".into()));
    }
    let (n1, n2) = n_columns(t, theta, alpha);
    Ok(Sp2Point {
        m: QMatrix2::from_columns(col_right(n1, p), n2),
        coords: Some(PointCoords { t, theta, alpha, p }),
    })
}

/// Quaternionic Gram-Schmidt retraction of an ambient matrix onto `Sp(2)`.
pub fn project_to_sp2(m: &QMatrix2) -> Result<Sp2Point> {
    let c1 = m.col1();
    let n1 = qh_inner(&c1, &c1).w.sqrt();
    if n1 < 1e-6 {
        return Err(Error::Degenerate("first column nearly zero".into()));
    }
    let u = [c1[0] * (1.0 / n1), c1[1] * (1.0 / n1)];
    let c2 = m.col2();
    let h = qh_inner(&u, &c2);
    let w = [c2[0] - u[0] * h, c2[1] - u[1] * h];
    let n2 = qh_inner(&w, &w).w.sqrt();
    if n2 < 1e-6 {
        return Err(Error::Degenerate("second column nearly dependent".into()));
    }
    let w = [w[0] * (1.0 / n2), w[1] * (1.0 / n2)];
    Ok(Sp2Point {
        m: QMatrix2::from_columns(u, w),
        coords: None,
    })
}

/// The Gromoll-Meyer projection `(b̄d, (|b|² − |d|²)/2)` onto `S⁴(½)`.
pub fn gm_projection(q: &Sp2Point) -> S4Point {
    gm_of(&q.m)
}

pub(crate) fn gm_of(m: &QMatrix2) -> S4Point {
    S4Point {
        q: m.b.conj() * m.d,
        r: 0.5 * (m.b.norm_sq() - m.d.norm_sq()),
    }
}

/// The differential of the Gromoll-Meyer projection applied to an ambient
/// tangent vector, as a 5-vector `(quaternion, real)`.
pub(crate) fn gm_differential(m: &QMatrix2, x: &QMatrix2) -> [f64; 5] {
    let q = x.b.conj() * m.d + m.b.conj() * x.d;
    let r = m.b.dot(x.b) - m.d.dot(x.d);
    [q.w, q.x, q.y, q.z, r]
}

/// `(t, θ)` of the base point, valid everywhere.
pub fn base_coords(q: &Sp2Point) -> (f64, f64) {
    base_coords_of(&q.m)
}

pub(crate) fn base_coords_of(m: &QMatrix2) -> (f64, f64) {
    let y = gm_of(m);
    let rho = (y.q.w * y.q.w + y.r * y.r).sqrt();
    let im = y.q.im_part().norm();
    let t = 0.5 * (2.0 * im).atan2(2.0 * rho);
    let theta = if rho < 1e-300 {
        0.0
    } else {
        let th = 0.5 * y.q.w.atan2(-y.r);
        if th < 0.0 {
            th + std::f64::consts::FRAC_PI_2 * 2.0
        } else {
            th
        }
    };
    (t, theta)
}

/// Recovers `(t, θ, α, p)` so that the representative point lies in the
/// same `A_{2,-1}` orbit as `q`.
pub fn coords_from_point(q: &Sp2Point) -> Result<PointCoords> {
    let y = gm_projection(q);
    let (t, theta) = base_coords(q);
    let im = y.q.im_part();
    if 2.0 * im.norm() <= 1e-9 {
        return Err(Error::Pole(format!("alpha undefined at t = {t}")));
    }
    let alpha = (-im).normalize();
    let (n1, n2) = n_columns(t, theta, alpha);
    let g = (q.m.b * n2[0].conj() + q.m.d * n2[1].conj()).normalize();
    let gb = g.conj();
    let c1 = [gb * q.m.a * g, gb * q.m.c * g];
    let p = qh_inner(&n1, &c1).normalize();
    Ok(PointCoords { t, theta, alpha, p })
}

/// Fills the coordinate cache of a point.
pub fn with_coords(q: &Sp2Point) -> Result<Sp2Point> {
    if q.coords.is_some() {
        return Ok(*q);
    }
    Ok(Sp2Point {
        m: q.m,
        coords: Some(coords_from_point(q)?),
    })
}

/// A canonical unit imaginary quaternion orthogonal to `α`.
pub fn gamma1_for(alpha: Quaternion) -> Quaternion {
    let a = alpha.im();
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let k = (0..3)
        .min_by(|&i, &j| a[i].abs().partial_cmp(&a[j].abs()).unwrap())
        .unwrap();
    let e = axes[k];
    let c = [
        a[1] * e[2] - a[2] * e[1],
        a[2] * e[0] - a[0] * e[2],
        a[0] * e[1] - a[1] * e[0],
    ];
    Quaternion::from_im(c).normalize()
}

fn frame_at_rep(c: &PointCoords, gamma1: Quaternion) -> [QMatrix2; 10] {
    let (t, theta, al, p) = (c.t, c.theta, c.alpha, c.p);
    let g1 = gamma1;
    let g2 = g1.conj() * al;
    let (n1, n2) = n_columns(t, theta, al);
    let (st, ct) = t.sin_cos();
    let nh1 = rot_column(theta, Quaternion::ONE * (-st), al * ct);
    let nh2 = rot_column(theta, al * ct, Quaternion::ONE * (-st));
    let z = [Quaternion::ZERO; 2];
    let m = |a: H2, b: H2| QMatrix2::from_columns(a, b);
    [
        m(col_right(nh1, p), nh2),
        m(col_right(nh1, al.conj() * p), col_right(nh2, al)),
        m(col_right(nh1, g1 * p), col_right(nh2, g1)),
        m(col_right(nh1, g2 * p), col_right(nh2, g2)),
        m(col_right(n1, al * p), z),
        m(col_right(n1, g1 * p), z),
        m(col_right(n1, g2 * p), z),
        m(z, col_right(n2, al)),
        m(z, col_right(n2, g1)),
        m(z, col_right(n2, g2)),
    ]
}

/// The element `g` with `q = A_{2,-1}(g, representative_point(coords))`.
fn gm_offset(q: &Sp2Point, c: &PointCoords) -> Quaternion {
    let (_, n2) = n_columns(c.t, c.theta, c.alpha);
    (q.m.b * n2[0].conj() + q.m.d * n2[1].conj()).normalize()
}

/// The adapted frame at `q`, built with the canonical `γ₁`.
pub fn frame_at(q: &Sp2Point) -> Result<FrameAtPoint> {
    let c = match q.coords {
        Some(c) => c,
        None => coords_from_point(q)?,
    };
    frame_with_gamma(q, &c, gamma1_for(c.alpha))
}

/// The adapted frame at `q` for a chosen unit imaginary `γ₁ ⊥ α`.
pub fn frame_with_gamma(q: &Sp2Point, c: &PointCoords, gamma1: Quaternion) -> Result<FrameAtPoint> {
    check_alpha(c.alpha)?;
    if gamma1.dot(c.alpha).abs() > 1e-10 || (gamma1.norm() - 1.0).abs() > 1e-10 || gamma1.w.abs() > 1e-10 {
        return Err(Error::Domain(
            "gamma1 must be unit imaginary and orthogonal to alpha".into(),
        ));
    }
    let g = gm_offset(q, c);
    let raw = frame_at_rep(c, gamma1);
    let mut vectors = [TangentVector::new(QMatrix2::ZERO); 10];
    for (v, r) in vectors.iter_mut().zip(raw.iter()) {
        *v = TangentVector::new(Action::GromollMeyer.apply(g, r));
    }
    Ok(FrameAtPoint {
        vectors,
        gamma1,
        gamma2: gamma1.conj() * c.alpha,
    })
}

/// The angle `φ` with `ζ = x cos φ + y sin φ`, away from the poles.
pub fn zeta_angle(t: f64, theta: f64) -> Result<f64> {
    let s2t = (2.0 * t).sin();
    let (s2th, c2th) = (2.0 * theta).sin_cos();
    let delta = s2t * s2t * c2th * c2th + s2th * s2th;
    if delta <= 1e-16 {
        return Err(Error::Pole(format!("zeta undefined at (t, theta) = ({t}, {theta})")));
    }
    Ok((-s2th).atan2(s2t * c2th))
}

/// `ζ = (sin2t cos2θ x − sin2θ y)/√(sin²2t cos²2θ + sin²2θ)`.
pub fn zeta_at(q: &Sp2Point) -> Result<TangentVector> {
    let q = with_coords(q)?;
    let c = q.coords.unwrap();
    let phi = zeta_angle(c.t, c.theta)?;
    zeta_with_branch(&q, phi)
}

/// `ζ_φ = x cos φ + y sin φ` for an explicit branch angle.
pub fn zeta_with_branch(q: &Sp2Point, phi: f64) -> Result<TangentVector> {
    let f = frame_at(q)?;
    Ok(f.x().combine(phi.cos(), &f.y(), phi.sin()))
}

/// The unit vector `ξ = −x sin φ + y cos φ` complementary to `ζ`.
pub fn xi_at(q: &Sp2Point) -> Result<TangentVector> {
    let q = with_coords(q)?;
    let c = q.coords.unwrap();
    let phi = zeta_angle(c.t, c.theta)?;
    let f = frame_at(&q)?;
    Ok(f.x().combine(-phi.sin(), &f.y(), phi.cos()))
}

/// Lie bracket of the left-invariant extensions of `X` and `Y`.
pub fn lie_bracket_at(q: &Sp2Point, x: &TangentVector, y: &TangentVector) -> TangentVector {
    let b = lie::bracket(&x.left_coords(q), &y.left_coords(q));
    TangentVector::from_left(q, &b)
}

/// The distance `r` from the pole on the base, `atan2(|b|, |d|)`.
pub fn base_distance(m: &QMatrix2) -> f64 {
    m.b.norm().atan2(m.d.norm())
}

/// The differential of [`base_distance`] in left coordinates.
pub fn base_distance_differential(m: &QMatrix2) -> Vec10 {
    let nb = m.b.norm();
    let nd = m.d.norm();
    let mut out = Vec10::zeros();
    for (i, e) in lie::BASIS.iter().enumerate() {
        let x = *m * *e;
        out[i] = nd * m.b.dot(x.b) / nb - nb * m.d.dot(x.d) / nd;
    }
    out
}

/// The unit gradient of the base distance with respect to `gram`, in left
/// coordinates. This is the intrinsic form of ζ.
pub fn zeta_field(m: &QMatrix2, gram: &Mat10) -> Result<Vec10> {
    let nb = m.b.norm();
    let nd = m.d.norm();
    if nb < 1e-12 || nd < 1e-12 {
        return Err(Error::Pole("distance gradient undefined at the poles".into()));
    }
    let dr = base_distance_differential(m);
    let g = gram
        .cholesky()
        .ok_or_else(|| Error::IllConditioned("metric not positive definite".into()))?
        .solve(&dr);
    let n = (g.transpose() * gram * g)[0].sqrt();
    Ok(g / n)
}

/// Symmetric eigen-split of a form into a nullspace of the requested
/// dimension and its complement, certifying the spectral gap.
pub(crate) fn split_nullspace(q: &DMatrix<f64>, dim: usize, label: &str) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = q.nrows();
    let eig = SymmetricEigen::new(q.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let small = eig.eigenvalues[idx[dim - 1]].abs();
    let next = eig.eigenvalues[idx[dim]].abs();
    if small > 1e-8 * max.max(1e-300) || next < 10.0 * small.max(1e-8 * max) {
        return Err(Error::NullspaceGap(format!(
            "{label}: eigenvalue {small:e} vs next {next:e} (max {max:e})"
        )));
    }
    let null = DMatrix::from_fn(n, dim, |r, c| eig.eigenvectors[(r, idx[c])]);
    let rest = DMatrix::from_fn(n, n - dim, |r, c| eig.eigenvectors[(r, idx[dim + c])]);
    Ok((null, rest))
}

/// The 3-dimensional distribution `Z ⊂ V₁ ⊕ V₂` on which `U ↦ curv_ν(ζ, U)`
/// vanishes, returned as a Euclidean-orthonormal 6×3 basis of k-coordinates
/// together with its 6×3 complement.
pub fn z_split(m: &QMatrix2, nu: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let g = lie::nu_gram(nu);
    let zeta = zeta_field(m, &g)?;
    let li = LeftInvariant::new(g);
    let q = li.curvature_form(&zeta, K_DIM);
    split_nullspace(&q, 3, "Z")
}

/// The imaginary unit `u` spanning `Δ(α)`: the direction in which
/// `M† u M` is diagonal.
pub fn delta_alpha_generator(m: &QMatrix2) -> Quaternion {
    let c1 = m.col1();
    let c2 = m.col2();
    let mut a = nalgebra::SMatrix::<f64, 4, 3>::zeros();
    for (k, u) in [Quaternion::I, Quaternion::J, Quaternion::K].iter().enumerate() {
        let v = c1[0].conj() * *u * c2[0] + c1[1].conj() * *u * c2[1];
        for (r, x) in v.to_array().iter().enumerate() {
            a[(r, k)] = *x;
        }
    }
    let ata = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(ata);
    let mut k = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
    }
    let v = eig.eigenvectors.column(k);
    Quaternion::imaginary(v[0], v[1], v[2])
}

/// Left coordinates of the unit (Euclidean) generator of `Δ(α)`.
pub fn delta_alpha(m: &QMatrix2) -> Vec10 {
    let u = delta_alpha_generator(m);
    lie::coords(&(m.dagger() * QMatrix2::diag(u, u) * *m))
}

/// Orthonormal bases of the distinguished distributions at a point, with
/// respect to a given metric.
#[derive(Clone, Debug)]
pub struct DistributionSet {
    /// `V₁`: right multiplication of the first column.
    pub v1: Vec<Vec10>,
    /// `V₂`: right multiplication of the second column.
    pub v2: Vec<Vec10>,
    /// `H`: the complement of `V₁ ⊕ V₂`.
    pub h: Vec<Vec10>,
    /// The fine splitting, absent when `t < 1e-3`.
    pub fine: Option<FineSplitting>,
}

/// The part of [`DistributionSet`] that degenerates at `t = 0`.
#[derive(Clone, Debug)]
pub struct FineSplitting {
    /// `Δ(α)`.
    pub delta_alpha: Vec<Vec10>,
    /// `V_{2,-1}`: horizontal vectors of `q_{2,-1}` inside `V₁ ⊕ V₂`.
    pub v_gm: Vec<Vec10>,
    /// `H_{2,-1}`: span of `x, y, η₁^{2,0}, η₂^{2,0}`.
    pub h_gm: Vec<Vec10>,
    /// `Z`.
    pub z: Vec<Vec10>,
    /// `Z^⊥` inside `V₁ ⊕ V₂`.
    pub z_perp: Vec<Vec10>,
    /// Nullspace of `U ↦ ¼|[ζ, U]|²_b` on the full tangent space.
    pub zv: Vec<Vec10>,
}

/// Gram-Schmidt with respect to `gram`, dropping dependent vectors.
pub fn orthonormalize(vs: &[Vec10], gram: &Mat10) -> Vec<Vec10> {
    let mut out: Vec<Vec10> = Vec::new();
    for v in vs {
        let mut w = *v;
        for _ in 0..2 {
            for e in &out {
                let c = (e.transpose() * gram * w)[0];
                w -= e * c;
            }
        }
        let n2 = (w.transpose() * gram * w)[0];
        let scale = (v.transpose() * gram * v)[0].max(1e-300);
        if n2 > 1e-20 * scale {
            out.push(w / n2.sqrt());
        }
    }
    out
}

/// Basis of the `gram`-orthogonal complement of `span(vs)` in `R¹⁰`.
pub fn orthogonal_complement(vs: &[Vec10], gram: &Mat10) -> Vec<Vec10> {
    let mut all: Vec<Vec10> = orthonormalize(vs, gram);
    let k = all.len();
    for i in 0..10 {
        let mut e = Vec10::zeros();
        e[i] = 1.0;
        let before = all.len();
        let mut w = e;
        for _ in 0..2 {
            for b in &all {
                let c = (b.transpose() * gram * w)[0];
                w -= b * c;
            }
        }
        let n2 = (w.transpose() * gram * w)[0];
        if n2 > 1e-12 * gram[(i, i)] {
            all.push(w / n2.sqrt());
        }
        debug_assert!(all.len() <= before + 1);
    }
    all.split_off(k)
}

/// Computes the distinguished distributions at `q`, orthonormal for
/// `gram`. `nu` enters `Z` (computed for `g_ν`) and the `η^{2,0}` vectors.
pub fn distributions_at(q: &Sp2Point, gram: &Mat10, nu: f64) -> Result<DistributionSet> {
    let e = |i: usize| {
        let mut v = Vec10::zeros();
        v[i] = 1.0;
        v
    };
    let v1 = orthonormalize(&[e(0), e(1), e(2)], gram);
    let v2 = orthonormalize(&[e(3), e(4), e(5)], gram);
    let h = orthonormalize(&[e(6), e(7), e(8), e(9)], gram);
    let (t, _) = base_coords(q);
    if t < FINE_SPLITTING_T_MIN {
        return Ok(DistributionSet { v1, v2, h, fine: None });
    }
    if t > FRAC_PI_4 - 1e-3 {
        return Err(Error::Domain("the fine splitting is singular at t = π/4".into()));
    }
    let q = with_coords(q)?;
    let c = q.coords.unwrap();
    let m = q.m;
    let delta = orthonormalize(&[delta_alpha(&m)], gram);

    let kappas = Action::GromollMeyer.killing_fields(&m);
    let mut cons = DMatrix::zeros(3, K_DIM);
    for (r, kap) in kappas.iter().enumerate() {
        let gk = gram * kap;
        for j in 0..K_DIM {
            cons[(r, j)] = gk[j];
        }
    }
    let ctc = cons.transpose() * &cons;
    let (null, _) = split_nullspace(&ctc, 3, "V_{2,-1}")?;
    let v_raw: Vec<Vec10> = (0..3)
        .map(|k| {
            let mut v = Vec10::zeros();
            for j in 0..K_DIM {
                v[j] = null[(j, k)];
            }
            v
        })
        .collect();
    let v_gm = orthonormalize(&v_raw, gram);

    let f = frame_at(&q)?;
    let lc = |i: usize| f.vectors[i].left_coords(&q);
    let tan = (2.0 * c.t).tan() / (nu * nu);
    let h_raw = [lc(0), lc(1), lc(2) + lc(8) * tan, lc(3) + lc(9) * tan];
    let h_gm = orthonormalize(&h_raw, gram);

    let (zn, _) = z_split(&m, nu)?;
    let z_raw: Vec<Vec10> = (0..3)
        .map(|k| {
            let mut v = Vec10::zeros();
            for j in 0..K_DIM {
                v[j] = zn[(j, k)];
            }
            v
        })
        .collect();
    let z = orthonormalize(&z_raw, gram);
    let kbasis: Vec<Vec10> = (0..K_DIM).map(e).collect();
    let mut zk = z.clone();
    zk.extend(kbasis);
    let z_perp = orthonormalize(&zk, gram).split_off(3);

    let zeta = zeta_at(&q)?.left_coords(&q);
    let adz = lie::ad(&zeta);
    let b = lie::biinvariant_gram();
    let form = adz.transpose() * b * adz * 0.25;
    let formd = DMatrix::from_fn(10, 10, |r, c| form[(r, c)]);
    let eig = SymmetricEigen::new(formd);
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zv_raw: Vec<Vec10> = (0..10)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-8 * max)
        .map(|i| Vec10::from_fn(|r, _| eig.eigenvectors[(r, i)]))
        .collect();
    let zv = orthonormalize(&zv_raw, gram);

    Ok(DistributionSet {
        v1,
        v2,
        h,
        fine: Some(FineSplitting {
            delta_alpha: delta,
            v_gm,
            h_gm,
            z,
            z_perp,
            zv,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representative_is_on_manifold() {
        let q = representative_point(0.3, 0.7, Quaternion::J, Quaternion::new(0.5, 0.5, 0.5, 0.5)).unwrap();
        assert!(orthonormality_residual(&q.m) < 1e-14);
    }

    #[test]
    fn gamma1_is_orthogonal() {
        let a = Quaternion::imaginary(0.3, -0.4, 0.866).normalize();
        let g = gamma1_for(a);
        assert!(g.dot(a).abs() < 1e-15);
        assert!((g.norm() - 1.0).abs() < 1e-15);
    }
}
