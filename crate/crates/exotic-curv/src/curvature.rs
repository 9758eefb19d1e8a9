//! Numerical Riemann tensors of the stage metrics.
//!
//! The metric is sampled as a field of Gram matrices `g_{kn}(M)` in the
//! left-invariant frame `E₁ … E₁₀`. Derivatives along the frame are taken
//! with fourth-order central stencils on the curves `M exp(a E_i)` and
//! `M exp(a E_i) exp(b E_j)`. Christoffel symbols in this non-holonomic
//! frame carry structure-constant terms. Two step sizes are combined by
//! Richardson extrapolation and the result is projected onto the space of
//! algebraic curvature tensors.
//!
//! Sign convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z` and
//! `curv(X, Y) = R(X, Y, Y, X)`.

use crate::error::{Error, Result};
use crate::lie::{self, Mat10, Vec10};
use crate::metric::{gram_at, StageConfig};
use crate::quat::QMatrix2;
use crate::sp2::{Action, Sp2Point, TangentVector};
use serde::{Deserialize, Serialize};

const N: usize = 10;
const STENCIL: [(f64, f64); 4] = [
    (2.0, -1.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (-2.0, 1.0 / 12.0),
];

type T3 = Vec<f64>;
type T4 = Vec<f64>;

#[inline]
fn i3(a: usize, b: usize, c: usize) -> usize {
    (a * N + b) * N + c
}

#[inline]
fn i4(a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * N + b) * N + c) * N + d
}

/// The Riemann tensor, Christoffel symbols and Gram matrix at one point.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    /// Gram matrix at the point.
    pub gram: Mat10,
    gram_inv: Mat10,
    /// `Γ^m_{jk}` with `∇_{E_j} E_k = Γ^m_{jk} E_m`, stored at `[j][k][m]`.
    christoffel: T3,
    /// `R(E_i, E_j, E_k, E_l) = ⟨R(E_i,E_j)E_k, E_l⟩`.
    r: T4,
    /// Largest violation of the curvature-tensor symmetries before
    /// projection, relative to `scale`.
    pub symmetry_residual: f64,
    /// Largest absolute component.
    pub scale: f64,
    /// Step sizes used.
    pub steps: (f64, f64),
}

impl CurvatureTensor {
    /// Component `R(E_i, E_j, E_k, E_l)`.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.r[i4(i, j, k, l)]
    }

    /// `R(X, Y, Z, U)` for left-coordinate vectors.
    pub fn riemann(&self, x: &Vec10, y: &Vec10, z: &Vec10, u: &Vec10) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..N {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..N {
                    let xyz = xy * z[k];
                    if xyz == 0.0 {
                        continue;
                    }
                    let base = i4(i, j, k, 0);
                    let mut s = 0.0;
                    for l in 0..N {
                        s += self.r[base + l] * u[l];
                    }
                    acc += xyz * s;
                }
            }
        }
        acc
    }

    /// The vector `R(X, Y)Z` in left coordinates.
    pub fn riemann_vector(&self, x: &Vec10, y: &Vec10, z: &Vec10) -> Vec10 {
        let mut low = Vec10::zeros();
        for l in 0..N {
            let mut e = Vec10::zeros();
            e[l] = 1.0;
            low[l] = self.riemann(x, y, z, &e);
        }
        self.gram_inv * low
    }

    /// Inner product.
    pub fn inner(&self, x: &Vec10, y: &Vec10) -> f64 {
        (x.transpose() * self.gram * y)[0]
    }

    /// `g(X,X)g(Y,Y) − g(X,Y)²`.
    pub fn area_sq(&self, x: &Vec10, y: &Vec10) -> f64 {
        self.inner(x, x) * self.inner(y, y) - self.inner(x, y).powi(2)
    }

    /// Unnormalized curvature `R(X, Y, Y, X)`.
    pub fn curv(&self, x: &Vec10, y: &Vec10) -> f64 {
        self.riemann(x, y, y, x)
    }

    /// Sectional curvature of `span{X, Y}`.
    pub fn sectional(&self, x: &Vec10, y: &Vec10) -> Result<f64> {
        let a = self.area_sq(x, y);
        let scale = self.inner(x, x) * self.inner(y, y);
        if a <= 1e-14 * scale.max(1e-300) || a <= 0.0 {
            return Err(Error::Degenerate(format!("plane area² {a:e}")));
        }
        Ok(self.curv(x, y) / a)
    }

    /// `∇_X Y` for fields with constant left coordinates.
    pub fn nabla_const(&self, x: &Vec10, y: &Vec10) -> Vec10 {
        let mut out = Vec10::zeros();
        for j in 0..N {
            if x[j] == 0.0 {
                continue;
            }
            for k in 0..N {
                let w = x[j] * y[k];
                if w == 0.0 {
                    continue;
                }
                for m in 0..N {
                    out[m] += w * self.christoffel[i3(j, k, m)];
                }
            }
        }
        out
    }
}

/// Sampled metric field used by the engine.
pub trait MetricField: Sync {
    /// Gram matrix in left coordinates at `m`.
    fn gram(&self, m: &QMatrix2) -> Result<Mat10>;
}

impl MetricField for StageConfig {
    fn gram(&self, m: &QMatrix2) -> Result<Mat10> {
        gram_at(self, m)
    }
}

impl<F> MetricField for F
where
    F: Fn(&QMatrix2) -> Result<Mat10> + Sync,
{
    fn gram(&self, m: &QMatrix2) -> Result<Mat10> {
        self(m)
    }
}

struct RawTensor {
    r: T4,
    gup: T3,
}

fn to_arr(g: &Mat10) -> [f64; 100] {
    let mut a = [0.0; 100];
    for r in 0..N {
        for c in 0..N {
            a[r * N + c] = g[(r, c)];
        }
    }
    a
}

fn raw_tensor<F: MetricField + ?Sized>(field: &F, m: &QMatrix2, h: f64, g0: &Mat10, gi: &Mat10) -> Result<RawTensor> {
    let c = lie::structure_constants();
    let mut steps = vec![[QMatrix2::IDENTITY; 4]; N];
    for (i, b) in lie::BASIS.iter().enumerate() {
        for (s, (a, _)) in STENCIL.iter().enumerate() {
            steps[i][s] = b.scale(a * h).exp();
        }
    }
    let mut d1: T3 = vec![0.0; N * N * N];
    for i in 0..N {
        for (s, (_, w)) in STENCIL.iter().enumerate() {
            let g = to_arr(&field.gram(&(*m * steps[i][s]))?);
            for kn in 0..N * N {
                d1[i * N * N + kn] += w * g[kn] / h;
            }
        }
    }
    let mut d2: T4 = vec![0.0; N * N * N * N];
    for i in 0..N {
        for (si, (_, wi)) in STENCIL.iter().enumerate() {
            let mi = *m * steps[i][si];
            for j in 0..N {
                for (sj, (_, wj)) in STENCIL.iter().enumerate() {
                    let g = to_arr(&field.gram(&(mi * steps[j][sj]))?);
                    let w = wi * wj / (h * h);
                    let base = (i * N + j) * N * N;
                    for kn in 0..N * N {
                        d2[base + kn] += w * g[kn];
                    }
                }
            }
        }
    }
    let g = |a: usize, b: usize| g0[(a, b)];
    let mut gam: T3 = vec![0.0; N * N * N];
    for j in 0..N {
        for k in 0..N {
            for n in 0..N {
                let mut v = d1[i3(j, k, n)] + d1[i3(k, j, n)] - d1[i3(n, j, k)];
                for mm in 0..N {
                    v += c[j][k][mm] * g(mm, n) - c[j][n][mm] * g(mm, k) - c[k][n][mm] * g(mm, j);
                }
                gam[i3(j, k, n)] = 0.5 * v;
            }
        }
    }
    let mut gup: T3 = vec![0.0; N * N * N];
    for j in 0..N {
        for k in 0..N {
            for mm in 0..N {
                let mut v = 0.0;
                for n in 0..N {
                    v += gam[i3(j, k, n)] * gi[(mm, n)];
                }
                gup[i3(j, k, mm)] = v;
            }
        }
    }
    let mut dgi: T3 = vec![0.0; N * N * N];
    for i in 0..N {
        let dg = Mat10::from_fn(|b, cc| d1[i3(i, b, cc)]);
        let p = -(gi * dg * gi);
        for a in 0..N {
            for d in 0..N {
                dgi[i3(i, a, d)] = p[(a, d)];
            }
        }
    }
    // X_i Γ^m_{jk}
    let mut dgup: T4 = vec![0.0; N * N * N * N];
    let mut dg = [0.0; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for n in 0..N {
                    let mut v = d2[i4(i, j, k, n)] + d2[i4(i, k, j, n)] - d2[i4(i, n, j, k)];
                    for mm in 0..N {
                        v += c[j][k][mm] * d1[i3(i, mm, n)]
                            - c[j][n][mm] * d1[i3(i, mm, k)]
                            - c[k][n][mm] * d1[i3(i, mm, j)];
                    }
                    dg[n] = 0.5 * v;
                }
                for mm in 0..N {
                    let mut v = 0.0;
                    for n in 0..N {
                        v += dg[n] * gi[(mm, n)] + gam[i3(j, k, n)] * dgi[i3(i, mm, n)];
                    }
                    dgup[i4(i, j, k, mm)] = v;
                }
            }
        }
    }
    let mut rv: T4 = vec![0.0; N * N * N * N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for p in 0..N {
                    let mut v = dgup[i4(i, j, k, p)] - dgup[i4(j, i, k, p)];
                    for mm in 0..N {
                        v += gup[i3(j, k, mm)] * gup[i3(i, mm, p)]
                            - gup[i3(i, k, mm)] * gup[i3(j, mm, p)]
                            - c[i][j][mm] * gup[i3(mm, k, p)];
                    }
                    rv[i4(i, j, k, p)] = v;
                }
            }
        }
    }
    let mut r: T4 = vec![0.0; N * N * N * N];
    for ijk in 0..N * N * N {
        for l in 0..N {
            let mut v = 0.0;
            for mm in 0..N {
                v += rv[ijk * N + mm] * g(mm, l);
            }
            r[ijk * N + l] = v;
        }
    }
    Ok(RawTensor { r, gup })
}

/// Projects onto algebraic curvature tensors; returns the projection and
/// the largest change relative to the largest component.
fn symmetrize(r: &T4) -> (T4, f64) {
    let mut a = vec![0.0; r.len()];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    a[i4(i, j, k, l)] =
                        0.25 * (r[i4(i, j, k, l)] - r[i4(j, i, k, l)] - r[i4(i, j, l, k)] + r[i4(j, i, l, k)]);
                }
            }
        }
    }
    let mut b = vec![0.0; r.len()];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    b[i4(i, j, k, l)] = 0.5 * (a[i4(i, j, k, l)] + a[i4(k, l, i, j)]);
                }
            }
        }
    }
    let mut out = vec![0.0; r.len()];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let bianchi = (b[i4(i, j, k, l)] + b[i4(j, k, i, l)] + b[i4(k, i, j, l)]) / 3.0;
                    out[i4(i, j, k, l)] = b[i4(i, j, k, l)] - bianchi;
                }
            }
        }
    }
    let scale = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let change = r.iter().zip(out.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    (out, change / scale.max(1e-300))
}

/// Relative threshold on the pre-projection symmetry residual.
pub const SYMMETRY_TOLERANCE: f64 = 1e-4;

/// Curvature tensor of a metric field at `m` with base step `h`, combining
/// steps `h` and `h/2` by Richardson extrapolation.
pub fn curvature_tensor_with<F: MetricField + ?Sized>(field: &F, m: &QMatrix2, h: f64) -> Result<CurvatureTensor> {
    let g0 = field.gram(m)?;
    let gi = g0
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("metric not invertible".into()))?;
    let a = raw_tensor(field, m, h, &g0, &gi)?;
    let b = raw_tensor(field, m, h / 2.0, &g0, &gi)?;
    let r: T4 = a.r.iter().zip(b.r.iter()).map(|(x, y)| (16.0 * y - x) / 15.0).collect();
    let gup: T3 = a
        .gup
        .iter()
        .zip(b.gup.iter())
        .map(|(x, y)| (16.0 * y - x) / 15.0)
        .collect();
    let (r, residual) = symmetrize(&r);
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if residual > SYMMETRY_TOLERANCE {
        return Err(Error::FiniteDifference(format!(
            "symmetry residual {residual:e} at step {h:e} exceeds {SYMMETRY_TOLERANCE:e}"
        )));
    }
    Ok(CurvatureTensor {
        gram: g0,
        gram_inv: gi,
        christoffel: gup,
        r,
        symmetry_residual: residual,
        scale,
        steps: (h, h / 2.0),
    })
}

/// Curvature tensor of the configured stage at `q`.
pub fn curvature_tensor(cfg: &StageConfig, q: &Sp2Point) -> Result<CurvatureTensor> {
    cfg.check_curvature_domain(&q.m)?;
    curvature_tensor_with(cfg, &q.m, cfg.fd_step_at(&q.m))
}

/// `R(X, Y, Z, U)` for the configured stage.
pub fn riemann(
    cfg: &StageConfig,
    q: &Sp2Point,
    x: &TangentVector,
    y: &TangentVector,
    z: &TangentVector,
    u: &TangentVector,
) -> Result<f64> {
    let t = curvature_tensor(cfg, q)?;
    Ok(t.riemann(
        &x.left_coords(q),
        &y.left_coords(q),
        &z.left_coords(q),
        &u.left_coords(q),
    ))
}

/// A 2-plane at a point, given by a spanning pair in left coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    /// First spanning vector.
    pub x: Vec10,
    /// Second spanning vector.
    pub y: Vec10,
}

impl Plane {
    /// The plane spanned by two tangent vectors at `q`.
    pub fn from_vectors(q: &Sp2Point, x: &TangentVector, y: &TangentVector) -> Self {
        Plane {
            x: x.left_coords(q),
            y: y.left_coords(q),
        }
    }

    /// Gram matrix of the spanning pair.
    pub fn gram(&self, g: &Mat10) -> [[f64; 2]; 2] {
        let a = (self.x.transpose() * g * self.x)[0];
        let b = (self.x.transpose() * g * self.y)[0];
        let c = (self.y.transpose() * g * self.y)[0];
        [[a, b], [b, c]]
    }
}

/// Sectional curvature of a plane for the configured stage.
pub fn sectional(cfg: &StageConfig, q: &Sp2Point, plane: &Plane) -> Result<f64> {
    curvature_tensor(cfg, q)?.sectional(&plane.x, &plane.y)
}

/// The biinvariant closed form `¼|[X,Y]|²/area²` for `(½)b`.
pub fn biinvariant_sectional(x: &Vec10, y: &Vec10) -> f64 {
    let g = lie::biinvariant_gram();
    let br = lie::bracket(x, y);
    let inner = |a: &Vec10, b: &Vec10| (a.transpose() * g * b)[0];
    0.25 * inner(&br, &br) / (inner(x, x) * inner(y, y) - inner(x, y).powi(2))
}

/// Killing fields of the Gromoll-Meyer action at `m`.
fn gm_fields(m: &QMatrix2) -> [Vec10; 3] {
    Action::GromollMeyer.killing_fields(m)
}

/// `G`-orthogonal projection of `x` onto the horizontal space of the
/// Gromoll-Meyer submersion.
pub fn horizontal_part(g: &Mat10, m: &QMatrix2, x: &Vec10) -> Vec10 {
    let k = gm_fields(m);
    let gk = nalgebra::Matrix3::from_fn(|a, b| (k[a].transpose() * g * k[b])[0]);
    let rhs = nalgebra::Vector3::from_fn(|a, _| (k[a].transpose() * g * x)[0]);
    let c = gk.cholesky().expect("orbit directions independent").solve(&rhs);
    x - k[0] * c[0] - k[1] * c[1] - k[2] * c[2]
}

/// Largest `|g(X, κ_u)|/(|X||κ_u|)` over the Gromoll-Meyer Killing fields.
pub fn horizontality_residual(g: &Mat10, m: &QMatrix2, x: &Vec10) -> f64 {
    let nx = (x.transpose() * g * x)[0].sqrt();
    gm_fields(m)
        .iter()
        .map(|k| (k.transpose() * g * x)[0].abs() / (nx * (k.transpose() * g * k)[0].sqrt()))
        .fold(0.0, f64::max)
}

/// The O'Neill tensor `A_X Y` of the Gromoll-Meyer submersion at `m` for
/// horizontal `X, Y`, as a vertical vector in left coordinates.
///
/// Uses `g(A_X Y, κ) = −g(∇_X κ, Y)`, where `∇_X κ` is the derivative of the
/// Killing field along `X` plus the Christoffel term.
pub fn oneill_a(t: &CurvatureTensor, m: &QMatrix2, x: &Vec10, y: &Vec10) -> Vec10 {
    let us = [
        crate::quat::Quaternion::I,
        crate::quat::Quaternion::J,
        crate::quat::Quaternion::K,
    ];
    let k = gm_fields(m);
    let mut a = nalgebra::Vector3::zeros();
    for (idx, u) in us.iter().enumerate() {
        let full = m.dagger() * QMatrix2::diag(*u, *u) * *m;
        let dk = lie::coords(&full.bracket(&lie::from_coords(x)));
        let nk = dk + t.nabla_const(x, &k[idx]);
        a[idx] = -t.inner(&nk, y);
    }
    let gk = nalgebra::Matrix3::from_fn(|p, q| t.inner(&k[p], &k[q]));
    let c = gk.cholesky().expect("orbit directions independent").solve(&a);
    k[0] * c[0] + k[1] * c[1] + k[2] * c[2]
}

/// Sectional curvature on the Gromoll-Meyer sphere of the image of the
/// plane: both spanning vectors are first projected to the horizontal
/// space, then `sec + 3|A_X Y|²/area²` is returned together with the
/// upstairs value.
pub fn sigma7_sectional(t: &CurvatureTensor, m: &QMatrix2, plane: &Plane) -> Result<(f64, f64)> {
    let x = horizontal_part(&t.gram, m, &plane.x);
    let y = horizontal_part(&t.gram, m, &plane.y);
    let up = t.sectional(&x, &y)?;
    let a = oneill_a(t, m, &x, &y);
    let area = t.area_sq(&x, &y);
    Ok((up + 3.0 * t.inner(&a, &a) / area, up))
}

/// The projection `Sp(2) → S⁴` seen through a curvature tensor at one
/// point. Its fibers are the orbits of the diagonal left action together
/// with the `h₁` action, whose Killing fields span the vertical space.
pub struct BaseSubmersion<'a> {
    tensor: &'a CurvatureTensor,
    m: QMatrix2,
    fields: Vec<(Action, crate::quat::Quaternion, Vec10)>,
    vertical_gram: nalgebra::DMatrix<f64>,
    horizontal: Vec<Vec10>,
}

impl<'a> BaseSubmersion<'a> {
    /// Sets up the vertical fields and an orthonormal horizontal basis.
    pub fn new(tensor: &'a CurvatureTensor, m: &QMatrix2) -> Result<Self> {
        use crate::quat::Quaternion;
        let mut fields = Vec::with_capacity(6);
        for action in [Action::DiagUd, Action::H1] {
            for u in [Quaternion::I, Quaternion::J, Quaternion::K] {
                fields.push((action, u, action.killing(m, u)));
            }
        }
        let vertical_gram = nalgebra::DMatrix::from_fn(6, 6, |a, b| tensor.inner(&fields[a].2, &fields[b].2));
        if vertical_gram.clone().cholesky().is_none() {
            return Err(Error::IllConditioned("vertical fields dependent".into()));
        }
        let vs: Vec<Vec10> = fields.iter().map(|f| f.2).collect();
        let horizontal = crate::sp2::orthogonal_complement(&vs, &tensor.gram);
        if horizontal.len() != 4 {
            return Err(Error::IllConditioned(format!(
                "horizontal space of dimension {}",
                horizontal.len()
            )));
        }
        Ok(BaseSubmersion {
            tensor,
            m: *m,
            fields,
            vertical_gram,
            horizontal,
        })
    }

    /// The underlying tensor.
    pub fn tensor(&self) -> &CurvatureTensor {
        self.tensor
    }

    /// An orthonormal basis of the horizontal space.
    pub fn horizontal_basis(&self) -> &[Vec10] {
        &self.horizontal
    }

    /// Combination of the vertical fields with the given inner products.
    fn vertical_from_inner(&self, rhs: nalgebra::DVector<f64>) -> Vec10 {
        let c = self
            .vertical_gram
            .clone()
            .cholesky()
            .expect("checked in new")
            .solve(&rhs);
        self.fields
            .iter()
            .enumerate()
            .fold(Vec10::zeros(), |acc, (k, f)| acc + f.2 * c[k])
    }

    /// Vertical part of `x`.
    pub fn vertical(&self, x: &Vec10) -> Vec10 {
        let rhs = nalgebra::DVector::from_fn(6, |k, _| self.tensor.inner(&self.fields[k].2, x));
        self.vertical_from_inner(rhs)
    }

    /// Horizontal part of `x`.
    pub fn horizontal(&self, x: &Vec10) -> Vec10 {
        x - self.vertical(x)
    }

    /// `A_X Y` for horizontal `X, Y`, from `g(A_X Y, K) = −g(Y, ∇_X K)`.
    pub fn a_horizontal(&self, x: &Vec10, y: &Vec10) -> Vec10 {
        let rhs = nalgebra::DVector::from_fn(6, |k, _| {
            let (action, u, field) = self.fields[k];
            let nk = action.killing_derivative(&self.m, u, x) + self.tensor.nabla_const(x, &field);
            -self.tensor.inner(&nk, y)
        });
        self.vertical_from_inner(rhs)
    }

    /// `A_X V` for horizontal `X` and vertical `V`, a horizontal vector.
    pub fn a_vertical(&self, x: &Vec10, v: &Vec10) -> Vec10 {
        self.horizontal.iter().fold(Vec10::zeros(), |acc, e| {
            acc - e * self.tensor.inner(v, &self.a_horizontal(x, e))
        })
    }

    /// `R^B(X, Y, Z, U)` of the base for horizontal arguments, by O'Neill's
    /// formula.
    pub fn base_riemann(&self, x: &Vec10, y: &Vec10, z: &Vec10, u: &Vec10) -> f64 {
        let t = self.tensor;
        let a = |p: &Vec10, q: &Vec10| self.a_horizontal(p, q);
        t.riemann(x, y, z, u) - 2.0 * t.inner(&a(x, y), &a(z, u)) + t.inner(&a(y, z), &a(x, u))
            - t.inner(&a(x, z), &a(y, u))
    }

    /// The horizontal lift of `R^B(X, Y)Z`.
    pub fn base_riemann_vector(&self, x: &Vec10, y: &Vec10, z: &Vec10) -> Vec10 {
        self.horizontal
            .iter()
            .fold(Vec10::zeros(), |acc, e| acc + e * self.base_riemann(x, y, z, e))
    }

    /// Sectional curvature of the base for horizontal `X, Y`.
    pub fn base_sectional(&self, x: &Vec10, y: &Vec10) -> f64 {
        self.base_riemann(x, y, y, x) / self.tensor.area_sq(x, y)
    }
}

/// Coefficients of `P(σ,τ) = curv(ζ + σz, W + τV) = Σ c_{ab} σ^a τ^b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    /// `c₀₀`.
    pub c00: f64,
    /// `c₁₀`.
    pub c10: f64,
    /// `c₀₁`.
    pub c01: f64,
    /// `c₂₀`.
    pub c20: f64,
    /// `c₁₁`.
    pub c11: f64,
    /// `c₀₂`.
    pub c02: f64,
    /// `c₂₁`.
    pub c21: f64,
    /// `c₁₂`.
    pub c12: f64,
    /// `c₂₂`.
    pub c22: f64,
}

impl PolyCoeffs {
    /// Evaluates the polynomial.
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.c00
            + self.c10 * s
            + self.c01 * t
            + self.c20 * s * s
            + self.c11 * s * t
            + self.c02 * t * t
            + self.c21 * s * s * t
            + self.c12 * s * t * t
            + self.c22 * s * s * t * t
    }

    /// Coefficient-wise difference.
    pub fn minus(&self, o: &PolyCoeffs) -> PolyCoeffs {
        PolyCoeffs {
            c00: self.c00 - o.c00,
            c10: self.c10 - o.c10,
            c01: self.c01 - o.c01,
            c20: self.c20 - o.c20,
            c11: self.c11 - o.c11,
            c02: self.c02 - o.c02,
            c21: self.c21 - o.c21,
            c12: self.c12 - o.c12,
            c22: self.c22 - o.c22,
        }
    }
}

/// Removes from `v` its `g`-component along `w`.
pub fn orthogonalize(g: &Mat10, v: &Vec10, w: &Vec10) -> Vec10 {
    let ww = (w.transpose() * g * w)[0];
    v - w * ((w.transpose() * g * v)[0] / ww)
}

/// The curvature polynomial of `span{ζ + σz, W + τV}`. `z` and `V` are
/// first made orthogonal to `ζ` and `W`.
pub fn curvature_polynomial(t: &CurvatureTensor, zeta: &Vec10, w: &Vec10, z: &Vec10, v: &Vec10) -> PolyCoeffs {
    let z = orthogonalize(&t.gram, z, zeta);
    let v = orthogonalize(&t.gram, v, w);
    let r = |a: &Vec10, b: &Vec10, c: &Vec10, d: &Vec10| t.riemann(a, b, c, d);
    PolyCoeffs {
        c00: r(zeta, w, w, zeta),
        c10: 2.0 * r(zeta, w, w, &z),
        c01: 2.0 * r(w, zeta, zeta, &v),
        c20: r(&z, w, w, &z),
        c11: 2.0 * (r(zeta, w, &v, &z) + r(zeta, &v, w, &z)),
        c02: r(zeta, &v, &v, zeta),
        c21: 2.0 * r(&z, w, &v, &z),
        c12: 2.0 * r(zeta, &v, &v, &z),
        c22: r(&z, &v, &v, &z),
    }
}

/// The quadratic polynomial `P_Q(σ,τ)`, equal to
/// `curv^diff(ζ,W) + 2σR^diff(ζ,W,W,z) + 2τR^diff(W,ζ,ζ,V)` plus
/// `σ² curv^old(z,W) + 2στ [R^old(ζ,W,V,z) + R^old(ζ,V,W,z)] + τ² curv^old(ζ,V)`,
/// built from the coefficients of the difference tensor and of the
/// nonnegatively curved metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSubpoly {
    /// Constant term.
    pub c0: f64,
    /// `σ` coefficient.
    pub cs: f64,
    /// `τ` coefficient.
    pub ct: f64,
    /// `σ²` coefficient.
    pub css: f64,
    /// `στ` coefficient.
    pub cst: f64,
    /// `τ²` coefficient.
    pub ctt: f64,
}

impl QuadraticSubpoly {
    /// Evaluates `P_Q`.
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.c0 + self.cs * s + self.ct * t + self.css * s * s + self.cst * s * t + self.ctt * t * t
    }

    /// Global minimum over `R²` when the quadratic part is positive
    /// definite, with its minimizer.
    pub fn minimum(&self) -> Option<(f64, f64, f64)> {
        let (a, b, c) = (2.0 * self.css, self.cst, 2.0 * self.ctt);
        let det = a * c - b * b;
        if a <= 0.0 || det <= 0.0 {
            return None;
        }
        let s = (-c * self.cs + b * self.ct) / det;
        let t = (b * self.cs - a * self.ct) / det;
        Some((self.eval(s, t), s, t))
    }
}

/// Assembles `P_Q` from the difference and the old coefficients.
pub fn quadratic_subpoly(diff: &PolyCoeffs, old: &PolyCoeffs) -> QuadraticSubpoly {
    QuadraticSubpoly {
        c0: diff.c00,
        cs: diff.c10,
        ct: diff.c01,
        css: old.c20,
        cst: old.c11,
        ctt: old.c02,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum_matches_grid() {
        let p = QuadraticSubpoly {
            c0: 1.0,
            cs: 0.3,
            ct: -0.2,
            css: 2.0,
            cst: 0.5,
            ctt: 1.0,
        };
        let (m, _, _) = p.minimum().unwrap();
        let mut g = f64::INFINITY;
        for i in -400..=400 {
            for j in -400..=400 {
                g = g.min(p.eval(i as f64 * 0.0025, j as f64 * 0.0025));
            }
        }
        assert!((g - m).abs() < 1e-5 && g >= m - 1e-12);
    }
}
