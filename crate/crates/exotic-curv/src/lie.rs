//! The Lie algebra `sp(2)` in left-translated coordinates.
//!
//! A tangent vector `X` at `M ∈ Sp(2)` is identified with `ξ = M† X`, a
//! skew-Hermitian 2×2 quaternionic matrix. The ten coordinates of `ξ` are
//! the imaginary parts of its two diagonal entries followed by the four real
//! components of its upper right entry. The first six span `V₁ ⊕ V₂` and the
//! last four span `H`.
//!
//! This module also holds the exact curvature of left-invariant metrics,
//! which serves as an independent oracle for the finite-difference engine.

use crate::quat::{QMatrix2, Quaternion};
use nalgebra::{SMatrix, SVector};
use std::sync::OnceLock;

/// A vector of left coordinates.
pub type Vec10 = SVector<f64, 10>;
/// A bilinear form (or linear map) in left coordinates.
pub type Mat10 = SMatrix<f64, 10, 10>;

/// Number of coordinates spanning `V₁ ⊕ V₂`.
pub const K_DIM: usize = 6;

const Z: Quaternion = Quaternion::ZERO;

/// The coordinate basis of `sp(2)`.
pub const BASIS: [QMatrix2; 10] = [
    QMatrix2::diag(Quaternion::I, Z),
    QMatrix2::diag(Quaternion::J, Z),
    QMatrix2::diag(Quaternion::K, Z),
    QMatrix2::diag(Z, Quaternion::I),
    QMatrix2::diag(Z, Quaternion::J),
    QMatrix2::diag(Z, Quaternion::K),
    QMatrix2::new(Z, Quaternion::ONE, Quaternion::new(-1.0, 0.0, 0.0, 0.0), Z),
    QMatrix2::new(Z, Quaternion::I, Quaternion::I, Z),
    QMatrix2::new(Z, Quaternion::J, Quaternion::J, Z),
    QMatrix2::new(Z, Quaternion::K, Quaternion::K, Z),
];

/// Coordinates of a skew-Hermitian matrix. Components outside `sp(2)` are
/// discarded.
pub fn coords(xi: &QMatrix2) -> Vec10 {
    Vec10::from_column_slice(&[
        xi.a.x, xi.a.y, xi.a.z, xi.d.x, xi.d.y, xi.d.z, xi.b.w, xi.b.x, xi.b.y, xi.b.z,
    ])
}

/// The skew-Hermitian matrix with the given coordinates.
pub fn from_coords(v: &Vec10) -> QMatrix2 {
    let b = Quaternion::new(v[6], v[7], v[8], v[9]);
    QMatrix2::new(
        Quaternion::imaginary(v[0], v[1], v[2]),
        b,
        -b.conj(),
        Quaternion::imaginary(v[3], v[4], v[5]),
    )
}

/// Left coordinates of the tangent vector `x` at `m`.
pub fn left_coords(m: &QMatrix2, x: &QMatrix2) -> Vec10 {
    coords(&(m.dagger() * *x))
}

/// The tangent vector at `m` with left coordinates `v`.
pub fn from_left_coords(m: &QMatrix2, v: &Vec10) -> QMatrix2 {
    *m * from_coords(v)
}

/// Left coordinates of `M diag(u, w)`, the vector `(·u, ·w)` that right
/// multiplies the columns by imaginary quaternions.
pub fn kvec(u: Quaternion, w: Quaternion) -> Vec10 {
    let mut v = Vec10::zeros();
    v[0] = u.x;
    v[1] = u.y;
    v[2] = u.z;
    v[3] = w.x;
    v[4] = w.y;
    v[5] = w.z;
    v
}

type Structure = [[[f64; 10]; 10]; 10];

/// Structure constants `c[i][j][k]` with `[E_i, E_j] = Σ_k c[i][j][k] E_k`.
pub fn structure_constants() -> &'static Structure {
    static C: OnceLock<Structure> = OnceLock::new();
    C.get_or_init(|| {
        let mut c = [[[0.0; 10]; 10]; 10];
        for i in 0..10 {
            for j in 0..10 {
                let b = coords(&BASIS[i].bracket(&BASIS[j]));
                for k in 0..10 {
                    c[i][j][k] = b[k];
                }
            }
        }
        c
    })
}

/// Lie bracket in coordinates.
pub fn bracket(x: &Vec10, y: &Vec10) -> Vec10 {
    let c = structure_constants();
    let mut out = Vec10::zeros();
    for i in 0..10 {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..10 {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            for k in 0..10 {
                out[k] += w * c[i][j][k];
            }
        }
    }
    out
}

/// The matrix of `ad_x`, so that `ad(x) * y = [x, y]`.
pub fn ad(x: &Vec10) -> Mat10 {
    let c = structure_constants();
    let mut m = Mat10::zeros();
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..10 {
                m[(k, j)] += x[i] * c[i][j][k];
            }
        }
    }
    m
}

/// Gram matrix of the biinvariant metric `(½)b = ½ Re tr(X† Y)` in left
/// coordinates.
pub fn biinvariant_gram() -> Mat10 {
    let mut g = Mat10::zeros();
    for i in 0..10 {
        g[(i, i)] = if i < K_DIM { 0.5 } else { 1.0 };
    }
    g
}

/// Gram matrix of `g_ν`, which scales `V₁ ⊕ V₂` and keeps `H` fixed.
pub fn nu_gram(nu: f64) -> Mat10 {
    let mut g = Mat10::zeros();
    for i in 0..10 {
        g[(i, i)] = if i < K_DIM { nu * nu } else { 1.0 };
    }
    g
}

/// A left-invariant metric with its inverse, for exact curvature work.
#[derive(Clone, Debug)]
pub struct LeftInvariant {
    g: Mat10,
    ginv: Mat10,
}

impl LeftInvariant {
    /// Wraps a positive definite Gram matrix.
    pub fn new(g: Mat10) -> Self {
        let ginv = g.try_inverse().expect("left-invariant metric must be invertible");
        LeftInvariant { g, ginv }
    }

    /// The Gram matrix.
    pub fn gram(&self) -> &Mat10 {
        &self.g
    }

    /// Inner product.
    pub fn inner(&self, x: &Vec10, y: &Vec10) -> f64 {
        (x.transpose() * self.g * y)[0]
    }

    /// Levi-Civita connection on left-invariant fields,
    /// `∇_X Y = ½([X,Y] − ad_X^* Y − ad_Y^* X)`.
    pub fn nabla(&self, x: &Vec10, y: &Vec10) -> Vec10 {
        let br = bracket(x, y);
        let adx = ad(x);
        let ady = ad(y);
        let t1 = self.ginv * (adx.transpose() * (self.g * y));
        let t2 = self.ginv * (ady.transpose() * (self.g * x));
        (br - t1 - t2) * 0.5
    }

    /// `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]} Z`.
    pub fn riemann(&self, x: &Vec10, y: &Vec10, z: &Vec10) -> Vec10 {
        self.nabla(x, &self.nabla(y, z)) - self.nabla(y, &self.nabla(x, z)) - self.nabla(&bracket(x, y), z)
    }

    /// Unnormalized curvature `⟨R(X,Y)Y, X⟩`.
    pub fn curv(&self, x: &Vec10, y: &Vec10) -> f64 {
        self.inner(&self.riemann(x, y, y), x)
    }

    /// Sectional curvature of `span{X, Y}`.
    pub fn sectional(&self, x: &Vec10, y: &Vec10) -> f64 {
        let a = self.inner(x, x) * self.inner(y, y) - self.inner(x, y).powi(2);
        self.curv(x, y) / a
    }

    /// Symmetric matrix of the quadratic form `U ↦ curv(ζ, U)` restricted
    /// to the first `n` coordinates.
    pub fn curvature_form(&self, zeta: &Vec10, n: usize) -> nalgebra::DMatrix<f64> {
        let e = |i: usize| {
            let mut v = Vec10::zeros();
            v[i] = 1.0;
            v
        };
        let mut q = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let rij = self.inner(&self.riemann(zeta, &e(i), &e(j)), zeta);
                let rji = self.inner(&self.riemann(zeta, &e(j), &e(i)), zeta);
                let v = 0.5 * (rij + rji);
                q[(i, j)] = v;
                q[(j, i)] = v;
            }
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_round_trip() {
        for (i, b) in BASIS.iter().enumerate() {
            let c = coords(b);
            for k in 0..10 {
                assert_eq!(c[k], if k == i { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn biinvariant_curvature_is_quarter_bracket() {
        let li = LeftInvariant::new(biinvariant_gram());
        let x = Vec10::from_fn(|i, _| (i as f64 * 0.37).sin());
        let y = Vec10::from_fn(|i, _| (i as f64 * 1.13 + 0.2).cos());
        let br = bracket(&x, &y);
        let want = 0.25 * li.inner(&br, &br);
        assert!((li.curv(&x, &y) - want).abs() < 1e-13);
    }
}
