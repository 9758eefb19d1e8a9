//! Quaternions, quaternionic column vectors and 2×2 quaternionic matrices.
//!
//! Every geometric object in the crate is built from these three value
//! types. Components are stored in the fixed order `(w, x, y, z)` over the
//! basis `1, i, j, k`.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A real quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    /// Real part.
    pub w: f64,
    /// Coefficient of `i`.
    pub x: f64,
    /// Coefficient of `j`.
    pub y: f64,
    /// Coefficient of `k`.
    pub z: f64,
}

impl Quaternion {
    /// The zero quaternion.
    pub const ZERO: Quaternion = Quaternion {
        w: 0.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    /// The unit `1`.
    pub const ONE: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    /// The unit `i`.
    pub const I: Quaternion = Quaternion {
        w: 0.0,
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    /// The unit `j`.
    pub const J: Quaternion = Quaternion {
        w: 0.0,
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    /// The unit `k`.
    pub const K: Quaternion = Quaternion {
        w: 0.0,
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Builds a quaternion from its four components.
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Builds a purely imaginary quaternion; the real part is exactly zero.
    pub const fn imaginary(x: f64, y: f64, z: f64) -> Self {
        Quaternion { w: 0.0, x, y, z }
    }

    /// Builds a purely imaginary quaternion from a 3-vector.
    pub fn from_im(v: [f64; 3]) -> Self {
        Self::imaginary(v[0], v[1], v[2])
    }

    /// Components as an array `[w, x, y, z]`.
    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Builds a quaternion from `[w, x, y, z]`.
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Imaginary part as a 3-vector.
    pub fn im(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// The imaginary part as a quaternion.
    pub fn im_part(self) -> Self {
        Self::imaginary(self.x, self.y, self.z)
    }

    /// Quaternionic conjugate `w - x i - y j - z k`.
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean inner product on `R^4`.
    pub fn dot(self, o: Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Squared norm.
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Norm.
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Returns `self / |self|`; the zero quaternion is returned unchanged.
    pub fn normalize(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self.scale(1.0 / n)
        }
    }

    /// Multiplication by a real scalar.
    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse; undefined for zero.
    pub fn inverse(self) -> Self {
        self.conj().scale(1.0 / self.norm_sq())
    }

    /// `exp(u * angle) = cos(angle) + u sin(angle)` for a unit imaginary `u`.
    pub fn exp_unit_imag(u: Quaternion, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, u.x * s, u.y * s, u.z * s)
    }

    /// Exponential of an arbitrary quaternion.
    pub fn exp(self) -> Self {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        let ew = self.w.exp();
        let (s, c) = v.sin_cos();
        let k = if v > 1e-300 { s / v } else { 1.0 };
        Self::new(ew * c, ew * k * self.x, ew * k * self.y, ew * k * self.z)
    }

    /// `e^{u a/2} b e^{-u a/2}`: rotation of `b` by the angle `a` about the
    /// unit imaginary axis `u`.
    pub fn rotate_about(u: Quaternion, angle: f64, b: Quaternion) -> Self {
        let e = Self::exp_unit_imag(u, angle / 2.0);
        e * b * e.conj()
    }

    /// Maximum absolute component difference.
    pub fn max_abs_diff(self, o: Self) -> f64 {
        (self.w - o.w)
            .abs()
            .max((self.x - o.x).abs())
            .max((self.y - o.y).abs())
            .max((self.z - o.z).abs())
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    /// Hamilton product.
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

/// Hamilton product `p q`.
pub fn qmul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

/// Conjugation `q̄ β q`. For unit `q` this is a rotation of the imaginary
/// part of `β` and leaves its real part fixed.
pub fn conj_by(q: Quaternion, beta: Quaternion) -> Quaternion {
    q.conj() * beta * q
}

/// A column vector in `H^2`.
pub type H2 = [Quaternion; 2];

/// Quaternionic Hermitian product `ū₁v₁ + ū₂v₂`. Its real part is the
/// Euclidean inner product on `R^8`.
pub fn qh_inner(u: &H2, v: &H2) -> Quaternion {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

/// A 2×2 quaternionic matrix `[a b; c d]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QMatrix2 {
    /// Upper left entry.
    pub a: Quaternion,
    /// Upper right entry.
    pub b: Quaternion,
    /// Lower left entry.
    pub c: Quaternion,
    /// Lower right entry.
    pub d: Quaternion,
}

impl QMatrix2 {
    /// The zero matrix.
    pub const ZERO: QMatrix2 = QMatrix2 {
        a: Quaternion::ZERO,
        b: Quaternion::ZERO,
        c: Quaternion::ZERO,
        d: Quaternion::ZERO,
    };

    /// The identity matrix.
    pub const IDENTITY: QMatrix2 = QMatrix2 {
        a: Quaternion::ONE,
        b: Quaternion::ZERO,
        c: Quaternion::ZERO,
        d: Quaternion::ONE,
    };

    /// Builds a matrix from its entries.
    pub const fn new(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> Self {
        QMatrix2 { a, b, c, d }
    }

    /// Diagonal matrix `diag(p, q)`.
    pub const fn diag(p: Quaternion, q: Quaternion) -> Self {
        QMatrix2 {
            a: p,
            b: Quaternion::ZERO,
            c: Quaternion::ZERO,
            d: q,
        }
    }

    /// Builds a matrix from its two columns.
    pub fn from_columns(c1: H2, c2: H2) -> Self {
        QMatrix2 {
            a: c1[0],
            c: c1[1],
            b: c2[0],
            d: c2[1],
        }
    }

    /// First column `(a; c)`.
    pub fn col1(&self) -> H2 {
        [self.a, self.c]
    }

    /// Second column `(b; d)`.
    pub fn col2(&self) -> H2 {
        [self.b, self.d]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        QMatrix2 {
            a: self.a.conj(),
            b: self.c.conj(),
            c: self.b.conj(),
            d: self.d.conj(),
        }
    }

    /// Multiplication by a real scalar.
    pub fn scale(&self, s: f64) -> Self {
        QMatrix2 {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
        }
    }

    /// Left multiplication of every entry by `q`.
    pub fn left_scalar(&self, q: Quaternion) -> Self {
        QMatrix2 {
            a: q * self.a,
            b: q * self.b,
            c: q * self.c,
            d: q * self.d,
        }
    }

    /// Commutator `[self, o] = self o - o self`.
    pub fn bracket(&self, o: &Self) -> Self {
        *self * *o - *o * *self
    }

    /// The 16 real components in the order `a, b, c, d`, each `(w, x, y, z)`.
    pub fn to_array(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (k, q) in [self.a, self.b, self.c, self.d].iter().enumerate() {
            out[4 * k..4 * k + 4].copy_from_slice(&q.to_array());
        }
        out
    }

    /// Inverse of [`QMatrix2::to_array`].
    pub fn from_array(v: &[f64; 16]) -> Self {
        let q = |k: usize| Quaternion::new(v[4 * k], v[4 * k + 1], v[4 * k + 2], v[4 * k + 3]);
        QMatrix2 {
            a: q(0),
            b: q(1),
            c: q(2),
            d: q(3),
        }
    }

    /// Euclidean inner product on `R^16`.
    pub fn dot(&self, o: &Self) -> f64 {
        self.a.dot(o.a) + self.b.dot(o.b) + self.c.dot(o.c) + self.d.dot(o.d)
    }

    /// Euclidean norm on `R^16`.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    pub fn exp(&self) -> Self {
        let n = self.norm();
        let mut squarings = 0;
        let mut scaled = *self;
        if n > 0.25 {
            squarings = (n / 0.25).log2().ceil() as i32;
            scaled = self.scale(0.5f64.powi(squarings));
        }
        let mut term = QMatrix2::IDENTITY;
        let mut sum = QMatrix2::IDENTITY;
        for k in 1..=18 {
            term = (term * scaled).scale(1.0 / k as f64);
            sum = sum + term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl Add for QMatrix2 {
    type Output = QMatrix2;
    fn add(self, o: Self) -> Self {
        QMatrix2 {
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
            d: self.d + o.d,
        }
    }
}

impl Sub for QMatrix2 {
    type Output = QMatrix2;
    fn sub(self, o: Self) -> Self {
        QMatrix2 {
            a: self.a - o.a,
            b: self.b - o.b,
            c: self.c - o.c,
            d: self.d - o.d,
        }
    }
}

impl Neg for QMatrix2 {
    type Output = QMatrix2;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for QMatrix2 {
    type Output = QMatrix2;
    fn mul(self, o: Self) -> Self {
        QMatrix2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamilton_relations() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(i * i, -Quaternion::ONE);
    }

    #[test]
    fn matrix_exp_of_diagonal_imaginary() {
        let m = QMatrix2::diag(Quaternion::I.scale(0.7), Quaternion::ZERO).exp();
        let e = Quaternion::exp_unit_imag(Quaternion::I, 0.7);
        assert!(m.a.max_abs_diff(e) < 1e-15);
        assert!(m.d.max_abs_diff(Quaternion::ONE) < 1e-15);
    }
}
