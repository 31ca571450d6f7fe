//! Element-local algebra: `|x|_β`, the Newton matrix `H(r)`, its inverse and the
//! Picard scalar `Ĥ(r) = 1/|r|_β`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::{Error, Result};

/// Smallest admissible regularization parameter.
pub const MIN_BETA: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Symmetric 2×2 matrix; the off-diagonal entry is stored once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMat2 {
    pub const IDENTITY: SymMat2 = SymMat2 { a11: 1.0, a12: 0.0, a22: 1.0 };

    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self::new(s, 0.0, s)
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a11 * v.x + self.a12 * v.y, self.a12 * v.x + self.a22 * v.y)
    }

    /// `vᵀ A w`
    pub fn form(&self, v: Vec2, w: Vec2) -> f64 {
        v.dot(self.apply(w))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Numeric inverse by cofactors.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        (d != 0.0 && d.is_finite()).then(|| Self::new(self.a22 / d, -self.a12 / d, self.a11 / d))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a11 + self.a22);
        let rad = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        let hi = mean + rad;
        // Recover the small eigenvalue from the determinant when it would cancel.
        let lo = if hi > 0.0 && mean > 0.0 { self.det() / hi } else { mean - rad };
        (lo, hi)
    }

    /// Full (non-symmetric storage) product `self · other`.
    pub fn matmul(&self, o: &SymMat2) -> [[f64; 2]; 2] {
        [
            [self.a11 * o.a11 + self.a12 * o.a12, self.a11 * o.a12 + self.a12 * o.a22],
            [self.a12 * o.a11 + self.a22 * o.a12, self.a12 * o.a12 + self.a22 * o.a22],
        ]
    }

    pub fn abs(&self) -> Self {
        Self::new(self.a11.abs(), self.a12.abs(), self.a22.abs())
    }
}

/// Validated regularization parameter `β ≥ 1e-14`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= MIN_BETA {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidBeta(beta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `|x|_β = sqrt(|x|² + β)`.
pub fn beta_norm(x: Vec2, beta: Beta) -> f64 {
    (x.norm_sq() + beta.0).sqrt()
}

/// Unit direction of `r` split into the parallel and orthogonal projectors.
fn projectors(r: Vec2) -> Option<(SymMat2, SymMat2)> {
    let len = r.norm();
    if len == 0.0 {
        return None;
    }
    let (c, s) = (r.x / len, r.y / len);
    let par = SymMat2::new(c * c, c * s, s * s);
    let perp = SymMat2::new(s * s, -c * s, c * c);
    Some((par, perp))
}

/// `H(r) = (1/|r|_β)(I − r rᵀ/|r|_β²)`.
///
/// Evaluated as `(1/|r|_β)(P⊥ + β/|r|_β² · P∥)` with the projectors onto and
/// orthogonal to `r`, so the small eigenvalue `β/|r|_β³` is not lost to cancellation
/// when `|r|² ≫ β`.
pub fn h_matrix(r: Vec2, beta: Beta) -> SymMat2 {
    let s = beta_norm(r, beta);
    match projectors(r) {
        None => SymMat2::scaled_identity(1.0 / s),
        Some((par, perp)) => {
            let eta = beta.0 / (s * s);
            SymMat2::new(
                (perp.a11 + eta * par.a11) / s,
                (perp.a12 + eta * par.a12) / s,
                (perp.a22 + eta * par.a22) / s,
            )
        }
    }
}

/// Closed-form inverse `H(r)⁻¹ = |r|_β (I + r rᵀ/β)`.
pub fn h_matrix_inverse(r: Vec2, beta: Beta) -> SymMat2 {
    let s = beta_norm(r, beta);
    let b = beta.0;
    SymMat2::new(
        s * (1.0 + r.x * r.x / b),
        s * (r.x * r.y / b),
        s * (1.0 + r.y * r.y / b),
    )
}

/// Picard scalar `Ĥ(r) = 1/|r|_β`.
pub fn h_hat(r: Vec2, beta: Beta) -> f64 {
    1.0 / beta_norm(r, beta)
}

/// Spectral bounds `[β/|r|_β³, 1/|r|_β]` of `H(r)`.
pub fn h_matrix_bounds(r: Vec2, beta: Beta) -> (f64, f64) {
    let s = beta_norm(r, beta);
    (beta.0 / (s * s * s), 1.0 / s)
}
