//! Small fixed-size linear algebra: general 2×2 matrices and symmetric 2×2
//! matrices, plus closed-form functions of them.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A general real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };
    pub const ZERO: Mat2 = Mat2 { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn diag(x: f64, y: f64) -> Self {
        Mat2::new(x, 0.0, 0.0, y)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    /// Inverse; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn sym_part(&self) -> Sym2 {
        Sym2::new(self.a, 0.5 * (self.b + self.c), self.d)
    }

    /// `Tr(M²)`.
    pub fn trace_sq(&self) -> f64 {
        self.a * self.a + 2.0 * self.b * self.c + self.d * self.d
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Real logarithm of an element of SL(2,ℝ) whose eigenvalues are not
    /// negative reals, returned as a trace-free matrix `L` with `exp(L) = M`.
    ///
    /// For trace below -2 (or equal to -2 with `M ≠ -I`) no real logarithm
    /// exists and `None` is returned; callers handle that case by taking the
    /// logarithm of `-M`.
    pub fn sl2_log(&self) -> Option<Mat2> {
        let tr = self.trace();
        let half = 0.5 * tr;
        let tol = 1e-12;
        if half > 1.0 + tol {
            let c = half.acosh();
            let k = c / c.sinh();
            Some((*self - Mat2::IDENTITY.scale(half)).scale(k))
        } else if half < 1.0 - tol && half > -1.0 + tol {
            let theta = half.acos();
            let k = theta / theta.sin();
            Some((*self - Mat2::IDENTITY.scale(half)).scale(k))
        } else if (half - 1.0).abs() <= tol {
            Some(*self - Mat2::IDENTITY)
        } else if (half + 1.0).abs() <= tol
            && (*self + Mat2::IDENTITY).max_abs() <= tol
        {
            // -I is a rotation by π.
            Some(Mat2::new(0.0, -std::f64::consts::PI, std::f64::consts::PI, 0.0))
        } else {
            None
        }
    }

    /// Exponential of a trace-free matrix `L`, using `L² = -det(L)·I`.
    pub fn sl2_exp(l: &Mat2) -> Mat2 {
        let delta = -l.det();
        if delta > 0.0 {
            let s = delta.sqrt();
            Mat2::IDENTITY.scale(s.cosh()) + l.scale(s.sinh() / s)
        } else if delta < 0.0 {
            let s = (-delta).sqrt();
            Mat2::IDENTITY.scale(s.cos()) + l.scale(s.sin() / s)
        } else {
            Mat2::IDENTITY + *l
        }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// A symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn diag(x: f64, y: f64) -> Self {
        Sym2::new(x, 0.0, y)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(self.xx, self.xy, self.xy, self.yy)
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym2::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Sym2::new(self.yy / det, -self.xy / det, self.xx / det))
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    /// Positive-definiteness with a relative tolerance on the determinant.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.is_finite()
            && self.xx > 0.0
            && self.yy > 0.0
            && self.det() > tol * self.xx * self.yy
    }

    /// Congruence `Mᵀ S M`.
    pub fn congruence(&self, m: &Mat2) -> Sym2 {
        (m.transpose() * self.to_mat() * *m).sym_part()
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }

    /// Eigen-decomposition `S = R(θ) diag(λ₁, λ₂) R(θ)ᵀ` with `λ₁ ≥ λ₂`.
    pub fn eigen(&self) -> SymEigen {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let radius = half_diff.hypot(self.xy);
        let angle = 0.5 * self.xy.atan2(half_diff);
        SymEigen { hi: mean + radius, lo: mean - radius, angle }
    }

    /// Applies a scalar function to the eigenvalues.
    pub fn map_eigen(&self, f: impl Fn(f64) -> f64) -> Sym2 {
        self.eigen().rebuild(f)
    }
}

/// Closed-form eigen-decomposition of a symmetric 2×2 matrix.
#[derive(Clone, Copy, Debug)]
pub struct SymEigen {
    pub hi: f64,
    pub lo: f64,
    /// Rotation angle of the eigenvector belonging to `hi`.
    pub angle: f64,
}

impl SymEigen {
    pub fn rebuild(&self, f: impl Fn(f64) -> f64) -> Sym2 {
        let (s, c) = self.angle.sin_cos();
        let fh = f(self.hi);
        let fl = f(self.lo);
        Sym2::new(
            fh * c * c + fl * s * s,
            (fh - fl) * c * s,
            fh * s * s + fl * c * c,
        )
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl AddAssign for Sym2 {
    fn add_assign(&mut self, o: Sym2) {
        self.xx += o.xx;
        self.xy += o.xy;
        self.yy += o.yy;
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<f64> for Sym2 {
    type Output = Sym2;
    fn mul(self, s: f64) -> Sym2 {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn eigen_rebuild_recovers_matrix() {
        let s = Sym2::new(3.0, -1.25, 0.5);
        let back = s.map_eigen(|x| x);
        assert!((back - s).max_abs() < 1e-14);
        let e = s.eigen();
        assert!((e.hi * e.lo - s.det()).abs() < 1e-13);
        assert!((e.hi + e.lo - s.trace()).abs() < 1e-14);
    }

    #[test]
    fn sl2_log_exp_round_trip_all_classes() {
        let hyperbolic = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let elliptic = Mat2::new(0.0, -1.0, 1.0, 1.0);
        let parabolic = Mat2::new(1.0, 1.0, 0.0, 1.0);
        for m in [hyperbolic, elliptic, parabolic, Mat2::IDENTITY] {
            let l = m.sl2_log().unwrap();
            assert!(l.trace().abs() < 1e-14);
            assert!(close(&Mat2::sl2_exp(&l), &m, 1e-13), "{m:?}");
        }
        let minus_identity = Mat2::IDENTITY.scale(-1.0);
        let l = minus_identity.sl2_log().unwrap();
        assert!(close(&Mat2::sl2_exp(&l), &minus_identity, 1e-14));
        assert!(Mat2::new(-2.0, -1.0, -1.0, -1.0).sl2_log().is_none());
    }

    #[test]
    fn congruence_matches_explicit_product() {
        let s = Sym2::new(1.0, 0.3, 2.0);
        let m = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let expected = m.transpose() * s.to_mat() * m;
        let got = s.congruence(&m).to_mat();
        assert!(close(&got, &expected, 1e-14));
    }
}
