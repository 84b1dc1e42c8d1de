//! Scalar abstraction and small fixed-size linear algebra.
//!
//! Everything downstream of the dynamics algorithms is generic over [`Scalar`]
//! so that a single implementation serves both plain `f64` (fast simulation)
//! and the recording [`crate::autodiff::DiffScalar`] (identification).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic interface shared by `f64` and tape-recorded scalars.
///
/// Comparisons act on primal values; branching in generic code therefore
/// differentiates the taken branch. `sign` returns -1/0/+1 with zero
/// derivative everywhere, `abs`/`relu` use subgradient 0 at the kink.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Primal value (drops any derivative information).
    fn value(self) -> f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    fn relu(self) -> Self;
    /// Numerically stable `ln(1 + exp(x))`.
    fn softplus(self) -> Self;
    /// Elementwise sign with `sign(0) = 0`; treated as locally constant.
    fn sign(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn powi(self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
    /// Larger operand by primal value; ties keep `self`.
    fn max_val(self, other: Self) -> Self {
        if self.value() >= other.value() {
            self
        } else {
            other
        }
    }
    fn min_val(self, other: Self) -> Self {
        if self.value() <= other.value() {
            self
        } else {
            other
        }
    }
    fn is_finite(self) -> bool {
        self.value().is_finite()
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    fn softplus(self) -> Self {
        // max(x, 0) + ln(1 + exp(-|x|)) avoids overflow for large |x|.
        self.max(0.0) + (-self.abs()).exp().ln_1p()
    }
    fn sign(self) -> Self {
        if self > 0.0 {
            1.0
        } else if self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

/// 3-vector over any scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Self::new(S::from_f64(v[0]), S::from_f64(v[1]), S::from_f64(v[2]))
    }

    pub fn to_f64(self) -> [f64; 3] {
        [self.x.value(), self.y.value(), self.z.value()]
    }

    pub fn to_array(self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [S; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn scale(self, s: S) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn norm_sq(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.norm_sq().sqrt()
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix over any scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<S> {
    pub m: [[S; 3]; 3],
}

impl<S: Scalar> Mat3<S> {
    pub fn from_rows(r0: [S; 3], r1: [S; 3], r2: [S; 3]) -> Self {
        Self { m: [r0, r1, r2] }
    }

    pub fn zero() -> Self {
        Self {
            m: [[S::zero(); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.m[i][i] = S::one();
        }
        m
    }

    pub fn diag(d: Vec3<S>) -> Self {
        let mut m = Self::zero();
        m.m[0][0] = d.x;
        m.m[1][1] = d.y;
        m.m[2][2] = d.z;
        m
    }

    pub fn from_f64(v: [[f64; 3]; 3]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.m[i][j] = S::from_f64(v[i][j]);
            }
        }
        m
    }

    pub fn to_f64(self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.m[i][j].value();
            }
        }
        out
    }

    pub fn transpose(self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[j][i];
            }
        }
        out
    }

    pub fn mul_vec(self, v: Vec3<S>) -> Vec3<S> {
        let a = v.to_array();
        let mut out = [S::zero(); 3];
        for (i, row) in self.m.iter().enumerate() {
            out[i] = row[0] * a[0] + row[1] * a[1] + row[2] * a[2];
        }
        Vec3::from_array(out)
    }

    /// Skew-symmetric matrix `[v]` with `[v] w = v x w`.
    pub fn skew(v: Vec3<S>) -> Self {
        let z = S::zero();
        Self::from_rows([z, -v.z, v.y], [v.z, z, -v.x], [-v.y, v.x, z])
    }

    /// Outer product `a b^T`.
    pub fn outer(a: Vec3<S>, b: Vec3<S>) -> Self {
        let av = a.to_array();
        let bv = b.to_array();
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = av[i] * bv[j];
            }
        }
        out
    }

    pub fn scale(self, s: S) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = out.m[i][j] * s;
            }
        }
        out
    }
}

impl<S: Scalar> Add for Mat3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = out.m[i][j] + o.m[i][j];
            }
        }
        out
    }
}

impl<S: Scalar> Sub for Mat3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = out.m[i][j] - o.m[i][j];
            }
        }
        out
    }
}

impl<S: Scalar> Mul for Mat3<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = S::zero();
                for (k, row) in o.m.iter().enumerate() {
                    acc = acc + self.m[i][k] * row[j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }
}

/// Elementary rotation about the x axis (right-hand rule).
pub fn rot_x<S: Scalar>(phi: S) -> Mat3<S> {
    let (s, c) = (phi.sin(), phi.cos());
    let (z, o) = (S::zero(), S::one());
    Mat3::from_rows([o, z, z], [z, c, -s], [z, s, c])
}

/// Elementary rotation about the y axis.
pub fn rot_y<S: Scalar>(phi: S) -> Mat3<S> {
    let (s, c) = (phi.sin(), phi.cos());
    let (z, o) = (S::zero(), S::one());
    Mat3::from_rows([c, z, s], [z, o, z], [-s, z, c])
}

/// Elementary rotation about the z axis.
pub fn rot_z<S: Scalar>(phi: S) -> Mat3<S> {
    let (s, c) = (phi.sin(), phi.cos());
    let (z, o) = (S::zero(), S::one());
    Mat3::from_rows([c, -s, z], [s, c, z], [z, z, o])
}

/// Row-major 6x6 matrix, used for adjoints and articulated inertias.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat6<S> {
    pub m: [[S; 6]; 6],
}

impl<S: Scalar> Mat6<S> {
    pub fn zero() -> Self {
        Self {
            m: [[S::zero(); 6]; 6],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..6 {
            m.m[i][i] = S::one();
        }
        m
    }

    /// Assemble from 3x3 blocks `[[tl, tr], [bl, br]]`.
    pub fn from_blocks(tl: Mat3<S>, tr: Mat3<S>, bl: Mat3<S>, br: Mat3<S>) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = tl.m[i][j];
                out.m[i][j + 3] = tr.m[i][j];
                out.m[i + 3][j] = bl.m[i][j];
                out.m[i + 3][j + 3] = br.m[i][j];
            }
        }
        out
    }

    pub fn transpose(self) -> Self {
        let mut out = Self::zero();
        for i in 0..6 {
            for j in 0..6 {
                out.m[i][j] = self.m[j][i];
            }
        }
        out
    }

    pub fn mul_vec(self, v: [S; 6]) -> [S; 6] {
        let mut out = [S::zero(); 6];
        for (i, row) in self.m.iter().enumerate() {
            let mut acc = S::zero();
            for k in 0..6 {
                acc = acc + row[k] * v[k];
            }
            out[i] = acc;
        }
        out
    }

    pub fn scale(self, s: S) -> Self {
        let mut out = self;
        for i in 0..6 {
            for j in 0..6 {
                out.m[i][j] = out.m[i][j] * s;
            }
        }
        out
    }

    /// Outer product `a b^T` of 6-vectors.
    pub fn outer(a: [S; 6], b: [S; 6]) -> Self {
        let mut out = Self::zero();
        for i in 0..6 {
            for j in 0..6 {
                out.m[i][j] = a[i] * b[j];
            }
        }
        out
    }

    /// Congruence transform `x^T m x`.
    pub fn congruence(x: Self, m: Self) -> Self {
        x.transpose() * (m * x)
    }

    pub fn to_f64(self) -> [[f64; 6]; 6] {
        let mut out = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                out[i][j] = self.m[i][j].value();
            }
        }
        out
    }
}

impl<S: Scalar> Add for Mat6<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        for i in 0..6 {
            for j in 0..6 {
                out.m[i][j] = out.m[i][j] + o.m[i][j];
            }
        }
        out
    }
}

impl<S: Scalar> Sub for Mat6<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut out = self;
        for i in 0..6 {
            for j in 0..6 {
                out.m[i][j] = out.m[i][j] - o.m[i][j];
            }
        }
        out
    }
}

impl<S: Scalar> Mul for Mat6<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..6 {
            for j in 0..6 {
                let mut acc = S::zero();
                for (k, row) in o.m.iter().enumerate() {
                    acc = acc + self.m[i][k] * row[j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_is_antisymmetric() {
        let v = Vec3::new(0.3, -1.2, 2.5);
        let s = Mat3::skew(v);
        let st = s.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert!((s.m[i][j] + st.m[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn skew_matches_cross() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-0.5, 0.1, 0.7);
        let via_mat = Mat3::skew(a).mul_vec(b);
        let via_cross = a.cross(b);
        for (x, y) in via_mat.to_array().iter().zip(via_cross.to_array()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_matrices_are_orthonormal() {
        for r in [rot_x(0.7), rot_y(-1.3), rot_z(2.9)] {
            let should_be_eye = r.transpose() * r;
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((should_be_eye.m[i][j] - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mat6_congruence_matches_explicit_product() {
        let mut x = Mat6::<f64>::zero();
        let mut m = Mat6::<f64>::zero();
        for i in 0..6 {
            for j in 0..6 {
                x.m[i][j] = ((i * 7 + j * 3) % 5) as f64 - 2.0;
                m.m[i][j] = ((i + j) % 4) as f64 * 0.5;
            }
        }
        let lhs = Mat6::congruence(x, m);
        let rhs = x.transpose() * m * x;
        for i in 0..6 {
            for j in 0..6 {
                assert!((lhs.m[i][j] - rhs.m[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softplus_is_stable_for_large_arguments() {
        assert!((Scalar::softplus(800.0_f64) - 800.0).abs() < 1e-9);
        assert!(Scalar::softplus(-800.0_f64).abs() < 1e-9);
        assert!((Scalar::softplus(0.0_f64) - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sign_convention_at_zero() {
        assert_eq!(Scalar::sign(0.0_f64), 0.0);
        assert_eq!(Scalar::sign(3.5_f64), 1.0);
        assert_eq!(Scalar::sign(-0.1_f64), -1.0);
    }
}
