//! Scalar quaternion arithmetic.
//!
//! `Quaternion` is the ground scalar of every matrix in this crate. Products
//! follow Hamilton's rules (`ij = k`, `jk = i`, `ki = j`, `i² = j² = k² = -1`)
//! and are never reordered.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this vector-part magnitude `qexp` switches to the sinc form.
pub const QEXP_SINC_THRESHOLD: f64 = 1e-8;

/// Absolute tolerance used by [`similar`].
pub const SIMILARITY_TOL: f64 = 1e-9;

/// `q0 + q1 i + q2 j + q3 k`.
///
/// Serializes as the four-element array `[q0, q1, q2, q3]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.components()
    }
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Quaternion { q0, q1, q2, q3 }
    }

    #[inline]
    pub const fn real(a: f64) -> Self {
        Quaternion::new(a, 0.0, 0.0, 0.0)
    }

    /// Builds `c1 + c2·j` from two complex numbers.
    #[inline]
    pub fn from_complex_parts(c1: Complex64, c2: Complex64) -> Self {
        Quaternion::new(c1.re, c1.im, c2.re, c2.im)
    }

    /// Splits `q = c1 + c2·j` with `c1 = q0 + q1 i`, `c2 = q2 + q3 i`.
    #[inline]
    pub fn complex_parts(self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.q0, self.q1),
            Complex64::new(self.q2, self.q3),
        )
    }

    #[inline]
    pub fn components(self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    /// Scalar part.
    #[inline]
    pub fn re(self) -> f64 {
        self.q0
    }

    /// Vector part `q1 i + q2 j + q3 k`.
    #[inline]
    pub fn ve(self) -> Quaternion {
        Quaternion::new(0.0, self.q1, self.q2, self.q3)
    }

    #[inline]
    pub fn ve_norm(self) -> f64 {
        (self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3).sqrt()
    }

    #[inline]
    pub fn conj(self) -> Quaternion {
        Quaternion::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inverse(self) -> Result<Quaternion> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.conj() * (1.0 / n2))
    }

    #[inline]
    pub fn scale(self, s: f64) -> Quaternion {
        Quaternion::new(self.q0 * s, self.q1 * s, self.q2 * s, self.q3 * s)
    }

    pub fn is_finite(self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    /// Quaternion exponential `e^{q0}(cos|v| + v/|v| sin|v|)`.
    pub fn exp(self) -> Quaternion {
        let a = self.q0.exp();
        let theta = self.ve_norm();
        let c = theta.cos();
        // sin(θ)/θ, with the series limit near the real axis
        let sinc = if theta < QEXP_SINC_THRESHOLD {
            1.0 - theta * theta / 6.0
        } else {
            theta.sin() / theta
        };
        Quaternion::new(a * c, a * sinc * self.q1, a * sinc * self.q2, a * sinc * self.q3)
    }

    /// Canonical representative `Re(q) + |Ve(q)| i` of the similarity class.
    pub fn standardize(self) -> ComplexPair {
        ComplexPair::new(self.q0, self.ve_norm())
    }

    pub fn is_real(self, tol: f64) -> bool {
        self.ve_norm() <= tol
    }
}

/// Free-function form of [`Quaternion::exp`].
pub fn qexp(q: Quaternion) -> Quaternion {
    q.exp()
}

/// True when `p` and `q` lie in the same similarity class `[q]`.
pub fn similar(p: Quaternion, q: Quaternion) -> bool {
    (p.re() - q.re()).abs() <= SIMILARITY_TOL && (p.ve_norm() - q.ve_norm()).abs() <= SIMILARITY_TOL
}

/// Free-function form of [`Quaternion::standardize`].
pub fn standardize(q: Quaternion) -> ComplexPair {
    q.standardize()
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 + o.q0, self.q1 + o.q1, self.q2 + o.q2, self.q3 + o.q3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 - o.q0, self.q1 - o.q1, self.q2 - o.q2, self.q3 - o.q3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.q0, -self.q1, -self.q2, -self.q3)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a0, a1, a2, a3) = (self.q0, self.q1, self.q2, self.q3);
        let (b0, b1, b2, b3) = (o.q0, o.q1, o.q2, o.q3);
        Quaternion::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, o: Quaternion) {
        *self = *self * o;
    }
}

impl From<f64> for Quaternion {
    fn from(a: f64) -> Self {
        Quaternion::real(a)
    }
}

impl From<ComplexPair> for Quaternion {
    fn from(c: ComplexPair) -> Self {
        Quaternion::new(c.re, c.im, 0.0, 0.0)
    }
}

impl fmt::Display for Quaternion {
    /// Renders `a+bi+cj+dk`; honours precision and `{:e}`-style via alternate.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision();
        let sci = f.alternate();
        let num = |x: f64| match (prec, sci) {
            (Some(p), true) => format!("{x:.p$e}"),
            (None, true) => format!("{x:e}"),
            (Some(p), false) => format!("{x:.p$}"),
            (None, false) => format!("{x}"),
        };
        let sign = |x: f64| if x.is_sign_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{}i{}{}j{}{}k",
            num(self.q0),
            sign(self.q1),
            num(self.q1.abs()),
            sign(self.q2),
            num(self.q2.abs()),
            sign(self.q3),
            num(self.q3.abs())
        )
    }
}

/// Complex number `re + im·i`, viewed as the subfield span{1, i} of the quaternions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<[f64; 2]> for ComplexPair {
    fn from(c: [f64; 2]) -> Self {
        ComplexPair::new(c[0], c[1])
    }
}

impl From<ComplexPair> for [f64; 2] {
    fn from(c: ComplexPair) -> Self {
        [c.re, c.im]
    }
}

impl ComplexPair {
    pub const fn new(re: f64, im: f64) -> Self {
        ComplexPair { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn to_quaternion(self) -> Quaternion {
        self.into()
    }

    pub fn conj(self) -> ComplexPair {
        ComplexPair::new(self.re, -self.im)
    }

    pub fn dist(self, o: ComplexPair) -> f64 {
        (self.re - o.re).hypot(self.im - o.im)
    }
}

impl From<Complex64> for ComplexPair {
    fn from(c: Complex64) -> Self {
        ComplexPair::new(c.re, c.im)
    }
}

impl From<ComplexPair> for Complex64 {
    fn from(c: ComplexPair) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl fmt::Display for ComplexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        match f.precision() {
            Some(p) => write!(f, "{:.p$}{}{:.p$}i", self.re, sign, self.im.abs()),
            None => write!(f, "{}{}{}i", self.re, sign, self.im.abs()),
        }
    }
}
