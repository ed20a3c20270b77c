//! Single-frequency two-port algebra.
//!
//! Transfer (T) parameters use the cascade-as-left-multiplication form
//!
//! ```text
//! [b1]   [t11 t12] [a2]             1   [s12*s21 - s11*s22  s11]
//! [a1] = [t21 t22] [b2]     T  =  ---  [                        ]
//!                                  s21  [      -s22           1 ]
//! ```
//!
//! so that a chain `A` followed by `B` has `T = T_A * T_B`. The inverse
//! conversion needs `t22 != 0`, which is the same condition as `s21 != 0`.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::NetworkError;

/// Smallest |s21| (or |t22|) accepted by the S/T conversions.
pub const SINGULAR_THRESHOLD: f64 = 1e-300;

/// Selector for one of the four two-port S-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SParam {
    S11,
    S21,
    S12,
    S22,
}

impl SParam {
    pub const ALL: [SParam; 4] = [SParam::S11, SParam::S21, SParam::S12, SParam::S22];

    pub fn name(self) -> &'static str {
        match self {
            SParam::S11 => "s11",
            SParam::S21 => "s21",
            SParam::S12 => "s12",
            SParam::S22 => "s22",
        }
    }
}

impl std::str::FromStr for SParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s11" => Ok(SParam::S11),
            "s21" => Ok(SParam::S21),
            "s12" => Ok(SParam::S12),
            "s22" => Ok(SParam::S22),
            other => Err(format!("unknown S-parameter '{other}'")),
        }
    }
}

/// Scattering matrix of a two-port at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPortS {
    pub s11: Complex64,
    pub s21: Complex64,
    pub s12: Complex64,
    pub s22: Complex64,
}

impl TwoPortS {
    pub const fn new(s11: Complex64, s21: Complex64, s12: Complex64, s22: Complex64) -> Self {
        Self { s11, s21, s12, s22 }
    }

    /// Ideal zero-length thru.
    pub fn thru() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(zero, one, one, zero)
    }

    pub fn zero() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::new(zero, zero, zero, zero)
    }

    pub fn get(&self, which: SParam) -> Complex64 {
        match which {
            SParam::S11 => self.s11,
            SParam::S21 => self.s21,
            SParam::S12 => self.s12,
            SParam::S22 => self.s22,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.s11, self.s21, self.s12, self.s22].iter().all(|z| z.is_finite())
    }

    /// Port order reversal.
    pub fn flipped(&self) -> Self {
        Self::new(self.s22, self.s12, self.s21, self.s11)
    }

    pub fn to_t(&self) -> Result<TwoPortT, NetworkError> {
        if self.s21.norm() < SINGULAR_THRESHOLD || !self.s21.is_finite() {
            return Err(NetworkError::SingularConversion("s21 is zero"));
        }
        let inv = 1.0 / self.s21;
        Ok(TwoPortT {
            t11: (self.s12 * self.s21 - self.s11 * self.s22) * inv,
            t12: self.s11 * inv,
            t21: -self.s22 * inv,
            t22: inv,
        })
    }

    /// Largest singular value of the 2x2 matrix. A passive network has it <= 1.
    pub fn max_singular_value(&self) -> f64 {
        // eigenvalues of S^H S: [[p, q], [q*, r]]
        let p = self.s11.norm_sqr() + self.s21.norm_sqr();
        let r = self.s12.norm_sqr() + self.s22.norm_sqr();
        let q = self.s11.conj() * self.s12 + self.s21.conj() * self.s22;
        let half_trace = 0.5 * (p + r);
        let disc = (0.25 * (p - r) * (p - r) + q.norm_sqr()).sqrt();
        (half_trace + disc).sqrt()
    }

    pub fn max_abs_diff(&self, other: &TwoPortS) -> f64 {
        [
            (self.s11 - other.s11).norm(),
            (self.s21 - other.s21).norm(),
            (self.s12 - other.s12).norm(),
            (self.s22 - other.s22).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Reflection seen at port 1 when port 2 is terminated by `gamma`.
    pub fn input_reflection(&self, gamma: Complex64) -> Complex64 {
        self.s11 + self.s12 * self.s21 * gamma / (1.0 - self.s22 * gamma)
    }

    /// Reflection seen at port 2 when port 1 is terminated by `gamma`.
    pub fn output_reflection(&self, gamma: Complex64) -> Complex64 {
        self.s22 + self.s12 * self.s21 * gamma / (1.0 - self.s11 * gamma)
    }
}

/// Transfer matrix of a two-port at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPortT {
    pub t11: Complex64,
    pub t12: Complex64,
    pub t21: Complex64,
    pub t22: Complex64,
}

impl TwoPortT {
    pub const fn new(t11: Complex64, t12: Complex64, t21: Complex64, t22: Complex64) -> Self {
        Self { t11, t12, t21, t22 }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::new(a, zero, zero, b)
    }

    pub fn det(&self) -> Complex64 {
        self.t11 * self.t22 - self.t12 * self.t21
    }

    pub fn trace(&self) -> Complex64 {
        self.t11 + self.t22
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.t11 * k, self.t12 * k, self.t21 * k, self.t22 * k)
    }

    pub fn inverse(&self) -> Result<Self, NetworkError> {
        let det = self.det();
        if det.norm() < SINGULAR_THRESHOLD || !det.is_finite() {
            return Err(NetworkError::SingularConversion("transfer matrix is singular"));
        }
        let inv = 1.0 / det;
        Ok(Self::new(self.t22 * inv, -self.t12 * inv, -self.t21 * inv, self.t11 * inv))
    }

    pub fn to_s(&self) -> Result<TwoPortS, NetworkError> {
        if self.t22.norm() < SINGULAR_THRESHOLD || !self.t22.is_finite() {
            return Err(NetworkError::SingularConversion("t22 is zero"));
        }
        let inv = 1.0 / self.t22;
        Ok(TwoPortS {
            s11: self.t12 * inv,
            s21: inv,
            s12: self.det() * inv,
            s22: -self.t21 * inv,
        })
    }

    pub fn max_abs_diff(&self, other: &TwoPortT) -> f64 {
        [
            (self.t11 - other.t11).norm(),
            (self.t12 - other.t12).norm(),
            (self.t21 - other.t21).norm(),
            (self.t22 - other.t22).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        [self.t11, self.t12, self.t21, self.t22].iter().all(|z| z.is_finite())
    }
}

impl Mul for TwoPortT {
    type Output = TwoPortT;

    fn mul(self, rhs: TwoPortT) -> TwoPortT {
        TwoPortT::new(
            self.t11 * rhs.t11 + self.t12 * rhs.t21,
            self.t11 * rhs.t12 + self.t12 * rhs.t22,
            self.t21 * rhs.t11 + self.t22 * rhs.t21,
            self.t21 * rhs.t12 + self.t22 * rhs.t22,
        )
    }
}

/// S-parameters of `a` followed by `b` at a single frequency.
pub fn cascade_point(a: &TwoPortS, b: &TwoPortS) -> Result<TwoPortS, NetworkError> {
    (a.to_t()? * b.to_t()?).to_s()
}
