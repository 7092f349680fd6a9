//! `F256`: a `Copy` octuple-precision float (237-bit significand) usable as
//! a [`Real`]. Needed when the inputs themselves are not representable in
//! `f64`, e.g. `n − 1 − 2^{−n}` for `n` beyond about 50.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use f256::f256;
use num_traits::{Float, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use super::{Real, Scalar};

#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct F256(pub f256);

impl F256 {
    pub fn from_f64(x: f64) -> Self {
        F256(f256::from(x))
    }

    /// `2^{−n}`, exact.
    pub fn exp2_neg(n: u32) -> Self {
        F256(f256::ONE.div_pow2(n))
    }
}

impl fmt::Debug for F256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Display for F256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for F256 {
            type Output = F256;
            #[inline]
            fn $m(self, rhs: F256) -> F256 {
                F256(self.0.$m(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);
binop!(Rem, rem);

impl Neg for F256 {
    type Output = F256;
    #[inline]
    fn neg(self) -> F256 {
        F256(-self.0)
    }
}

impl Zero for F256 {
    fn zero() -> Self {
        F256(f256::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0.eq_zero()
    }
}

impl One for F256 {
    fn one() -> Self {
        F256(f256::ONE)
    }
}

impl Num for F256 {
    type FromStrRadixErr = <f256 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f256::from_str_radix(s, radix).map(F256)
    }
}

impl ToPrimitive for F256 {
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(&self.0.trunc()).ok()
    }
    fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0.trunc()).ok()
    }
    /// Correctly rounded through the exact decimal expansion.
    fn to_f64(&self) -> Option<f64> {
        let x = self.0;
        if x.is_nan() {
            return Some(f64::NAN);
        }
        if x.is_infinite() {
            return Some(if x.is_sign_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            });
        }
        format!("{x:e}").parse().ok()
    }
}

impl FromPrimitive for F256 {
    fn from_i64(n: i64) -> Option<Self> {
        Some(F256(f256::from(n)))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(F256(f256::from(n)))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(F256(f256::from(n)))
    }
}

impl NumCast for F256 {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        let f = n.to_f64()?;
        match n.to_i64() {
            Some(i) if i as f64 == f => Some(F256(f256::from(i))),
            _ => Some(F256(f256::from(f))),
        }
    }
}

impl Float for F256 {
    fn nan() -> Self {
        F256(f256::NAN)
    }
    fn infinity() -> Self {
        F256(f256::INFINITY)
    }
    fn neg_infinity() -> Self {
        F256(f256::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        F256(f256::NEG_ZERO)
    }
    fn min_value() -> Self {
        F256(f256::MIN)
    }
    fn min_positive_value() -> Self {
        F256(f256::MIN_POSITIVE)
    }
    fn epsilon() -> Self {
        F256(f256::EPSILON)
    }
    fn max_value() -> Self {
        F256(f256::MAX)
    }
    fn is_nan(self) -> bool {
        self.0.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.0.is_finite()
    }
    fn is_normal(self) -> bool {
        self.0.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.0.classify()
    }
    fn floor(self) -> Self {
        F256(self.0.floor())
    }
    fn ceil(self) -> Self {
        F256(self.0.ceil())
    }
    fn round(self) -> Self {
        F256(self.0.round())
    }
    fn trunc(self) -> Self {
        F256(self.0.trunc())
    }
    fn fract(self) -> Self {
        F256(self.0.fract())
    }
    fn abs(self) -> Self {
        F256(self.0.abs())
    }
    fn signum(self) -> Self {
        F256(self.0.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.0.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.0.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        F256(self.0.mul_add(a.0, b.0))
    }
    fn recip(self) -> Self {
        F256(self.0.recip())
    }
    fn powi(self, n: i32) -> Self {
        F256(self.0.powi(n))
    }
    fn powf(self, n: Self) -> Self {
        F256(self.0.powf(&n.0))
    }
    fn sqrt(self) -> Self {
        F256(self.0.sqrt())
    }
    fn exp(self) -> Self {
        F256(self.0.exp())
    }
    fn exp2(self) -> Self {
        F256(self.0.exp2())
    }
    fn ln(self) -> Self {
        F256(self.0.ln())
    }
    fn log(self, base: Self) -> Self {
        F256(self.0.log(&base.0))
    }
    fn log2(self) -> Self {
        F256(self.0.log2())
    }
    fn log10(self) -> Self {
        F256(self.0.log10())
    }
    fn max(self, other: Self) -> Self {
        F256(self.0.max(other.0))
    }
    fn min(self, other: Self) -> Self {
        F256(self.0.min(other.0))
    }
    fn abs_sub(self, other: Self) -> Self {
        match self.partial_cmp(&other) {
            Some(Ordering::Greater) => self - other,
            _ => Self::zero(),
        }
    }
    fn cbrt(self) -> Self {
        F256(self.0.cbrt())
    }
    fn hypot(self, other: Self) -> Self {
        F256(self.0.hypot(other.0))
    }
    fn sin(self) -> Self {
        F256(self.0.sin())
    }
    fn cos(self) -> Self {
        F256(self.0.cos())
    }
    fn tan(self) -> Self {
        F256(self.0.tan())
    }
    fn asin(self) -> Self {
        F256(self.0.asin())
    }
    fn acos(self) -> Self {
        F256(self.0.acos())
    }
    fn atan(self) -> Self {
        F256(self.0.atan())
    }
    fn atan2(self, other: Self) -> Self {
        F256(self.0.atan2(&other.0))
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.0.sin_cos();
        (F256(s), F256(c))
    }
    fn exp_m1(self) -> Self {
        F256(self.0.exp_m1())
    }
    fn ln_1p(self) -> Self {
        F256(self.0.ln_1p())
    }
    fn sinh(self) -> Self {
        let e = self.exp();
        (e - e.recip()) / Self::c(2.0)
    }
    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()) / Self::c(2.0)
    }
    fn tanh(self) -> Self {
        let e2 = (self * Self::c(2.0)).exp_m1();
        e2 / (e2 + Self::c(2.0))
    }
    fn asinh(self) -> Self {
        let a = self.abs();
        let r = (a + (a * a + Self::one()).sqrt()).ln();
        if self.is_sign_negative() {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        (self + (self * self - Self::one()).sqrt()).ln()
    }
    fn atanh(self) -> Self {
        ((Self::one() + self) / (Self::one() - self)).ln() / Self::c(2.0)
    }
    /// Decoded from the nearest `f64`; lossy.
    fn integer_decode(self) -> (u64, i16, i8) {
        self.to_f64().unwrap_or(f64::NAN).integer_decode()
    }
}

impl Scalar for F256 {
    const EXACT: bool = false;
    /// About `2^{−219}`: far above the 237-bit rounding, far below the
    /// `2^{−200}` gaps of the geometric example.
    fn default_rel_tol() -> Self {
        F256::from_f64(1e-66)
    }
}

impl Real for F256 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_conversion() {
        let x = F256::from_f64(199.0) - F256::exp2_neg(200);
        assert!(x < F256::from_f64(199.0));
        assert_eq!(x.to_f64(), Some(199.0));
        assert_eq!(F256::exp2_neg(3).to_f64(), Some(0.125));
        assert_eq!(
            <F256 as NumCast>::from(0.5f64).unwrap(),
            F256::from_f64(0.5)
        );
        assert_eq!(<F256 as NumCast>::from(7usize).unwrap().to_i64(), Some(7));
        let two = F256::c(2.0);
        assert!((two.sqrt() * two.sqrt() - two).abs() < F256::c(1e-70));
        let (s, c) = F256::c(0.3).sin_cos();
        assert!((s * s + c * c - F256::one()).abs() < F256::c(1e-70));
        assert_eq!(F256::c(-2.5).abs(), F256::c(2.5));
        assert!(F256::nan().to_f64().unwrap().is_nan());
    }
}
