//! Scalar abstractions.
//!
//! Sequence algebra (partial sums, majorization, the sequence transforms) only
//! needs field operations and an order, so it is generic over [`Scalar`], which
//! is implemented for `f32`, `f64` and the exact rationals `Ratio<i64>` /
//! `Ratio<i128>` (plus the octuple-precision [`F256`] behind the `f256`
//! feature). Everything that takes square roots (rotations, the 2x2
//! solver, constructions) requires [`Real`].

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

#[cfg(feature = "f256")]
mod wide;
#[cfg(feature = "f256")]
pub use wide::F256;

/// An ordered field element usable by the sequence algebra.
pub trait Scalar:
    Num
    + Copy
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + std::ops::Neg<Output = Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// `true` when arithmetic is exact, in which case every default
    /// tolerance is zero.
    const EXACT: bool;

    /// Default relative tolerance for zero detection and inequality checks.
    fn default_rel_tol() -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion used for reporting only.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Absolute value without going through `Signed`/`Float` (which would make
/// method calls ambiguous for types implementing both).
#[inline]
pub fn abs<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

#[inline]
pub fn max<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[inline]
pub fn min<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// A real floating point scalar.
pub trait Real: Scalar + Float {
    /// Numeric constant conversion, panics on non-representable input.
    fn c(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("constant representable")
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn default_rel_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn default_rel_tol() -> Self {
        1e-5
    }
}

impl Real for f64 {}
impl Real for f32 {}

macro_rules! exact_ratio {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            const EXACT: bool = true;
            fn default_rel_tol() -> Self {
                Ratio::from_integer(0)
            }
        }
    };
}

exact_ratio!(i64);
exact_ratio!(i128);

/// Tolerance scaled by `max(1, |scale|)`.
#[inline]
pub fn scaled_tol<T: Scalar>(rel: T, scale: T) -> T {
    rel * max(T::one(), abs(scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_types_have_zero_tolerance() {
        assert_eq!(<Ratio<i64>>::default_rel_tol(), Ratio::from_integer(0));
        assert!(<Ratio<i128> as Scalar>::EXACT);
        assert!(!<f64 as Scalar>::EXACT);
        assert_eq!(scaled_tol(1e-12, 5.0), 5e-12);
        assert_eq!(scaled_tol(1e-12, -0.5), 1e-12);
    }

    #[test]
    fn helpers() {
        assert_eq!(abs(-Ratio::new(1i64, 3)), Ratio::new(1, 3));
        assert_eq!(max(2.0, 3.0), 3.0);
        assert_eq!(min(2.0, 3.0), 2.0);
    }
}
