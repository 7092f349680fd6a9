//! The 2×2 convex move: given orthonormal `u, v` with `⟨Eu,u⟩ = d̃_1`,
//! `⟨Ev,v⟩ = d̃_2`, `⟨Eu,v⟩ = β`, find `e = √α u + √(1−α) s v` with
//! `⟨Ee,e⟩ = d_1`.

use crate::scalar::{abs, max, Real};

use super::MoveError;

/// Solution of a 2×2 move. `complement` is `1 − α` computed without
/// cancellation; `sign` is the phase `s ∈ {−1, +1}` applied to `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoByTwo<T> {
    pub alpha: T,
    pub complement: T,
    pub sign: T,
}

impl<T: Real> TwoByTwo<T> {
    pub fn identity() -> Self {
        Self {
            alpha: T::one(),
            complement: T::zero(),
            sign: -T::one(),
        }
    }
}

/// `g(α) = α d̃_1 + (1−α) d̃_2 + 2 s β √(α(1−α))`, the new value at `u`'s
/// position.
pub fn g<T: Real>(dt1: T, dt2: T, beta: T, m: &TwoByTwo<T>) -> T {
    m.alpha * dt1 + m.complement * dt2 + T::c(2.0) * m.sign * beta * (m.alpha * m.complement).sqrt()
}

/// Tolerance used for bracketing and residual checks of one move.
pub fn move_tol<T: Real>(dt1: T, dt2: T) -> T {
    T::default_rel_tol() * max(T::one(), max(abs(dt1), abs(dt2)))
}

/// Solves `g(α) = d1` on the branch `α ≥ α_0 = (d̃_2 − d_1)/(d̃_2 − d̃_1)`.
///
/// The phase is chosen so that `s·β` has the sign of `d_1 − d̃_1`; then
/// `g(1) = d̃_1` and `g(α_0)` lie on opposite sides of `d_1`. The root is
/// bracketed in the angle `φ` with `α = cos²φ`, which keeps full relative
/// precision of `1 − α = sin²φ` near `α = 1`.
pub fn solve_two_by_two<T: Real>(dt1: T, dt2: T, beta: T, d1: T) -> Result<TwoByTwo<T>, MoveError> {
    let (lo, hi) = if dt1 <= dt2 { (dt1, dt2) } else { (dt2, dt1) };
    if !(lo <= d1 && d1 <= hi) {
        return Err(MoveError::OutOfBracket {
            target: d1.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    if dt1 == dt2 {
        return Err(MoveError::DegeneratePair(dt1.to_f64_lossy()));
    }
    if d1 == dt1 {
        return Ok(TwoByTwo::identity());
    }
    let span = dt2 - dt1;
    let alpha0 = (dt2 - d1) / span;
    let comp0 = (d1 - dt1) / span;
    if beta == T::zero() {
        return Ok(TwoByTwo {
            alpha: alpha0,
            complement: comp0,
            sign: -T::one(),
        });
    }
    let sigma = if d1 > dt1 { T::one() } else { -T::one() };
    let sign = if beta > T::zero() { sigma } else { -sigma };
    // h(φ) = g(cos²φ) − d1 has the sign of dt1 − d1 at φ = 0 and the
    // opposite sign (or zero) at φ0 = atan(√(comp0/alpha0)).
    let phi0 = comp0.sqrt().atan2(alpha0.sqrt());
    let two = T::c(2.0);
    let h = |phi: T| {
        let (s, c) = phi.sin_cos();
        dt1 * c * c + dt2 * s * s + sign * beta * two * s * c - d1
    };
    let neg_at_zero = dt1 < d1;
    let (mut a, mut b) = (T::zero(), phi0);
    for _ in 0..200 {
        let mid = (a + b) / two;
        if mid <= a || mid >= b {
            break;
        }
        let v = h(mid);
        if (v < T::zero()) == neg_at_zero && v != T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    let phi = if abs(h(a)) <= abs(h(b)) { a } else { b };
    let (s, c) = phi.sin_cos();
    Ok(TwoByTwo {
        alpha: c * c,
        complement: s * s,
        sign,
    })
}
