use crate::scalar::{scaled_tol, Real};

use super::{SequenceError, Verdict};

/// Concave increasing maps used with the Hardy–Littlewood–Pólya check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HlpPhi<T> {
    /// `Φ(x) = −1/x`: checks `{1/b} ≺ {1/a}`.
    NegInverse,
    /// `Φ(x) = −e^{−tx}`: checks `{e^{−t b}} ≺ {e^{−t a}}`.
    ExpDecay(T),
}

impl<T: Real> HlpPhi<T> {
    fn apply(&self, x: T) -> T {
        match *self {
            HlpPhi::NegInverse => -x.recip(),
            HlpPhi::ExpDecay(t) => -(-t * x).exp(),
        }
    }
}

/// For nondecreasing `a ≺ b` (weak, order-preserving prefix sums), checks
/// `Σ_{i≤n} Φ(a_i) ≤ Σ_{i≤n} Φ(b_i)` for every prefix.
pub fn hlp_transform_check<T: Real>(
    a: &[T],
    b: &[T],
    phi: HlpPhi<T>,
) -> Result<Verdict, SequenceError> {
    if a.len() != b.len() {
        return Err(SequenceError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if let HlpPhi::NegInverse = phi {
        for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
            if x <= T::zero() || y <= T::zero() {
                return Err(SequenceError::NonPositive { index: i + 1 });
            }
        }
    }
    for (name, s) in [("a", a), ("b", b)] {
        if let Some(i) = s.windows(2).position(|w| w[1] < w[0]) {
            return Err(SequenceError::NotNondecreasing {
                name: name.into(),
                index: i + 2,
            });
        }
    }
    let rel = T::default_rel_tol();
    let (mut sa, mut sb) = (T::zero(), T::zero());
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        sa = sa + x;
        sb = sb + y;
        if sa > sb + scaled_tol(rel, sb) {
            return Err(SequenceError::NotMajorized { index: i + 1 });
        }
    }
    let (mut pa, mut pb) = (T::zero(), T::zero());
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        pa = pa + phi.apply(x);
        pb = pb + phi.apply(y);
        if pa > pb + scaled_tol(rel, pb) {
            return Ok(Verdict::Violation {
                first_violation_index: i + 1,
            });
        }
    }
    Ok(Verdict::Ok)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceDiagnostic<T> {
    /// `(t_n − t_{n+1}) / t_{n+1}` for `n = 1..len−1`.
    pub terms: Vec<T>,
    pub partial_sums: Vec<T>,
    /// `log t_1 − log t_{k+1}`, never above the matching partial sum.
    pub log_lower_bounds: Vec<T>,
}

pub fn divergence_diagnostic<T: Real>(t: &[T]) -> Result<DivergenceDiagnostic<T>, SequenceError> {
    if let Some(i) = t.iter().position(|&x| x <= T::zero()) {
        return Err(SequenceError::NonPositive { index: i + 1 });
    }
    if let Some(i) = t.windows(2).position(|w| w[1] > w[0]) {
        return Err(SequenceError::Precondition(format!(
            "t is not nonincreasing at index {}",
            i + 2
        )));
    }
    let n = t.len().saturating_sub(1);
    let mut out = DivergenceDiagnostic {
        terms: Vec::with_capacity(n),
        partial_sums: Vec::with_capacity(n),
        log_lower_bounds: Vec::with_capacity(n),
    };
    let mut acc = T::zero();
    for k in 0..n {
        let term = (t[k] - t[k + 1]) / t[k + 1];
        acc = acc + term;
        out.terms.push(term);
        out.partial_sums.push(acc);
        out.log_lower_bounds.push(t[0].ln() - t[k + 1].ln());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_example() {
        assert!(
            hlp_transform_check(&[1.0, 4.0], &[2.0, 3.0], HlpPhi::NegInverse)
                .unwrap()
                .is_ok()
        );
        assert!(
            hlp_transform_check(&[1.0, 4.0], &[1.0, 4.0], HlpPhi::NegInverse)
                .unwrap()
                .is_ok()
        );
        assert!(matches!(
            hlp_transform_check(&[0.0, 4.0], &[2.0, 3.0], HlpPhi::NegInverse),
            Err(SequenceError::NonPositive { index: 1 })
        ));
        assert!(matches!(
            hlp_transform_check(&[2.0, 4.0], &[1.0, 3.0], HlpPhi::NegInverse),
            Err(SequenceError::NotMajorized { index: 1 })
        ));
    }

    #[test]
    fn heat_direction() {
        for t in [0.1, 1.0, 10.0] {
            assert!(
                hlp_transform_check(&[0.0, 4.0], &[2.0, 3.0], HlpPhi::ExpDecay(t))
                    .unwrap()
                    .is_ok()
            );
        }
    }

    #[test]
    fn divergence_geometric() {
        let t: Vec<f64> = (1..=20).map(|n| 2f64.powi(1 - n)).collect();
        let dd = divergence_diagnostic(&t).unwrap();
        for (k, s) in dd.partial_sums.iter().enumerate() {
            assert_eq!(*s, (k + 1) as f64);
            assert!(dd.log_lower_bounds[k] <= *s);
        }
        let dd = divergence_diagnostic(&[3.0; 5]).unwrap();
        assert!(dd.terms.iter().all(|&x| x == 0.0));
        assert!(divergence_diagnostic(&[1.0, 0.0]).is_err());
    }
}
