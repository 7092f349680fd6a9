use std::cmp::Ordering;

use serde::Serialize;

use crate::scalar::{abs, scaled_tol, Scalar};

use super::{delta_profile, SequenceError, SequenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    /// One-based prefix length of the first failing inequality.
    Violation {
        first_violation_index: usize,
    },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// `δ_k ≥ −rel·max(1, |δ_k|)` for every `k ≤ K` (exact comparison for
/// exact scalars).
pub fn check_weak_majorization<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    k: usize,
) -> Result<Verdict, SequenceError> {
    check_weak_majorization_tol(lambda, d, k, T::default_rel_tol())
}

pub fn check_weak_majorization_tol<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    k: usize,
    rel: T,
) -> Result<Verdict, SequenceError> {
    let p = delta_profile(lambda, d, k)?;
    Ok(p.deltas
        .iter()
        .position(|&v| v < -scaled_tol(rel, v))
        .map_or(Verdict::Ok, |i| Verdict::Violation {
            first_violation_index: i + 1,
        }))
}

/// Default absolute tolerance for finite majorization of `values`.
pub fn majorization_tolerance<T: Scalar>(values: &[T]) -> T {
    if T::EXACT {
        return T::zero();
    }
    let scale = values.iter().fold(T::zero(), |acc, &v| acc + abs(v));
    scaled_tol(T::default_rel_tol(), scale)
}

fn sorted_desc<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    s
}

/// Whether `{d} ≼ {d̃}`: decreasing rearrangements have dominated prefix
/// sums and equal totals.
pub fn check_finite_majorization<T: Scalar>(
    dtilde: &[T],
    d: &[T],
) -> Result<Verdict, SequenceError> {
    let tol = majorization_tolerance(dtilde);
    check_finite_majorization_tol(dtilde, d, tol)
}

pub fn check_finite_majorization_tol<T: Scalar>(
    dtilde: &[T],
    d: &[T],
    tol: T,
) -> Result<Verdict, SequenceError> {
    if dtilde.len() != d.len() {
        return Err(SequenceError::LengthMismatch {
            left: dtilde.len(),
            right: d.len(),
        });
    }
    let (a, b) = (sorted_desc(dtilde), sorted_desc(d));
    let (mut sa, mut sb) = (T::zero(), T::zero());
    for k in 0..a.len() {
        sa = sa + a[k];
        sb = sb + b[k];
        if sb > sa + tol {
            return Ok(Verdict::Violation {
                first_violation_index: k + 1,
            });
        }
    }
    if abs(sa - sb) > tol {
        return Ok(Verdict::Violation {
            first_violation_index: a.len(),
        });
    }
    Ok(Verdict::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::TailRegime;

    fn spec(v: &[f64]) -> SequenceSpec<f64> {
        SequenceSpec::new(v.to_vec(), TailRegime::ExplicitOnly, "s").unwrap()
    }

    #[test]
    fn weak() {
        let ok = check_weak_majorization(&spec(&[0., 1., 4.]), &spec(&[1., 4., 9.]), 3).unwrap();
        assert!(ok.is_ok());
        let bad = check_weak_majorization(&spec(&[1., 2.]), &spec(&[0., 5.]), 2).unwrap();
        assert_eq!(
            bad,
            Verdict::Violation {
                first_violation_index: 1
            }
        );
        let s = spec(&[2., 3., 5.]);
        assert!(check_weak_majorization(&s, &s, 3).unwrap().is_ok());
    }

    #[test]
    fn finite() {
        assert!(check_finite_majorization(&[3., 1.], &[2., 2.])
            .unwrap()
            .is_ok());
        assert!(check_finite_majorization(&[5., 3., 1.], &[3., 3., 3.])
            .unwrap()
            .is_ok());
        assert_eq!(
            check_finite_majorization(&[3., 1.], &[4., 0.]).unwrap(),
            Verdict::Violation {
                first_violation_index: 1
            }
        );
        assert_eq!(
            check_finite_majorization(&[3., 1.], &[2., 1.]).unwrap(),
            Verdict::Violation {
                first_violation_index: 2
            }
        );
        assert!(check_finite_majorization(&[1.], &[1., 2.]).is_err());
    }
}
