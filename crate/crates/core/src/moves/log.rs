use serde::{Deserialize, Serialize};

use crate::scalar::Real;
use crate::table::{read_rows, write_rows};

use super::MoveError;

/// One executed move on frame slots `(left, right)`: afterwards `left`
/// holds `e = √α u + √(1−α) s v` and `right` holds
/// `ẽ = √(1−α) u − √α s v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMove<T> {
    pub step: usize,
    pub left: usize,
    pub right: usize,
    pub alpha: T,
    /// `1 − α`, kept separately: it carries all the information once `α`
    /// rounds to 1.
    pub complement: T,
    pub sign: T,
    pub beta: T,
    pub target: T,
    pub achieved: T,
    pub renormalized: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MoveLog<T> {
    pub chain_id: usize,
    pub moves: Vec<PairMove<T>>,
    /// Steps whose target differed from the current value but whose α is
    /// indistinguishable from 1.
    pub near_identity_steps: Vec<usize>,
}

const HEADER: [&str; 10] = [
    "step",
    "left_id",
    "right_id",
    "alpha",
    "sign",
    "beta",
    "target",
    "achieved",
    "renormalized",
    "complement",
];

/// CSV row; reals go through `f64`.
#[derive(Serialize, Deserialize)]
struct Row {
    step: usize,
    left_id: usize,
    right_id: usize,
    alpha: f64,
    sign: f64,
    beta: f64,
    target: f64,
    achieved: f64,
    renormalized: u8,
    complement: f64,
}

impl<T: Real> MoveLog<T> {
    pub fn new(chain_id: usize) -> Self {
        Self {
            chain_id,
            moves: Vec::new(),
            near_identity_steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn alphas(&self) -> Vec<T> {
        self.moves.iter().map(|m| m.alpha).collect()
    }

    pub fn to_csv(&self) -> String {
        write_rows(
            &HEADER,
            self.moves.iter().map(|m| Row {
                step: m.step,
                left_id: m.left,
                right_id: m.right,
                alpha: m.alpha.to_f64_lossy(),
                sign: m.sign.to_f64_lossy(),
                beta: m.beta.to_f64_lossy(),
                target: m.target.to_f64_lossy(),
                achieved: m.achieved.to_f64_lossy(),
                renormalized: u8::from(m.renormalized),
                complement: m.complement.to_f64_lossy(),
            }),
        )
    }

    pub fn from_csv(chain_id: usize, text: &str) -> Result<Self, MoveError> {
        let rows: Vec<Row> = read_rows(text, &HEADER).map_err(MoveError::Parse)?;
        let mut log = Self::new(chain_id);
        for row in rows {
            let real = |x: f64, what: &str| {
                T::from_f64(x)
                    .ok_or_else(|| MoveError::Parse(format!("step {}: bad {what}", row.step)))
            };
            log.moves.push(PairMove {
                step: row.step,
                left: row.left_id,
                right: row.right_id,
                alpha: real(row.alpha, "alpha")?,
                sign: real(row.sign, "sign")?,
                beta: real(row.beta, "beta")?,
                target: real(row.target, "target")?,
                achieved: real(row.achieved, "achieved")?,
                renormalized: match row.renormalized {
                    0 => false,
                    1 => true,
                    _ => {
                        return Err(MoveError::Parse(format!(
                            "step {}: bad renormalized",
                            row.step
                        )))
                    }
                },
                complement: real(row.complement, "complement")?,
            });
        }
        Ok(log)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessDiagnostics<T> {
    /// `Π_{i≤k} (1 − α_i)`.
    pub partial_products: Vec<T>,
    /// `Σ_{i≤k} α_i / (1 − α_i)`; infinite after an `α = 1` step.
    pub partial_sums: Vec<T>,
    /// Final partial sum: a lower bound for `1 / Π (1 − α_i)`.
    pub divergence_bound: T,
    /// One-based steps with `α = 1`.
    pub saturated_steps: Vec<usize>,
}

pub fn completeness_diagnostics<T: Real>(
    log: &MoveLog<T>,
) -> Result<CompletenessDiagnostics<T>, MoveError> {
    let mut prod = T::one();
    let mut sum = T::zero();
    let mut out = CompletenessDiagnostics {
        partial_products: Vec::with_capacity(log.len()),
        partial_sums: Vec::with_capacity(log.len()),
        divergence_bound: T::zero(),
        saturated_steps: Vec::new(),
    };
    for (k, m) in log.moves.iter().enumerate() {
        prod = prod * m.complement;
        if m.complement == T::zero() {
            sum = T::infinity();
            out.saturated_steps.push(k + 1);
        } else {
            sum = sum + m.alpha / m.complement;
        }
        // Σ a_i/(1−a_i) ≤ Π (1−a_i)^{-1}
        if sum.is_finite() && sum > prod.recip() * (T::one() + T::c(1e-12)) {
            return Err(MoveError::Internal(format!(
                "partial sum {sum} exceeds inverse product {} at step {}",
                prod.recip(),
                k + 1
            )));
        }
        out.partial_products.push(prod);
        out.partial_sums.push(sum);
    }
    out.divergence_bound = sum;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(step: usize, alpha: f64) -> PairMove<f64> {
        PairMove {
            step,
            left: step,
            right: step + 1,
            alpha,
            complement: 1.0 - alpha,
            sign: -1.0,
            beta: 0.0,
            target: 0.5,
            achieved: 0.5,
            renormalized: step % 2 == 0,
        }
    }

    #[test]
    fn halves() {
        let mut log = MoveLog::new(0);
        log.moves = (1..=10).map(|k| mv(k, 0.5)).collect();
        let d = completeness_diagnostics(&log).unwrap();
        for k in 0..10 {
            assert_eq!(d.partial_products[k], 0.5f64.powi(k as i32 + 1));
            assert_eq!(d.partial_sums[k], (k + 1) as f64);
        }
        let empty = completeness_diagnostics(&MoveLog::<f64>::new(0)).unwrap();
        assert!(empty.partial_products.is_empty());
        assert_eq!(empty.divergence_bound, 0.0);
    }

    #[test]
    fn saturated_is_flagged() {
        let mut log = MoveLog::new(0);
        log.moves = vec![mv(1, 0.5), mv(2, 1.0), mv(3, 0.25)];
        let d = completeness_diagnostics(&log).unwrap();
        assert_eq!(d.saturated_steps, vec![2]);
        assert!(d.partial_sums[2].is_infinite());
        assert_eq!(d.partial_products[1], 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let mut log = MoveLog::new(3);
        log.moves = vec![mv(1, 0.1 + 0.2), mv(2, 1.0 / 3.0)];
        let csv = log.to_csv();
        let back = MoveLog::<f64>::from_csv(3, &csv).unwrap();
        assert_eq!(back.moves, log.moves);
        assert!(MoveLog::<f64>::from_csv(0, "nope\n").is_err());
    }
}
