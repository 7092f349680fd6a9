//! Finite realization: turn an orthonormal family with diagonal `d̃` into
//! one with any diagonal `d ≼ d̃`, spanning the same space, by a planned
//! sequence of 2×2 moves.
//!
//! Planning runs in two phases. Phase one applies T-transforms to the
//! nonincreasing rearrangements (largest surplus rank, then the first
//! deficit rank after it), fixing one rank per move while keeping both the
//! order and the majorization. Phase two swaps values between positions
//! until every index carries its own target. Each phase takes at most
//! `n − 1` moves.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::moves::{execute_move, Frame, FrameVector, MoveError, MoveLog, StepInput};
use crate::operators::{EntryOracle, OperatorError};
use crate::scalar::{abs, scaled_tol, Real, Scalar};
use crate::sequences::{
    check_finite_majorization_tol, majorization_tolerance, BlockPartition, SequenceError, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchurHornError {
    #[error(
        "target is not majorized by the current diagonal on block {start}..={end} (prefix {index})"
    )]
    NotMajorized {
        start: usize,
        end: usize,
        index: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("plan needs {moves} moves for {n} entries")]
    PlanTooLong { moves: usize, n: usize },
    #[error("block {start}..={end}: {source}")]
    Move {
        start: usize,
        end: usize,
        #[source]
        source: MoveError,
    },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Oracle(#[from] OperatorError),
}

/// One planned move: `amount` leaves `from` and arrives at `to`. The entry at
/// `settle` ends exactly at `settle_value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transfer<T> {
    pub from: usize,
    pub to: usize,
    pub amount: T,
    #[serde(skip)]
    pub settle: usize,
    #[serde(skip)]
    pub settle_value: T,
}

impl<T: Scalar> Transfer<T> {
    pub fn partner(&self) -> usize {
        if self.settle == self.from {
            self.to
        } else {
            self.from
        }
    }
}

/// Transfers over one-based positions of `start`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferPlan<T> {
    pub transfers: Vec<Transfer<T>>,
    #[serde(skip)]
    pub start: Vec<T>,
    #[serde(skip)]
    pub target: Vec<T>,
    /// Number of transfers in the rank phase; the rest are value swaps.
    #[serde(skip)]
    pub rank_phase_len: usize,
}

impl<T: Scalar> TransferPlan<T> {
    pub fn len(&self) -> usize {
        self.transfers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transfers.is_empty()
    }

    /// Applies the transfers to `start`, returning every intermediate state
    /// (the first is `start` itself).
    pub fn trajectory(&self) -> Vec<Vec<T>> {
        let mut cur = self.start.clone();
        let mut out = vec![cur.clone()];
        for t in &self.transfers {
            cur[t.from - 1] = cur[t.from - 1] - t.amount;
            cur[t.to - 1] = cur[t.to - 1] + t.amount;
            cur[t.settle - 1] = t.settle_value;
            out.push(cur.clone());
        }
        out
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string(self).expect("plan serializes")
    }
}

fn order_desc<T: Scalar>(v: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap_or(Ordering::Equal));
    idx
}

/// Plans moves taking `dtilde` to `d`; requires `{d} ≼ {d̃}`.
pub fn robin_hood_plan<T: Scalar>(
    dtilde: &[T],
    d: &[T],
) -> Result<TransferPlan<T>, SchurHornError> {
    let tol = majorization_tolerance(dtilde);
    robin_hood_plan_tol(dtilde, d, tol)
}

pub fn robin_hood_plan_tol<T: Scalar>(
    dtilde: &[T],
    d: &[T],
    tol: T,
) -> Result<TransferPlan<T>, SchurHornError> {
    let n = dtilde.len();
    if let Verdict::Violation {
        first_violation_index,
    } = check_finite_majorization_tol(dtilde, d, tol)?
    {
        return Err(SchurHornError::NotMajorized {
            start: 1,
            end: n,
            index: first_violation_index,
        });
    }
    let pos = order_desc(dtilde);
    let want = order_desc(d);
    let target_sorted: Vec<T> = want.iter().map(|&i| d[i]).collect();
    let mut cur = dtilde.to_vec();
    let mut transfers = Vec::new();

    // Phase one, on ranks: cur[pos[r]] is the r-th largest current value.
    loop {
        let surplus = (0..n).rev().find(|&r| cur[pos[r]] > target_sorted[r] + tol);
        let Some(j) = surplus else { break };
        let Some(k) = (j + 1..n).find(|&r| cur[pos[r]] < target_sorted[r] - tol) else {
            break;
        };
        let (pj, pk) = (pos[j], pos[k]);
        let give = cur[pj] - target_sorted[j];
        let take = target_sorted[k] - cur[pk];
        let (amount, settle, value) = if give <= take {
            (give, pj, target_sorted[j])
        } else {
            (take, pk, target_sorted[k])
        };
        cur[pj] = cur[pj] - amount;
        cur[pk] = cur[pk] + amount;
        cur[settle] = value;
        transfers.push(Transfer {
            from: pj + 1,
            to: pk + 1,
            amount,
            settle: settle + 1,
            settle_value: value,
        });
    }
    let rank_phase_len = transfers.len();
    // Snap ranks that agree within tolerance.
    for r in 0..n {
        cur[pos[r]] = target_sorted[r];
    }

    // Phase two: route each value to its own index by swaps.
    for i in 0..n {
        if cur[i] == d[i] {
            continue;
        }
        let Some(j) = (i + 1..n).find(|&j| cur[j] == d[i] && cur[j] != d[j]) else {
            continue;
        };
        let (hi, lo) = if cur[i] > cur[j] { (i, j) } else { (j, i) };
        let amount = cur[hi] - cur[lo];
        transfers.push(Transfer {
            from: hi + 1,
            to: lo + 1,
            amount,
            settle: i + 1,
            settle_value: d[i],
        });
        cur.swap(i, j);
    }
    if transfers.len() > 2 * n {
        return Err(SchurHornError::PlanTooLong {
            moves: transfers.len(),
            n,
        });
    }
    Ok(TransferPlan {
        transfers,
        start: dtilde.to_vec(),
        target: d.to_vec(),
        rank_phase_len,
    })
}

/// The compression `⟨E e_i, e_l⟩` of the oracle to a block of frame slots.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCompression<T> {
    pub indices: Vec<usize>,
    /// Row-major `n × n`.
    pub entries: Vec<T>,
}

impl<T: Real> BlockCompression<T> {
    pub fn measure(
        oracle: &EntryOracle<T>,
        frame: &Frame<T>,
        indices: &[usize],
    ) -> Result<Self, OperatorError> {
        let n = indices.len();
        let vecs: Vec<FrameVector<T>> = indices.iter().map(|&i| frame.get(i)).collect();
        let mut entries = vec![T::zero(); n * n];
        for a in 0..n {
            for b in a..n {
                let x = oracle.compressed_entry(&vecs[a], &vecs[b])?;
                entries[a * n + b] = x;
                entries[b * n + a] = x;
            }
        }
        Ok(Self {
            indices: indices.to_vec(),
            entries,
        })
    }

    pub fn diagonal(&self) -> Vec<T> {
        let n = self.indices.len();
        (0..n).map(|i| self.entries[i * n + i]).collect()
    }
}

/// Realizes `d` on the frame slots `indices`, appending moves to `log`.
pub fn realize_block<T: Real>(
    oracle: &EntryOracle<T>,
    frame: &mut Frame<T>,
    indices: &[usize],
    d: &[T],
    log: &mut MoveLog<T>,
) -> Result<(), SchurHornError> {
    if indices.len() != d.len() {
        return Err(SchurHornError::LengthMismatch {
            left: indices.len(),
            right: d.len(),
        });
    }
    let span = (
        indices.iter().copied().min().unwrap_or(0),
        indices.iter().copied().max().unwrap_or(0),
    );
    let mut dtilde = Vec::with_capacity(indices.len());
    for &i in indices {
        dtilde.push(oracle.rayleigh(&frame.get(i))?);
    }
    let scale = dtilde
        .iter()
        .chain(d)
        .fold(T::zero(), |m, &x| m.max(abs(x)));
    let tol = scaled_tol(T::default_rel_tol(), scale);
    let plan = robin_hood_plan_tol(&dtilde, d, tol).map_err(|e| match e {
        SchurHornError::NotMajorized { index, .. } => SchurHornError::NotMajorized {
            start: span.0,
            end: span.1,
            index,
        },
        other => other,
    })?;
    for t in &plan.transfers {
        let input = StepInput {
            left: indices[t.settle - 1],
            right: indices[t.partner() - 1],
            target: t.settle_value,
        };
        execute_move(oracle, frame, input, log).map_err(|source| SchurHornError::Move {
            start: span.0,
            end: span.1,
            source,
        })?;
    }
    Ok(())
}

/// Realizes a diagonal on a standalone family: `vectors` take the slots
/// `1..=n` of a scratch frame.
pub fn realize_vectors<T: Real>(
    oracle: &EntryOracle<T>,
    vectors: &[FrameVector<T>],
    d: &[T],
) -> Result<(Vec<FrameVector<T>>, MoveLog<T>), SchurHornError> {
    let mut frame = Frame::new();
    for (k, v) in vectors.iter().enumerate() {
        frame.set(k + 1, v.clone());
    }
    let slots: Vec<usize> = (1..=vectors.len()).collect();
    let mut log = MoveLog::new(0);
    realize_block(oracle, &mut frame, &slots, d, &mut log)?;
    Ok((slots.iter().map(|&s| frame.get(s)).collect(), log))
}

/// Realizes each block independently; `targets[j]` is the target on
/// `partition.blocks()[j]`. Chain ids start at `first_chain_id`.
pub fn block_apply<T: Real>(
    oracle: &EntryOracle<T>,
    frame: &mut Frame<T>,
    partition: &BlockPartition,
    targets: &[Vec<T>],
    first_chain_id: usize,
) -> Result<Vec<MoveLog<T>>, SchurHornError> {
    if partition.blocks().len() != targets.len() {
        return Err(SchurHornError::LengthMismatch {
            left: partition.blocks().len(),
            right: targets.len(),
        });
    }
    let mut logs = Vec::new();
    for (k, (&(a, b), t)) in partition.blocks().iter().zip(targets).enumerate() {
        let slots: Vec<usize> = (a..=b).collect();
        let mut log = MoveLog::new(first_chain_id + k);
        realize_block(oracle, frame, &slots, t, &mut log)?;
        logs.push(log);
    }
    Ok(logs)
}

/// Realizes `d` as a diagonal of `diag(λ)`.
pub fn eigen_to_diagonal<T: Real>(
    lambda: &[T],
    d: &[T],
) -> Result<(Vec<FrameVector<T>>, MoveLog<T>), SchurHornError> {
    let oracle = EntryOracle::diagonal(lambda.to_vec());
    let basis: Vec<FrameVector<T>> = (1..=lambda.len()).map(FrameVector::basis).collect();
    realize_vectors(&oracle, &basis, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amounts(p: &TransferPlan<f64>) -> Vec<(usize, usize, f64)> {
        p.transfers
            .iter()
            .map(|t| (t.from, t.to, t.amount))
            .collect()
    }

    #[test]
    fn plan_examples() {
        assert_eq!(
            amounts(&robin_hood_plan(&[3., 1.], &[2., 2.]).unwrap()),
            vec![(1, 2, 1.)]
        );
        assert_eq!(
            amounts(&robin_hood_plan(&[5., 3., 1.], &[3., 3., 3.]).unwrap()),
            vec![(1, 3, 2.)]
        );
        assert_eq!(
            amounts(&robin_hood_plan(&[5., 3., 1.], &[4., 3., 2.]).unwrap()),
            vec![(1, 3, 1.)]
        );
        assert!(robin_hood_plan(&[3., 1.], &[4., 0.]).is_err());
    }

    #[test]
    fn plan_handles_permutations() {
        let p = robin_hood_plan(&[3., 1.], &[1., 3.]).unwrap();
        assert_eq!(amounts(&p), vec![(1, 2, 2.)]);
        assert_eq!(p.trajectory().last().unwrap(), &vec![1., 3.]);
    }

    #[test]
    fn plan_json() {
        let p = robin_hood_plan(&[3., 1.], &[2., 2.]).unwrap();
        assert_eq!(
            p.to_json(),
            r#"{"transfers":[{"from":1,"to":2,"amount":1.0}]}"#
        );
    }

    #[test]
    fn two_by_two_dense() {
        let oracle = EntryOracle::dense(&[vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let basis = vec![FrameVector::basis(1), FrameVector::basis(2)];
        let (v, log) = realize_vectors(&oracle, &basis, &[1.0, 1.0]).unwrap();
        assert_eq!(log.len(), 1);
        assert!((log.moves[0].alpha - (1.0 + 0.5f64.sqrt()) / 2.0).abs() < 1e-12);
        for e in &v {
            assert!((oracle.rayleigh(e).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_and_halves() {
        let (v, log) = eigen_to_diagonal(&[2.0f64, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(log.moves[0].alpha, 0.5);
        let r = 0.5f64.sqrt();
        assert!((v[0].coeff(1).abs() - r).abs() < 1e-15 && (v[0].coeff(2).abs() - r).abs() < 1e-15);
        let (v, log) = eigen_to_diagonal(&[3.0, 1.0], &[3.0, 1.0]).unwrap();
        assert!(log.is_empty());
        assert_eq!(v[0].entries(), FrameVector::basis(1).entries());
    }

    #[test]
    fn block_apply_cases() {
        let oracle = EntryOracle::diagonal(vec![0.0f64, 2.0, 5.0, 7.0]);
        let mut frame = Frame::new();
        let empty = BlockPartition::empty(4);
        assert!(block_apply(&oracle, &mut frame, &empty, &[], 1)
            .unwrap()
            .is_empty());
        let singles = BlockPartition::new(vec![(1, 1), (2, 2)], 4).unwrap();
        let logs = block_apply(&oracle, &mut frame, &singles, &[vec![0.0], vec![2.0]], 1).unwrap();
        assert!(logs.iter().all(|l| l.is_empty()));
        assert!(!frame.is_touched(1));
        let bad =
            block_apply(&oracle, &mut frame, &singles, &[vec![1.0], vec![2.0]], 1).unwrap_err();
        assert!(matches!(
            bad,
            SchurHornError::NotMajorized {
                start: 1,
                end: 1,
                ..
            }
        ));
        let two = BlockPartition::new(vec![(1, 2), (3, 4)], 4).unwrap();
        let logs = block_apply(
            &oracle,
            &mut frame,
            &two,
            &[vec![1.0, 1.0], vec![6.0, 6.0]],
            7,
        )
        .unwrap();
        assert_eq!(
            logs.iter().map(|l| l.chain_id).collect::<Vec<_>>(),
            vec![7, 8]
        );
        for (slot, want) in [(1, 1.0), (2, 1.0), (3, 6.0), (4, 6.0)] {
            assert!((oracle.rayleigh(&frame.get(slot)).unwrap() - want).abs() < 1e-12);
        }
    }
}
