use std::collections::BTreeMap;

use crate::operators::EntryOracle;
use crate::scalar::{abs, Real};

use super::log::{MoveLog, PairMove};
use super::solver::{g, move_tol, solve_two_by_two, TwoByTwo};
use super::{FrameVector, MoveError};

const ORTHO_TOL: f64 = 1e-10;
const RENORM_TOL: f64 = 1e-12;

/// Slot-addressed orthonormal family. Slot `i` holds `f_i` until a move
/// writes to it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame<T> {
    slots: BTreeMap<usize, FrameVector<T>>,
}

impl<T: Real> Frame<T> {
    pub fn new() -> Self {
        Self {
            slots: BTreeMap::new(),
        }
    }

    pub fn get(&self, slot: usize) -> FrameVector<T> {
        self.slots
            .get(&slot)
            .cloned()
            .unwrap_or_else(|| FrameVector::basis(slot))
    }

    pub fn get_ref(&self, slot: usize) -> Option<&FrameVector<T>> {
        self.slots.get(&slot)
    }

    pub fn set(&mut self, slot: usize, v: FrameVector<T>) {
        self.slots.insert(slot, v.with_id(format!("e{slot}")));
    }

    pub fn is_touched(&self, slot: usize) -> bool {
        self.slots.contains_key(&slot)
    }

    /// Touched slots in increasing order.
    pub fn touched(&self) -> impl Iterator<Item = (usize, &FrameVector<T>)> {
        self.slots.iter().map(|(&k, v)| (k, v))
    }

    /// Re-applies logged moves, in order, with the logged α, `1 − α`, sign
    /// and renormalization flags.
    pub fn replay(&mut self, log: &MoveLog<T>) {
        for m in &log.moves {
            let u = self.get(m.left);
            let v = self.get(m.right);
            let (e, mut et) = rotate(
                &u,
                &v,
                &TwoByTwo {
                    alpha: m.alpha,
                    complement: m.complement,
                    sign: m.sign,
                },
            );
            if m.renormalized {
                et = et.normalized();
            }
            self.set(m.left, e);
            self.set(m.right, et);
        }
    }
}

fn rotate<T: Real>(
    u: &FrameVector<T>,
    v: &FrameVector<T>,
    m: &TwoByTwo<T>,
) -> (FrameVector<T>, FrameVector<T>) {
    let (a, c) = (m.alpha.sqrt(), m.complement.sqrt());
    let e = u.combine(a, v, c * m.sign, "e");
    let et = u.combine(c, v, -a * m.sign, "e~");
    (e, et)
}

/// `e = √α u + √(1−α) s v`, `ẽ = √(1−α) u − √α s v` for orthonormal `u, v`.
pub fn apply_pair_move<T: Real>(
    u: &FrameVector<T>,
    v: &FrameVector<T>,
    alpha: T,
    sign: T,
) -> Result<(FrameVector<T>, FrameVector<T>), MoveError> {
    let m = TwoByTwo {
        alpha,
        complement: T::one() - alpha,
        sign,
    };
    check_orthonormal(u, v)?;
    Ok(rotate(u, v, &m))
}

fn check_orthonormal<T: Real>(u: &FrameVector<T>, v: &FrameVector<T>) -> Result<(), MoveError> {
    let dev = abs(u.norm_sq() - T::one())
        .max(abs(v.norm_sq() - T::one()))
        .max(abs(u.dot(v)));
    if dev > T::c(ORTHO_TOL) {
        return Err(MoveError::NotOrthonormal(dev.to_f64_lossy()));
    }
    Ok(())
}

/// One move driving the value at `left` to `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInput<T> {
    pub left: usize,
    pub right: usize,
    pub target: T,
}

/// Measures the 2×2 compression on slots `(left, right)`, solves for the
/// target and applies the move to `frame`, appending it to `log`.
///
/// A target outside the pair's range by at most the move tolerance is
/// clamped onto the range; anything further is a bracketing failure.
pub fn execute_move<T: Real>(
    oracle: &EntryOracle<T>,
    frame: &mut Frame<T>,
    input: StepInput<T>,
    log: &mut MoveLog<T>,
) -> Result<PairMove<T>, MoveError> {
    let step = log.moves.len() + 1;
    let u = frame.get(input.left);
    let v = frame.get(input.right);
    check_orthonormal(&u, &v)?;
    let dt1 = oracle.rayleigh(&u)?;
    let dt2 = oracle.rayleigh(&v)?;
    let beta = oracle.compressed_entry(&u, &v)?;
    let tol = move_tol(dt1, dt2);
    let (lo, hi) = if dt1 <= dt2 { (dt1, dt2) } else { (dt2, dt1) };
    let mut t = input.target;
    if t < lo - tol || t > hi + tol {
        return Err(MoveError::Bracketing {
            step,
            dt1: dt1.to_f64_lossy(),
            dt2: dt2.to_f64_lossy(),
            target: t.to_f64_lossy(),
        });
    }
    t = t.max(lo).min(hi);
    let m = if t == dt1 || dt1 == dt2 {
        TwoByTwo::identity()
    } else {
        solve_two_by_two(dt1, dt2, beta, t)?
    };
    if m.complement == T::zero() && input.target != dt1 {
        log.near_identity_steps.push(step);
    }
    let (e, mut et) = rotate(&u, &v, &m);
    let renormalized = abs(et.norm() - T::one()) > T::c(RENORM_TOL);
    if renormalized {
        et = et.normalized();
    }
    frame.set(input.left, e);
    frame.set(input.right, et);
    let mv = PairMove {
        step,
        left: input.left,
        right: input.right,
        alpha: m.alpha,
        complement: m.complement,
        sign: m.sign,
        beta,
        target: input.target,
        achieved: g(dt1, dt2, beta, &m),
        renormalized,
    };
    log.moves.push(mv);
    Ok(mv)
}

/// Rotation chain: the pending vector starts in `start`; step `k` pairs it
/// with slot `feed[k]`, finishes the vector at the pending slot with value
/// `targets[k]`, and leaves the new pending vector in `feed[k]`.
///
/// Returns the slot of the final pending (residual) vector.
pub fn chain_execute<T: Real>(
    oracle: &EntryOracle<T>,
    frame: &mut Frame<T>,
    start: usize,
    feed: &[usize],
    targets: &[T],
    max_steps: usize,
    log: &mut MoveLog<T>,
) -> Result<usize, MoveError> {
    if feed.len() != targets.len() {
        return Err(MoveError::FeedMismatch {
            feed: feed.len(),
            targets: targets.len(),
        });
    }
    if feed.len() > max_steps {
        return Err(MoveError::MaxSteps {
            requested: feed.len(),
            max: max_steps,
        });
    }
    let mut pending = start;
    for (&next, &target) in feed.iter().zip(targets) {
        execute_move(
            oracle,
            frame,
            StepInput {
                left: pending,
                right: next,
                target,
            },
            log,
        )?;
        pending = next;
    }
    Ok(pending)
}
