//! Independent checks of a construction: orthonormality, attained
//! diagonal, trace bookkeeping, move-log consistency and the completeness
//! defect. Targets come from the problem, never from the logged `achieved`
//! values.

use serde::{Deserialize, Serialize};

use crate::construct::ConstructionResult;
use crate::moves::{Frame, FrameVector, MoveLog};
use crate::operators::{EntryOracle, OperatorError};
use crate::scalar::{abs, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub gram: f64,
    pub diagonal: f64,
    /// Relative to `max(1, Σ |E_{ss}|)` over the consumed slots.
    pub ledger: f64,
    pub replay: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gram: 1e-9,
            diagonal: 1e-9,
            ledger: 1e-8,
            replay: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramCheck {
    pub vectors: usize,
    pub max_deviation: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCheck {
    pub checked: usize,
    pub max_deviation: f64,
    pub worst_slot: Option<usize>,
    pub pass: bool,
}

/// `Σ constructed + Σ residual` against the trace of the consumed slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerCheck {
    pub constructed_sum: f64,
    pub residual_sum: f64,
    pub consumed_sum: f64,
    pub deviation: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayCheck {
    pub moves: usize,
    pub max_deviation: f64,
    pub worst_slot: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub j: usize,
    pub defect: f64,
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub gram: GramCheck,
    pub diagonal: DiagonalCheck,
    pub ledger: LedgerCheck,
    pub replay: ReplayCheck,
    pub defects: Vec<DefectRow>,
    pub tolerances: Tolerances,
    pub pass: bool,
}

/// `max |⟨e_a, e_b⟩ − δ_ab|` over all pairs.
pub fn gram_check<T: Real>(vectors: &[(usize, &FrameVector<T>)], tol: f64) -> GramCheck {
    let mut worst = (0.0, None);
    for (i, (sa, a)) in vectors.iter().enumerate() {
        for (sb, b) in &vectors[i..] {
            let want = if sa == sb { T::one() } else { T::zero() };
            let dev = abs(a.dot(b) - want).to_f64_lossy();
            if !(dev <= worst.0) {
                worst = (dev, Some((*sa, *sb)));
            }
        }
    }
    GramCheck {
        vectors: vectors.len(),
        max_deviation: worst.0,
        worst_pair: worst.1,
        pass: worst.0 <= tol,
    }
}

/// `max |⟨E e_s, e_s⟩ − d_s|` with `d` taken from the problem.
pub fn diagonal_check<T: Real>(
    oracle: &EntryOracle<T>,
    vectors: &[(usize, &FrameVector<T>)],
    d: &[T],
    tol: f64,
) -> Result<DiagonalCheck, OperatorError> {
    let mut worst = (0.0, None);
    for &(slot, v) in vectors {
        let target = d
            .get(slot - 1)
            .copied()
            .ok_or(OperatorError::WindowExceeded {
                index: slot,
                window: d.len(),
            })?;
        let dev = abs(oracle.rayleigh(v)? - target).to_f64_lossy();
        if !(dev <= worst.0) {
            worst = (dev, Some(slot));
        }
    }
    Ok(DiagonalCheck {
        checked: vectors.len(),
        max_deviation: worst.0,
        worst_slot: worst.1,
        pass: worst.0 <= tol,
    })
}

/// The moves only rotate inside the span of the slots they touch, so the
/// Rayleigh quotients of all constructed and residual vectors must add up to
/// the trace of `E` on those slots.
pub fn ledger_check<T: Real>(
    oracle: &EntryOracle<T>,
    constructed: &[(usize, &FrameVector<T>)],
    residual: &[(usize, &FrameVector<T>)],
    rel_tol: f64,
) -> Result<LedgerCheck, OperatorError> {
    let sum = |vs: &[(usize, &FrameVector<T>)]| -> Result<T, OperatorError> {
        vs.iter()
            .try_fold(T::zero(), |acc, (_, v)| Ok(acc + oracle.rayleigh(v)?))
    };
    let (c, r) = (sum(constructed)?, sum(residual)?);
    let mut consumed = T::zero();
    let mut scale = T::one();
    for &(s, _) in constructed.iter().chain(residual) {
        let e = oracle.entry(s, s)?;
        consumed = consumed + e;
        scale = scale + abs(e);
    }
    let deviation = abs(c + r - consumed).to_f64_lossy();
    let scale = scale.to_f64_lossy();
    Ok(LedgerCheck {
        constructed_sum: c.to_f64_lossy(),
        residual_sum: r.to_f64_lossy(),
        consumed_sum: consumed.to_f64_lossy(),
        deviation,
        scale,
        pass: deviation <= rel_tol * scale,
    })
}

/// Replays `logs` (in chain order) from the standard basis and compares with
/// the stored vectors.
pub fn replay_check<T: Real>(
    logs: &[MoveLog<T>],
    stored: &[(usize, &FrameVector<T>)],
    tol: f64,
) -> ReplayCheck {
    let mut frame = Frame::new();
    let mut ordered: Vec<&MoveLog<T>> = logs.iter().collect();
    ordered.sort_by_key(|l| l.chain_id);
    for log in ordered {
        frame.replay(log);
    }
    let mut worst = (0.0, None);
    for &(slot, v) in stored {
        let dev = frame.get(slot).max_abs_diff(v).to_f64_lossy();
        if !(dev <= worst.0) {
            worst = (dev, Some(slot));
        }
    }
    ReplayCheck {
        moves: logs.iter().map(|l| l.len()).sum(),
        max_deviation: worst.0,
        worst_slot: worst.1,
        pass: worst.0 <= tol,
    }
}

/// `1 − Σ_e |⟨f_j, e⟩|²` over the constructed vectors, for `j = 1..=j_max`.
pub fn completeness_defect<T: Real>(constructed: &[&FrameVector<T>], j_max: usize) -> Vec<f64> {
    let mut mass = vec![T::zero(); j_max];
    for v in constructed {
        for &(j, c) in v.entries() {
            if (1..=j_max).contains(&j) {
                mass[j - 1] = mass[j - 1] + c * c;
            }
        }
    }
    mass.into_iter()
        .map(|m| (T::one() - m).to_f64_lossy())
        .collect()
}

/// For one chain on slots `1, 2, …, n+1` (step `k` pairs `k` with `k+1`):
/// `defect_j = α_{j−1} Π_{k=j}^{n} (1 − α_k)` with `α_0 = 1`, and `1`
/// beyond the chain. `None` for any other log shape.
pub fn closed_form_defects<T: Real>(log: &MoveLog<T>, j_max: usize) -> Option<Vec<f64>> {
    let n = log.len();
    if n == 0
        || log
            .moves
            .iter()
            .enumerate()
            .any(|(k, m)| m.left != k + 1 || m.right != k + 2)
    {
        return None;
    }
    let alpha = |k: usize| {
        if k == 0 {
            T::one()
        } else {
            log.moves[k - 1].alpha
        }
    };
    let mut tail = vec![T::one(); n + 2];
    for k in (1..=n).rev() {
        tail[k] = tail[k + 1] * log.moves[k - 1].complement;
    }
    Some(
        (1..=j_max)
            .map(|j| {
                if j <= n + 1 {
                    (alpha(j - 1) * tail[j]).to_f64_lossy()
                } else {
                    1.0
                }
            })
            .collect(),
    )
}

fn pairs<T>(items: impl Iterator<Item = (usize, T)>) -> Vec<(usize, T)> {
    items.collect()
}

/// Runs every check on a construction result against the problem's `d`.
pub fn verify_result<T: Real>(
    oracle: &EntryOracle<T>,
    result: &ConstructionResult<T>,
    d: &[T],
    tol: &Tolerances,
) -> Result<VerificationReport, OperatorError> {
    let constructed = pairs(result.constructed.iter().map(|c| (c.slot, &c.vector)));
    let residual = pairs(result.residuals.iter().map(|r| (r.slot, &r.vector)));
    let all: Vec<_> = constructed.iter().chain(&residual).copied().collect();
    let gram = gram_check(&all, tol.gram);
    let diagonal = diagonal_check(oracle, &constructed, d, tol.diagonal)?;
    let ledger = ledger_check(oracle, &constructed, &residual, tol.ledger)?;
    let replay = replay_check(&result.logs, &all, tol.replay);
    let vecs: Vec<&FrameVector<T>> = constructed.iter().map(|(_, v)| *v).collect();
    let defect = completeness_defect(&vecs, result.window);
    let closed = match result.logs.as_slice() {
        [only] => closed_form_defects(only, result.window),
        _ => None,
    };
    let defects = defect
        .into_iter()
        .enumerate()
        .map(|(i, x)| DefectRow {
            j: i + 1,
            defect: x,
            closed_form: closed.as_ref().map(|c| c[i]),
        })
        .collect();
    let pass = gram.pass && diagonal.pass && ledger.pass && replay.pass;
    Ok(VerificationReport {
        gram,
        diagonal,
        ledger,
        replay,
        defects,
        tolerances: *tol,
        pass,
    })
}

/// Fault injection for testing the verifier.
pub mod faults {
    use super::*;

    /// Flips the sign of the `nth` stored coefficient with `|c| > 1e-6`,
    /// counting over constructed vectors in slot order. Returns the slot.
    pub fn flip_coefficient<T: Real>(
        result: &mut ConstructionResult<T>,
        nth: usize,
    ) -> Option<usize> {
        let mut seen = 0;
        for c in &mut result.constructed {
            let idx: Vec<usize> = c.vector.entries().iter().map(|&(j, _)| j).collect();
            for j in idx {
                let x = c.vector.coeff_mut(j)?;
                if abs(*x) > T::c(1e-6) {
                    if seen == nth {
                        *x = -*x;
                        return Some(c.slot);
                    }
                    seen += 1;
                }
            }
        }
        None
    }

    /// Shifts the `nth` logged α (over all chains, in order) by `delta`,
    /// keeping `α + (1 − α) = 1`. Vectors are left as they were.
    pub fn perturb_alpha<T: Real>(
        result: &mut ConstructionResult<T>,
        nth: usize,
        delta: T,
    ) -> Option<(usize, usize)> {
        let m = result.logs.iter_mut().flat_map(|l| {
            let id = l.chain_id;
            l.moves.iter_mut().map(move |m| (id, m))
        });
        let (id, mv) = m.into_iter().nth(nth)?;
        let a = (mv.alpha + delta).max(T::zero()).min(T::one());
        let a = if a == mv.alpha { mv.alpha - delta } else { a };
        mv.alpha = a;
        mv.complement = T::one() - a;
        Some((id, mv.step))
    }

    /// Recomputes every stored vector from the (possibly perturbed) logs.
    pub fn rederive_vectors<T: Real>(result: &mut ConstructionResult<T>) {
        let mut frame = Frame::new();
        let mut ordered: Vec<&MoveLog<T>> = result.logs.iter().collect();
        ordered.sort_by_key(|l| l.chain_id);
        for log in ordered {
            frame.replay(log);
        }
        for c in &mut result.constructed {
            c.vector = frame.get(c.slot).with_id(c.vector.id.clone());
        }
        for r in &mut result.residuals {
            r.vector = frame.get(r.slot).with_id(r.vector.id.clone());
        }
    }
}
