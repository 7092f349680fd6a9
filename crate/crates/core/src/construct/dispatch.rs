use serde::Serialize;
use serde_json::Value;

use crate::operators::EntryOracle;
use crate::scalar::Real;
use crate::sequences::{delta_profile, zero_partition, BlockPartition, SequenceSpec, TailRegime};

use super::conservation::lim0_run;
use super::vanishing::{limalpha_run, nondec_run, tonondec_run};
use super::workspace::Workspace;
use super::{assign_block, ConstructError, ConstructOptions, ConstructionResult, Local, Route};

/// Finite blocks split off at the zeros of δ, plus where the remaining
/// infinite problem starts (`None` when nothing remains to hand on).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixReduction {
    pub partition: BlockPartition,
    pub suffix_start: Option<usize>,
}

/// Splits the window at the zeros of δ. Under the zeros regime every block
/// is finite and the open tail stays unresolved; otherwise the suffix after
/// the last zero is an infinite problem with `δ > 0`.
pub fn reduce_prefix<T: Real>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    window: usize,
) -> Result<PrefixReduction, ConstructError> {
    let profile = delta_profile(lambda, d, window)?;
    if let Some(index) = profile.first_negative() {
        return Err(ConstructError::MajorizationFailure { index });
    }
    let partition = zero_partition(&profile);
    let suffix_start = match d.regime() {
        TailRegime::ZerosInfinitelyOften => None,
        _ => {
            let s = partition.blocks().last().map_or(1, |b| b.1 + 1);
            (s <= window).then_some(s)
        }
    };
    Ok(PrefixReduction {
        partition,
        suffix_start,
    })
}

/// Picks the construction from `d`'s declared regime and runs it on the
/// window.
pub fn d2d_dispatch<T: Real>(
    oracle: &EntryOracle<T>,
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    opts: &ConstructOptions,
) -> Result<ConstructionResult<T>, ConstructError> {
    let w = opts.resolve_window(oracle, lambda, d)?;
    let regime = d.regime();
    if let Some(a) = regime.alpha() {
        if !a.to_f64_lossy().is_finite() {
            return Err(ConstructError::UnhandledRegime(format!(
                "declared liminf δ = {a}; unbounded δ needs pointwise domination"
            )));
        }
    }
    let profile = delta_profile(lambda, d, w)?;
    if let Some(index) = profile.first_negative() {
        return Err(ConstructError::MajorizationFailure { index });
    }
    let full = Local::prefix(lambda.values(), d.values(), w);
    let mut ws = Workspace::new(oracle);
    ws.param("regime", regime.label());
    let route = match regime {
        TailRegime::ExplicitOnly => {
            if !profile.is_zero(w) {
                return Err(ConstructError::RegimeInconsistent(format!(
                    "a finite problem needs equal traces, but δ_{w} = {}",
                    profile.delta(w)
                )));
            }
            assign_block(&mut ws, "finite", &full.slots, &full.d, None, Value::Null)?;
            Route::Finite
        }
        TailRegime::PointwiseDominated => {
            nondec_run(&mut ws, &full, opts, "nondec")?;
            Route::PointwiseDominated
        }
        _ => {
            let red = reduce_prefix(lambda, d, w)?;
            if regime == TailRegime::ZerosInfinitelyOften && red.partition.blocks().is_empty() {
                return Err(ConstructError::RegimeInconsistent(
                    "δ has no zero on the window".into(),
                ));
            }
            ws.param(
                "prefix_blocks",
                serde_json::to_value(red.partition.blocks()).unwrap_or_default(),
            );
            ws.param("suffix_start", red.suffix_start);
            for &(a, b) in red.partition.blocks() {
                assign_block(
                    &mut ws,
                    "reduce_prefix",
                    &full.slots[a - 1..b],
                    &full.d[a - 1..b],
                    None,
                    Value::Null,
                )?;
            }
            if let (TailRegime::ZerosInfinitelyOften, Some(t)) = (regime, red.partition.open_tail())
            {
                ws.notes.push(format!(
                    "indices {t}..={w} after the last zero are left untouched"
                ));
            }
            let suffix = red
                .suffix_start
                .map(|s| full.select(&(s..=w).collect::<Vec<_>>()));
            match (regime, suffix) {
                (TailRegime::ZerosInfinitelyOften, _) => Route::ZerosInfinitelyOften,
                (TailRegime::ConservationOfMass, Some(s)) => {
                    lim0_run(&mut ws, &s, opts, "lim0")?;
                    Route::ConservationOfMass
                }
                (TailRegime::EventuallyAbove(a), Some(s)) => {
                    limalpha_run(&mut ws, &s, a, opts, "limalpha")?;
                    Route::EventuallyAbove
                }
                (TailRegime::DipsInfinitelyOften(a), Some(s)) => {
                    tonondec_run(&mut ws, &s, a, opts, "tonondec")?;
                    Route::DipsInfinitelyOften
                }
                (r, _) => {
                    ws.notes.push(format!(
                        "δ vanishes at the end of the window; nothing left for the {r} stage"
                    ));
                    match r {
                        TailRegime::EventuallyAbove(_) => Route::EventuallyAbove,
                        TailRegime::DipsInfinitelyOften(_) => Route::DipsInfinitelyOften,
                        _ => Route::ConservationOfMass,
                    }
                }
            }
        }
    };
    ws.finish(route, w, d.values())
}
