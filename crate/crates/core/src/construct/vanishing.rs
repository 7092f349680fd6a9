//! Vanishing and escaping mass: pointwise-dominated chains, the `liminf δ = α`
//! shift and the dips reduction to a nondecreasing δ.

use serde_json::Value;

use crate::moves::StepInput;
use crate::operators::EntryOracle;
use crate::scalar::{abs, Real};
use crate::sequences::{
    delta_profile, limalpha_choose_n, limalpha_shift, running_tail_minima, tonondec_transform,
    SequenceError, SequenceSpec, TailRegime,
};

use super::conservation::lim0_run;
use super::workspace::Workspace;
use super::{
    assign_block, record, ChainState, ConstructError, ConstructOptions, ConstructionResult, Local,
    Route,
};

const CHAIN_TOL: f64 = 1e-10;

/// Next chain index after `last`: unused, with at least one unused index
/// strictly between, and `λ'_j > 2 d'_last` for the shifted values.
fn next_index<T: Real>(
    local: &Local<T>,
    used: &[bool],
    last: usize,
    d_last: T,
    shift: T,
) -> Option<usize> {
    let mut gap = 0;
    for j in last + 1..=local.len() {
        if used[j - 1] {
            continue;
        }
        if gap > 0 && local.lambda[j - 1] - shift > T::c(2.0) * (d_last - shift) {
            return Some(j);
        }
        gap += 1;
    }
    None
}

/// Pointwise-dominated pipeline: chains `i_1 < i_2 < …` each raise the
/// value at `i_k` to `d_{i_k}` and pass the rest on; every chain leaves
/// unused indices behind it.
pub(crate) fn nondec_run<T: Real>(
    ws: &mut Workspace<'_, T>,
    local: &Local<T>,
    opts: &ConstructOptions,
    stage: &str,
) -> Result<(), ConstructError> {
    let l = local.len();
    if let Some(i) = (0..l).find(|&i| local.d[i] < local.lambda[i]) {
        return Err(ConstructError::NotDominated {
            index: local.slots[i],
        });
    }
    let shift = local.lambda.iter().fold(T::zero(), |m, &x| m.min(x));
    let check = ws.oracle.is_diagonal();
    let mut used = vec![false; l];
    let mut moved_any = false;
    for chain_no in 0..opts.chain_cap {
        let Some(start) = used.iter().position(|u| !u).map(|i| i + 1) else {
            break;
        };
        let mut idx = vec![start];
        let mut x = vec![local.lambda[start - 1]];
        used[start - 1] = true;
        while idx.len() <= opts.steps_cap() {
            let last = *idx.last().unwrap();
            let d_last = local.d[last - 1];
            let Some(j) = next_index(local, &used, last, d_last, shift) else {
                break;
            };
            used[j - 1] = true;
            x.push(local.lambda[j - 1] + *x.last().unwrap() - d_last);
            idx.push(j);
        }
        let k = idx.len();
        let end = idx[k - 1];
        if k == 1 && x[0] != local.d[end - 1] {
            if chain_no == 0 && !moved_any {
                return Err(ConstructError::WindowTooSmall {
                    stage: stage.into(),
                    reason: format!("no admissible second index for a chain starting at {start}"),
                });
            }
            used[start - 1] = false;
            break;
        }
        let alpha_tilde: Vec<T> = (0..k - 1)
            .map(|i| {
                let next = local.lambda[idx[i + 1] - 1];
                (next - local.d[idx[i] - 1]) / (next - x[i])
            })
            .collect();
        let mut log = ws.open_log();
        let chain_id = log.chain_id;
        for i in 0..k - 1 {
            let (a, b) = (idx[i], idx[i + 1]);
            let target = local.d[a - 1];
            let tol = T::c(CHAIN_TOL) * T::one().max(abs(local.lambda[b - 1]));
            if !(x[i] <= target + tol && target < x[i + 1] && x[i + 1] <= local.lambda[b - 1] + tol)
            {
                return Err(ConstructError::Hypothesis {
                    stage: stage.into(),
                    reason: format!(
                        "chain {chain_id}: interlacing fails between indices {a} and {b}"
                    ),
                });
            }
            let input = StepInput {
                left: local.slots[a - 1],
                right: local.slots[b - 1],
                target,
            };
            let mv = ws.step(&mut log, input, stage)?;
            ws.set_target(local.slots[a - 1], target);
            if check {
                let got = ws.value(local.slots[b - 1])?;
                if abs(got - x[i + 1]) > tol || mv.alpha < alpha_tilde[i] - T::c(CHAIN_TOL) {
                    return Err(ConstructError::Hypothesis {
                        stage: stage.into(),
                        reason: format!(
                            "chain {chain_id}, step {}: pending value {got} (expected {}), α = {} (α̃ = {})",
                            i + 1,
                            x[i + 1],
                            mv.alpha,
                            alpha_tilde[i]
                        ),
                    });
                }
            }
        }
        moved_any |= k > 1;
        let end_slot = local.slots[end - 1];
        let finished = if x[k - 1] == local.d[end - 1] {
            k
        } else {
            k - 1
        };
        if finished == k {
            ws.set_target(end_slot, local.d[end - 1]);
        } else {
            ws.set_pending(end_slot, chain_id);
        }
        ws.close_log(log, stage);
        let done: Vec<usize> = idx[..finished].to_vec();
        ws.record(record::<T>(
            "assign",
            stage,
            &done.iter().map(|&i| local.slots[i - 1]).collect::<Vec<_>>(),
            local.d_source,
            &[],
            &[],
            &done.iter().map(|&i| local.d[i - 1]).collect::<Vec<_>>(),
            if local.d_source.is_some() {
                vec![(
                    "positions",
                    Value::from(done.iter().map(|&i| local.pos[i - 1]).collect::<Vec<_>>()),
                )]
            } else {
                vec![]
            },
        ));
        ws.chains.push(ChainState {
            chain_id,
            slots: idx.iter().map(|&i| local.slots[i - 1]).collect(),
            indices: idx,
            x_values: x,
            alpha_tilde,
        });
    }
    // Indices no chain visited but whose value already matches.
    let idle: Vec<usize> = (1..=l)
        .filter(|&i| !used[i - 1] && local.lambda[i - 1] == local.d[i - 1])
        .collect();
    if !idle.is_empty() {
        let slots: Vec<usize> = idle.iter().map(|&i| local.slots[i - 1]).collect();
        let targets: Vec<T> = idle.iter().map(|&i| local.d[i - 1]).collect();
        let pos = Value::from(idle.iter().map(|&i| local.pos[i - 1]).collect::<Vec<_>>());
        for (&s, &t) in slots.iter().zip(&targets) {
            if ws.target_of(s).is_none() {
                ws.set_target(s, t);
            }
        }
        let params = if local.d_source.is_some() {
            vec![("positions", pos)]
        } else {
            vec![]
        };
        ws.record(record::<T>(
            "assign",
            stage,
            &slots,
            local.d_source,
            &[],
            &[],
            &targets,
            params,
        ));
    }
    let left = used.iter().filter(|u| !**u).count() - idle.len();
    if left > 0 {
        log::debug!("{stage}: {left} indices left for later chains");
    }
    Ok(())
}

pub fn nondec_construct<T: Real>(
    oracle: &EntryOracle<T>,
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    opts: &ConstructOptions,
) -> Result<ConstructionResult<T>, ConstructError> {
    let w = opts.resolve_window(oracle, lambda, d)?;
    let mut ws = Workspace::new(oracle);
    nondec_run(
        &mut ws,
        &Local::prefix(lambda.values(), d.values(), w),
        opts,
        "nondec",
    )?;
    ws.param("chains", ws.chains.len());
    ws.finish(Route::PointwiseDominated, w, d.values())
}

/// `liminf δ = α > 0`: shift `α/N` off the first `N` targets, run the
/// conservation pipeline, then pointwise-dominated chains from the shifted
/// targets back to `d`.
pub(crate) fn limalpha_run<T: Real>(
    ws: &mut Workspace<'_, T>,
    local: &Local<T>,
    alpha: T,
    opts: &ConstructOptions,
    stage: &str,
) -> Result<(), ConstructError> {
    let l = local.len();
    let lam = SequenceSpec::new(local.lambda.clone(), TailRegime::ExplicitOnly, "λ")?;
    let d = SequenceSpec::derived(local.d.clone(), TailRegime::EventuallyAbove(alpha), "d")?;
    let profile = delta_profile(&lam, &d, l)?;
    let (m, n) = limalpha_choose_n(&profile, alpha)?;
    ws.param(&format!("{stage}.M"), m);
    ws.param(&format!("{stage}.N"), n);
    ws.param(&format!("{stage}.alpha"), alpha.to_f64_lossy());
    let shifted = limalpha_shift(&lam, &d, alpha, n)?;
    let idx = ws.record(record(
        "limalpha_shift",
        stage,
        &local.slots,
        local.d_source,
        &local.lambda,
        &local.d,
        shifted.values(),
        vec![
            ("alpha", Value::from(alpha.to_f64_lossy())),
            ("n", Value::from(n)),
        ],
    ));
    let sub = local.retarget(shifted.values().to_vec(), idx);
    lim0_run(ws, &sub, opts, &format!("{stage}.lim0"))?;
    if alpha == T::zero() {
        return Ok(());
    }
    let done: Vec<usize> = (1..=l)
        .filter(|&p| ws.target_of(local.slots[p - 1]) == Some(sub.d[p - 1]))
        .collect();
    let back = Local {
        lambda: done.iter().map(|&p| sub.d[p - 1]).collect(),
        ..local.select(&done)
    };
    nondec_run(ws, &back, opts, &format!("{stage}.nondec"))
}

fn regime_alpha<T: Real>(d: &SequenceSpec<T>, expected: &str) -> Result<T, ConstructError> {
    match (d.regime(), expected) {
        (TailRegime::EventuallyAbove(a), "eventually_above")
        | (TailRegime::DipsInfinitelyOften(a), "dips") => Ok(a),
        (r, _) => Err(SequenceError::RegimeMismatch {
            expected: expected.into(),
            found: r.label().into(),
        }
        .into()),
    }
}

pub fn limalpha_construct<T: Real>(
    oracle: &EntryOracle<T>,
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    opts: &ConstructOptions,
) -> Result<ConstructionResult<T>, ConstructError> {
    let alpha = regime_alpha(d, "eventually_above")?;
    let w = opts.resolve_window(oracle, lambda, d)?;
    let mut ws = Workspace::new(oracle);
    limalpha_run(
        &mut ws,
        &Local::prefix(lambda.values(), d.values(), w),
        alpha,
        opts,
        "limalpha",
    )?;
    ws.finish(Route::EventuallyAbove, w, d.values())
}

/// Dips below `liminf δ`: move each block's mass onto its certified tail
/// minimum, run pointwise-dominated chains to those targets, then undo the
/// transform on every block the chains completed.
pub(crate) fn tonondec_run<T: Real>(
    ws: &mut Workspace<'_, T>,
    local: &Local<T>,
    alpha: T,
    opts: &ConstructOptions,
    stage: &str,
) -> Result<(), ConstructError> {
    let l = local.len();
    let lam = SequenceSpec::new(local.lambda.clone(), TailRegime::ExplicitOnly, "λ")?;
    let d = SequenceSpec::derived(local.d.clone(), TailRegime::DipsInfinitelyOften(alpha), "d")?;
    let profile = delta_profile(&lam, &d, l)?;
    let minima = running_tail_minima(&profile, opts.guard)?;
    ws.param(&format!("{stage}.tail_minima"), minima.clone());
    let out = tonondec_transform(&lam, &d, &minima)?;
    let idx = ws.record(record(
        "tonondec",
        stage,
        &local.slots,
        local.d_source,
        &local.lambda,
        &local.d,
        out.values(),
        vec![
            ("tail_minima", Value::from(minima.clone())),
            ("guard", Value::from(opts.guard)),
        ],
    ));
    let sub = local.retarget(out.values().to_vec(), idx);
    nondec_run(ws, &sub, opts, &format!("{stage}.nondec"))?;
    let mut prev = 0;
    for &m in &minima {
        let block = prev..m;
        prev = m;
        let complete = block
            .clone()
            .all(|i| ws.target_of(local.slots[i]) == Some(sub.d[i]));
        if !complete {
            ws.notes.push(format!(
                "{stage}: block {}..={} not completed by the chains",
                block.start + 1,
                m
            ));
            continue;
        }
        assign_block(
            ws,
            stage,
            &local.slots[block.clone()],
            &local.d[block.clone()],
            local.d_source,
            local.source_positions(block),
        )?;
    }
    Ok(())
}

pub fn tonondec_construct<T: Real>(
    oracle: &EntryOracle<T>,
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    opts: &ConstructOptions,
) -> Result<ConstructionResult<T>, ConstructError> {
    let alpha = regime_alpha(d, "dips")?;
    let w = opts.resolve_window(oracle, lambda, d)?;
    let mut ws = Workspace::new(oracle);
    tonondec_run(
        &mut ws,
        &Local::prefix(lambda.values(), d.values(), w),
        alpha,
        opts,
        "tonondec",
    )?;
    ws.finish(Route::DipsInfinitelyOften, w, d.values())
}
