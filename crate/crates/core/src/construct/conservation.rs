//! Conservation of mass (`liminf δ = 0`): flatten a prefix, splice it into
//! one index, interpolate δ between its strict-decrease records and run one
//! decreasing-δ rotation chain.

use serde_json::Value;

use crate::moves::StepInput;
use crate::operators::EntryOracle;
use crate::scalar::{abs, Real};
use crate::sequences::{
    averaged_interpolant, decdel_tail_data, delta_profile, flat_prefix_transform,
    strict_decrease_records, SequenceSpec, TailRegime,
};

use super::workspace::Workspace;
use super::{
    assign_block, positions, record, ConstructError, ConstructOptions, ConstructionResult, Local,
    Route,
};

const PENDING_TOL: f64 = 1e-10;
const ALPHA_TOL: f64 = 1e-10;

/// Runs the decreasing-δ chain: pending vector starts at local 1, step `k`
/// feeds local `k + 1` and finishes local `k` at `d_k`. Returns the residual
/// slot.
///
/// For a diagonal oracle the pending value after step `k` must be
/// `λ̃_{k+1} = λ_{k+1} − δ_k` and the move must satisfy `α_k ≥ α̃_k`; both
/// are asserted.
pub(crate) fn decdel_run<T: Real>(
    ws: &mut Workspace<'_, T>,
    local: &Local<T>,
    steps: usize,
    stage: &str,
) -> Result<usize, ConstructError> {
    let lam = SequenceSpec::new(
        local.lambda[..=steps].to_vec(),
        TailRegime::ExplicitOnly,
        "λ",
    )?;
    let d = SequenceSpec::derived(
        local.d[..steps].to_vec(),
        TailRegime::ConservationOfMass,
        "d",
    )?;
    let tail = decdel_tail_data(&lam, &d)?;
    let check = ws.oracle.is_diagonal();
    let mut log = ws.open_log();
    let chain_id = log.chain_id;
    let mut pending = local.slots[0];
    for k in 1..=steps {
        let next = local.slots[k];
        let input = StepInput {
            left: pending,
            right: next,
            target: local.d[k - 1],
        };
        let mv = ws.step(&mut log, input, stage)?;
        ws.set_target(pending, local.d[k - 1]);
        pending = next;
        if !check {
            continue;
        }
        if mv.alpha < tail.alpha_tilde[k - 1] - T::c(ALPHA_TOL) {
            return Err(ConstructError::Hypothesis {
                stage: stage.into(),
                reason: format!(
                    "step {k}: α = {} below α̃ = {}",
                    mv.alpha,
                    tail.alpha_tilde[k - 1]
                ),
            });
        }
        let want = tail.lambda_tilde[k];
        let got = ws.value(pending)?;
        if abs(got - want) > T::c(PENDING_TOL) * T::one().max(abs(want)) {
            return Err(ConstructError::Hypothesis {
                stage: stage.into(),
                reason: format!("step {k}: pending value {got}, expected λ̃ = {want}"),
            });
        }
    }
    ws.close_log(log, stage);
    ws.set_pending(pending, chain_id);
    Ok(pending)
}

/// Chain of `steps` moves on slots `1..=steps+1` for a pair with strictly
/// positive, nonincreasing δ.
pub fn decdel_construct<T: Real>(
    oracle: &EntryOracle<T>,
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    steps: usize,
) -> Result<ConstructionResult<T>, ConstructError> {
    if d.regime() != TailRegime::ConservationOfMass {
        return Err(crate::sequences::SequenceError::RegimeMismatch {
            expected: "conservation".into(),
            found: d.regime().label().into(),
        }
        .into());
    }
    let w = steps + 1;
    let opts = ConstructOptions::with_window(w);
    opts.resolve_window(oracle, lambda, d)?;
    let local = Local::prefix(lambda.values(), d.values(), w);
    let mut ws = Workspace::new(oracle);
    let stage = "decdel";
    ws.record(record::<T>(
        "assign",
        stage,
        &local.slots[..steps],
        None,
        &[],
        &[],
        &local.d[..steps],
        vec![],
    ));
    decdel_run(&mut ws, &local, steps, stage)?;
    ws.param("steps", steps);
    ws.finish(Route::Decdel, w, d.values())
}

/// `N` for the flat-prefix stage: `1` if `d_1 < λ_2` already, otherwise the
/// least `N > M` (with `λ_M` the first value above `λ_1`) such that `δ_N` is
/// a running minimum below `λ_M − λ_1`.
fn lim0_choose_n<T: Real>(
    local: &Local<T>,
    deltas: &[T],
    stage: &str,
) -> Result<(usize, usize), ConstructError> {
    let (lam, l) = (&local.lambda, local.len());
    if local.d[0] < lam[1] {
        return Ok((1, 1));
    }
    let m = lam
        .iter()
        .position(|&x| x > lam[0])
        .map(|i| i + 1)
        .ok_or_else(|| ConstructError::Hypothesis {
            stage: stage.into(),
            reason: "λ is constant on the window".into(),
        })?;
    let gap = lam[m - 1] - lam[0];
    let mut run_min = deltas[0];
    for n in 1..l {
        run_min = run_min.min(deltas[n - 1]);
        if n > m && deltas[n - 1] <= run_min && deltas[n - 1] < gap {
            return Ok((m, n));
        }
    }
    Err(ConstructError::WindowTooSmall {
        stage: stage.into(),
        reason: format!("no running minimum of δ below λ_M − λ_1 = {gap} after M = {m}"),
    })
}

/// Conservation pipeline on a local problem with `δ > 0` throughout.
pub(crate) fn lim0_run<T: Real>(
    ws: &mut Workspace<'_, T>,
    local: &Local<T>,
    opts: &ConstructOptions,
    stage: &str,
) -> Result<(), ConstructError> {
    let l = local.len();
    if l < 2 {
        return Err(ConstructError::WindowTooSmall {
            stage: stage.into(),
            reason: format!("{l} index left"),
        });
    }
    let lam = SequenceSpec::new(local.lambda.clone(), TailRegime::ExplicitOnly, "λ")?;
    let d = SequenceSpec::derived(local.d.clone(), TailRegime::ConservationOfMass, "d")?;
    let profile = delta_profile(&lam, &d, l)?;
    if let Some(k) = (1..=l).find(|&k| profile.delta(k) <= T::zero()) {
        return Err(ConstructError::Hypothesis {
            stage: stage.into(),
            reason: format!("δ_{k} = {} is not positive", profile.delta(k)),
        });
    }
    let (m, n) = lim0_choose_n(local, &profile.deltas, stage)?;
    ws.param(&format!("{stage}.M"), m);
    ws.param(&format!("{stage}.N"), n);

    let flat = flat_prefix_transform(&lam, &d, n)?;
    let dt = flat.values();
    let regime = vec![("regime", Value::from("conservation"))];
    let idx_flat = ws.record(record(
        "flat_prefix",
        stage,
        &local.slots,
        local.d_source,
        &local.lambda,
        &local.d,
        dt,
        [vec![("n", Value::from(n))], regime.clone()].concat(),
    ));

    // Splice: index 1 carries the flattened block, then N+1, N+2, ….
    let keep: Vec<usize> = std::iter::once(1).chain(n + 1..=l).collect();
    let mut spliced = Local {
        d: keep.iter().map(|&p| dt[p - 1]).collect(),
        ..local.select(&keep)
    };
    let idx_splice = ws.record(record::<T>(
        "splice",
        stage,
        &spliced.slots,
        Some(idx_flat),
        &[],
        &[],
        &spliced.d,
        vec![("n", Value::from(n))],
    ));
    spliced.d_source = Some(idx_splice);
    spliced.pos = (1..=keep.len()).collect();
    let mu = SequenceSpec::new(spliced.lambda.clone(), TailRegime::ExplicitOnly, "μ")?;
    let c = SequenceSpec::derived(spliced.d.clone(), TailRegime::ConservationOfMass, "c")?;
    let lp = spliced.len();
    let cp = delta_profile(&mu, &c, lp)?;
    let limit = (lp - 1).min(opts.steps_cap());
    let records: Vec<usize> = strict_decrease_records(&cp)
        .into_iter()
        .filter(|&r| r <= limit)
        .collect();
    if records.is_empty() {
        return Err(ConstructError::WindowTooSmall {
            stage: stage.into(),
            reason: "no room for a chain step".into(),
        });
    }
    let mj = *records.last().unwrap();
    ws.param(&format!("{stage}.records"), records.clone());
    let interp = averaged_interpolant(&mu, &c, &records)?;
    let idx_interp = ws.record(record(
        "averaged_interpolant",
        stage,
        &spliced.slots,
        Some(idx_splice),
        &spliced.lambda,
        &spliced.d,
        interp.values(),
        vec![("records", Value::from(records.clone()))],
    ));

    // Chain on the interpolated targets, residual at m_J + 1.
    let chain_local = spliced.select(&(1..=mj + 1).collect::<Vec<_>>());
    let chain_local = Local {
        d: interp.values().to_vec(),
        ..chain_local.retarget(chain_local.d.clone(), idx_interp)
    };
    ws.record(record::<T>(
        "assign",
        stage,
        &chain_local.slots[..mj],
        Some(idx_interp),
        &[],
        &[],
        interp.values(),
        vec![("positions", positions(1..=mj))],
    ));
    decdel_run(ws, &chain_local, mj, stage)?;

    // Undo the interpolation block by block.
    for pair in records.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        assign_block(
            ws,
            stage,
            &spliced.slots[a..b],
            &spliced.d[a..b],
            Some(idx_splice),
            positions(a + 1..=b),
        )?;
    }
    // Undo the flattening on the first N slots.
    assign_block(
        ws,
        stage,
        &local.slots[..n],
        &local.d[..n],
        local.d_source,
        local.source_positions(0..n),
    )
}

/// Conservation-of-mass construction on the whole window.
pub fn lim0_construct<T: Real>(
    oracle: &EntryOracle<T>,
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    opts: &ConstructOptions,
) -> Result<ConstructionResult<T>, ConstructError> {
    let w = opts.resolve_window(oracle, lambda, d)?;
    let mut ws = Workspace::new(oracle);
    lim0_run(
        &mut ws,
        &Local::prefix(lambda.values(), d.values(), w),
        opts,
        "lim0",
    )?;
    ws.finish(Route::ConservationOfMass, w, d.values())
}
