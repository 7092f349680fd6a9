use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::moves::{FrameVector, MoveLog};
use crate::sequences::{
    averaged_interpolant, flat_prefix_transform, limalpha_shift, tonondec_transform, SequenceSpec,
    TailRegime,
};

use super::ConstructError;

/// Which pipeline produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Finite,
    Decdel,
    ZerosInfinitelyOften,
    ConservationOfMass,
    PointwiseDominated,
    EventuallyAbove,
    DipsInfinitelyOften,
}

impl Route {
    pub fn label(self) -> &'static str {
        match self {
            Route::Finite => "finite",
            Route::Decdel => "decdel",
            Route::ZerosInfinitelyOften => "zeros_infinitely_often",
            Route::ConservationOfMass => "conservation_of_mass",
            Route::PointwiseDominated => "pointwise_dominated",
            Route::EventuallyAbove => "eventually_above",
            Route::DipsInfinitelyOften => "dips_infinitely_often",
        }
    }
}

/// A finished vector: `⟨E e, e⟩` should equal `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constructed<T> {
    pub slot: usize,
    pub vector: FrameVector<T>,
    pub target: T,
    /// Rayleigh quotient measured when the result was assembled.
    pub achieved: T,
}

/// A vector left over by a chain, carrying the unassigned mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual<T> {
    pub slot: usize,
    pub vector: FrameVector<T>,
    pub current_value: T,
    pub chain_id: usize,
}

/// One chain of the pointwise-dominated pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState<T> {
    pub chain_id: usize,
    /// Local (pipeline) indices `i_1 < i_2 < …`.
    pub indices: Vec<usize>,
    pub slots: Vec<usize>,
    /// `x_{i_1} = λ_{i_1}`, `x_{i_{k+1}} = λ_{i_{k+1}} + x_{i_k} − d_{i_k}`.
    pub x_values: Vec<T>,
    /// `α̃_k = (λ_{i_{k+1}} − d_{i_k}) / (λ_{i_{k+1}} − x_{i_k})`.
    pub alpha_tilde: Vec<T>,
}

/// A sequence transform or target assignment, recorded with its inputs so
/// that the target bookkeeping can be replayed without the oracle.
///
/// `slots[i]` is the frame slot of local index `i + 1`. `lambda_source` and
/// `d_source` name the record whose output supplied the inputs (`None`: the
/// problem's own values at `slots`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub name: String,
    pub stage: String,
    pub slots: Vec<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub lambda_source: Option<usize>,
    #[serde(default)]
    pub d_source: Option<usize>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub d: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionResult<T> {
    pub route: Route,
    pub window: usize,
    pub parameters: BTreeMap<String, Value>,
    pub constructed: Vec<Constructed<T>>,
    pub residuals: Vec<Residual<T>>,
    /// Window slots no stage reached; each still holds `f_j`.
    pub untouched: Vec<usize>,
    pub logs: Vec<MoveLog<T>>,
    pub chains: Vec<ChainState<T>>,
    pub transforms_applied: Vec<TransformRecord>,
    pub notes: Vec<String>,
}

impl<T> ConstructionResult<T> {
    pub fn move_count(&self) -> usize {
        self.logs.iter().map(|l| l.moves.len()).sum()
    }

    pub fn constructed_slots(&self) -> Vec<usize> {
        self.constructed.iter().map(|c| c.slot).collect()
    }
}

fn param_usize(r: &TransformRecord, key: &str) -> Result<usize, ConstructError> {
    r.params
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| ConstructError::Replay(format!("record `{}` lacks integer `{key}`", r.name)))
}

fn param_f64(r: &TransformRecord, key: &str) -> Result<f64, ConstructError> {
    r.params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| ConstructError::Replay(format!("record `{}` lacks number `{key}`", r.name)))
}

fn param_list(r: &TransformRecord, key: &str) -> Result<Vec<usize>, ConstructError> {
    let list = r.params.get(key).and_then(Value::as_array);
    list.and_then(|a| a.iter().map(|v| v.as_u64().map(|x| x as usize)).collect())
        .ok_or_else(|| {
            ConstructError::Replay(format!("record `{}` lacks index list `{key}`", r.name))
        })
}

fn regime_of(r: &TransformRecord) -> TailRegime<f64> {
    match r.params.get("regime").and_then(Value::as_str) {
        Some("conservation") => TailRegime::ConservationOfMass,
        _ => TailRegime::ExplicitOnly,
    }
}

/// Re-executes the recorded sequence transforms from their inputs and
/// returns the final target assigned to each slot.
///
/// Every recorded input must match the problem or the output of the record
/// it names, and every recomputed output must match the recorded one
/// bit for bit.
pub fn replay_transforms(
    records: &[TransformRecord],
    lambda: &[f64],
    d: &[f64],
) -> Result<BTreeMap<usize, f64>, ConstructError> {
    let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(records.len());
    let mut targets = BTreeMap::new();
    let at = |v: &[f64], slot: usize| -> Result<f64, ConstructError> {
        v.get(slot.wrapping_sub(1))
            .copied()
            .ok_or_else(|| ConstructError::Replay(format!("slot {slot} outside the problem")))
    };
    for (idx, r) in records.iter().enumerate() {
        let fail =
            |what: &str| ConstructError::Replay(format!("record {idx} (`{}`): {what}", r.name));
        let source =
            |src: Option<usize>, own: &[f64], problem: &[f64]| -> Result<(), ConstructError> {
                let expected: Vec<f64> = match src {
                    None => r
                        .slots
                        .iter()
                        .map(|&s| at(problem, s))
                        .collect::<Result<_, _>>()?,
                    Some(j) if j < idx => outputs[j].clone(),
                    Some(j) => return Err(fail(&format!("refers to later record {j}"))),
                };
                if !own.is_empty() && own != expected.as_slice() {
                    return Err(fail("recorded inputs differ from their source"));
                }
                Ok(())
            };
        if r.name != "assign" && r.name != "splice" {
            source(r.lambda_source, &r.lambda, lambda)?;
            source(r.d_source, &r.d, d)?;
        }
        let spec = |v: &[f64], regime| SequenceSpec::derived(v.to_vec(), regime, "replay");
        let nondec = |v: &[f64]| SequenceSpec::new(v.to_vec(), TailRegime::ExplicitOnly, "replay");
        let out: Vec<f64> = match r.name.as_str() {
            "flat_prefix" => flat_prefix_transform(
                &nondec(&r.lambda)?,
                &spec(&r.d, regime_of(r))?,
                param_usize(r, "n")?,
            )?
            .values()
            .to_vec(),
            "splice" => {
                let src = r
                    .d_source
                    .filter(|&j| j < idx)
                    .ok_or_else(|| fail("needs an earlier source"))?;
                let n = param_usize(r, "n")?;
                let prev = &outputs[src];
                if n == 0 || n > prev.len() {
                    return Err(fail("splice point outside the source"));
                }
                std::iter::once(prev[0])
                    .chain(prev[n..].iter().copied())
                    .collect()
            }
            "averaged_interpolant" => averaged_interpolant(
                &nondec(&r.lambda)?,
                &spec(&r.d, TailRegime::ConservationOfMass)?,
                &param_list(r, "records")?,
            )?
            .values()
            .to_vec(),
            "limalpha_shift" => limalpha_shift(
                &nondec(&r.lambda)?,
                &spec(&r.d, TailRegime::EventuallyAbove(param_f64(r, "alpha")?))?,
                param_f64(r, "alpha")?,
                param_usize(r, "n")?,
            )?
            .values()
            .to_vec(),
            "tonondec" => tonondec_transform(
                &nondec(&r.lambda)?,
                &spec(&r.d, regime_of(r))?,
                &param_list(r, "tail_minima")?,
            )?
            .values()
            .to_vec(),
            "assign" => {
                let out: Vec<f64> = match r.d_source {
                    None => r
                        .slots
                        .iter()
                        .map(|&s| at(d, s))
                        .collect::<Result<_, _>>()?,
                    Some(j) if j < idx => {
                        let pos = param_list(r, "positions")?;
                        if pos.len() != r.slots.len() {
                            return Err(fail("positions and slots differ in length"));
                        }
                        pos.iter()
                            .map(|&p| {
                                outputs[j]
                                    .get(p.wrapping_sub(1))
                                    .copied()
                                    .ok_or_else(|| fail("position out of range"))
                            })
                            .collect::<Result<_, _>>()?
                    }
                    Some(_) => return Err(fail("refers to a later record")),
                };
                for (&s, &v) in r.slots.iter().zip(&out) {
                    targets.insert(s, v);
                }
                out
            }
            other => return Err(fail(&format!("unknown transform `{other}`"))),
        };
        if out.len() != r.output.len()
            || out
                .iter()
                .zip(&r.output)
                .any(|(a, b)| a.to_bits() != b.to_bits())
        {
            return Err(fail("recomputed output differs from the recorded one"));
        }
        outputs.push(out);
    }
    Ok(targets)
}
