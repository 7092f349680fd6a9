//! Infinite-dimensional constructions, run on a finite window.
//!
//! Every pipeline works on a *local problem*: a list of frame slots with the
//! current diagonal values `λ` on them and the targets `d`. Stages rewrite
//! targets with the sequence transforms, realize finite blocks with the
//! Schur–Horn engine and run rotation chains; the workspace keeps track of
//! which slot is finished, pending or untouched.

mod conservation;
mod dispatch;
pub mod persist;
mod result;
mod vanishing;
mod workspace;

pub use conservation::{decdel_construct, lim0_construct};
pub use dispatch::{d2d_dispatch, reduce_prefix, PrefixReduction};
pub use result::{
    replay_transforms, ChainState, Constructed, ConstructionResult, Residual, Route,
    TransformRecord,
};
pub use vanishing::{limalpha_construct, nondec_construct, tonondec_construct};

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use crate::moves::MoveError;
use crate::operators::{EntryOracle, OperatorError};
use crate::scalar::{Real, Scalar};
use crate::schurhorn::SchurHornError;
use crate::sequences::{SequenceError, SequenceSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Oracle(#[from] OperatorError),
    #[error("{stage}: {source}")]
    SchurHorn {
        stage: String,
        #[source]
        source: SchurHornError,
    },
    #[error("{stage}: {source}")]
    Move {
        stage: String,
        #[source]
        source: MoveError,
    },
    #[error("{stage}: window too small: {reason}")]
    WindowTooSmall { stage: String, reason: String },
    #[error("{stage}: {reason}")]
    Hypothesis { stage: String, reason: String },
    #[error("d is not weakly majorized by λ: δ_{index} < 0")]
    MajorizationFailure { index: usize },
    #[error("d_{index} < λ_{index}: not pointwise dominated")]
    NotDominated { index: usize },
    #[error("declared regime contradicts the window: {0}")]
    RegimeInconsistent(String),
    #[error("no construction handles this regime: {0}")]
    UnhandledRegime(String),
    #[error("frame lost orthonormality between slots {slots:?}: deviation {deviation:e}")]
    Orthonormality {
        slots: (usize, usize),
        deviation: f64,
    },
    #[error("transform replay failed: {0}")]
    Replay(String),
}

/// Knobs shared by all pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructOptions {
    /// Number of leading indices to work on; defaults to the largest window
    /// both sequences and the oracle provide.
    pub window: Option<usize>,
    /// Cap on the number of moves of any single chain.
    pub max_steps: Option<usize>,
    /// Indices at the end of the window excluded from tail-minimum
    /// certification.
    pub guard: usize,
    /// Maximum number of chains in the pointwise-dominated pipeline.
    pub chain_cap: usize,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            window: None,
            max_steps: None,
            guard: 4,
            chain_cap: 16,
        }
    }
}

impl ConstructOptions {
    pub fn with_window(window: usize) -> Self {
        Self {
            window: Some(window),
            ..Self::default()
        }
    }

    pub(crate) fn resolve_window<T: Scalar>(
        &self,
        oracle: &EntryOracle<T>,
        lambda: &SequenceSpec<T>,
        d: &SequenceSpec<T>,
    ) -> Result<usize, ConstructError> {
        let avail = lambda.len().min(d.len()).min(oracle.window());
        match self.window {
            Some(w) if w == 0 || w > avail => Err(ConstructError::WindowTooSmall {
                stage: "setup".into(),
                reason: format!("requested window {w}, but only {avail} indices are available"),
            }),
            Some(w) => Ok(w),
            None => Ok(avail),
        }
    }

    pub(crate) fn steps_cap(&self) -> usize {
        self.max_steps.unwrap_or(usize::MAX)
    }
}

/// A sub-problem: local index `i` lives in frame slot `slots[i − 1]`.
#[derive(Debug, Clone)]
pub(crate) struct Local<T> {
    pub slots: Vec<usize>,
    pub lambda: Vec<T>,
    pub d: Vec<T>,
    /// Transform record that produced `d` (`None`: the problem's own `d`).
    pub d_source: Option<usize>,
    /// Position of each local index in `d_source`'s output.
    pub pos: Vec<usize>,
}

impl<T: Real> Local<T> {
    pub fn prefix(lambda: &[T], d: &[T], window: usize) -> Self {
        Self {
            slots: (1..=window).collect(),
            lambda: lambda[..window].to_vec(),
            d: d[..window].to_vec(),
            d_source: None,
            pos: (1..=window).collect(),
        }
    }

    /// Replaces the targets by the output of transform record `source`
    /// (truncating to its length).
    pub fn retarget(&self, d: Vec<T>, source: usize) -> Self {
        let n = d.len();
        Self {
            slots: self.slots[..n].to_vec(),
            lambda: self.lambda[..n].to_vec(),
            d,
            d_source: Some(source),
            pos: (1..=n).collect(),
        }
    }

    /// Positions `range` of `d_source`'s output, as a JSON list.
    pub fn source_positions(&self, range: std::ops::Range<usize>) -> Value {
        Value::from(self.pos[range].to_vec())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    /// Restriction to local positions `pos` (one-based).
    pub fn select(&self, pos: &[usize]) -> Self {
        Self {
            slots: pos.iter().map(|&p| self.slots[p - 1]).collect(),
            lambda: pos.iter().map(|&p| self.lambda[p - 1]).collect(),
            d: pos.iter().map(|&p| self.d[p - 1]).collect(),
            d_source: self.d_source,
            pos: pos.iter().map(|&p| self.pos[p - 1]).collect(),
        }
    }
}

pub(crate) fn to_f64s<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

pub(crate) fn positions(range: std::ops::RangeInclusive<usize>) -> Value {
    Value::from(range.collect::<Vec<_>>())
}

/// Builds a transform record; `params` are `(key, value)` pairs.
#[allow(clippy::too_many_arguments)]
pub(crate) fn record<T: Scalar>(
    name: &str,
    stage: &str,
    slots: &[usize],
    d_source: Option<usize>,
    lambda: &[T],
    d: &[T],
    output: &[T],
    params: Vec<(&str, Value)>,
) -> TransformRecord {
    TransformRecord {
        name: name.to_string(),
        stage: stage.to_string(),
        slots: slots.to_vec(),
        params: params
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<BTreeMap<_, _>>(),
        lambda_source: None,
        d_source,
        lambda: to_f64s(lambda),
        d: to_f64s(d),
        output: to_f64s(output),
    }
}

/// Records and performs a block realization of `targets` on `slots`;
/// `positions` index `source`'s output (or the problem's `d` if `None`).
pub(crate) fn assign_block<T: Real>(
    ws: &mut workspace::Workspace<'_, T>,
    stage: &str,
    slots: &[usize],
    targets: &[T],
    source: Option<usize>,
    pos: Value,
) -> Result<(), ConstructError> {
    let params = if source.is_some() {
        vec![("positions", pos)]
    } else {
        vec![]
    };
    debug_assert!(slots.len() == targets.len());
    ws.record(record::<T>(
        "assign",
        stage,
        slots,
        source,
        &[],
        &[],
        targets,
        params,
    ));
    ws.realize(slots, targets, stage)
}
