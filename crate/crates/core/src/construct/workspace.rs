use std::collections::BTreeMap;

use serde_json::Value;

use crate::moves::{execute_move, Frame, MoveLog, PairMove, StepInput};
use crate::operators::EntryOracle;
use crate::scalar::{abs, Real};
use crate::schurhorn::realize_block;

use super::result::{
    ChainState, Constructed, ConstructionResult, Residual, Route, TransformRecord,
};
use super::ConstructError;

pub(crate) const ORTHO_TOL: f64 = 1e-10;
const SPOT_CHECK_EVERY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SlotState<T> {
    Target(T),
    Pending { chain_id: usize },
}

/// Mutable state shared by the pipeline stages of one construction.
pub(crate) struct Workspace<'a, T> {
    pub oracle: &'a EntryOracle<T>,
    pub frame: Frame<T>,
    pub logs: Vec<MoveLog<T>>,
    pub chains: Vec<ChainState<T>>,
    pub transforms: Vec<TransformRecord>,
    pub params: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub state: BTreeMap<usize, SlotState<T>>,
    last_chain: BTreeMap<usize, usize>,
    moves_since_check: usize,
}

impl<'a, T: Real> Workspace<'a, T> {
    pub fn new(oracle: &'a EntryOracle<T>) -> Self {
        Self {
            oracle,
            frame: Frame::new(),
            logs: Vec::new(),
            chains: Vec::new(),
            transforms: Vec::new(),
            params: BTreeMap::new(),
            notes: Vec::new(),
            state: BTreeMap::new(),
            last_chain: BTreeMap::new(),
            moves_since_check: 0,
        }
    }

    pub fn open_log(&self) -> MoveLog<T> {
        MoveLog::new(self.logs.len() + 1)
    }

    /// Keeps non-empty logs only, so chain ids stay consecutive.
    pub fn close_log(&mut self, log: MoveLog<T>, stage: &str) {
        if log.is_empty() {
            return;
        }
        if !log.near_identity_steps.is_empty() {
            let msg = format!(
                "{stage}: chain {} solved {} step(s) as identity below the angle resolution",
                log.chain_id,
                log.near_identity_steps.len()
            );
            log::warn!("{msg}");
            self.notes.push(msg);
        }
        for m in &log.moves {
            self.last_chain.insert(m.left, log.chain_id);
            self.last_chain.insert(m.right, log.chain_id);
        }
        self.logs.push(log);
    }

    pub fn value(&self, slot: usize) -> Result<T, ConstructError> {
        Ok(self.oracle.rayleigh(&self.frame.get(slot))?)
    }

    pub fn step(
        &mut self,
        log: &mut MoveLog<T>,
        input: StepInput<T>,
        stage: &str,
    ) -> Result<PairMove<T>, ConstructError> {
        let mv = execute_move(self.oracle, &mut self.frame, input, log).map_err(|source| {
            ConstructError::Move {
                stage: stage.to_string(),
                source,
            }
        })?;
        self.after_moves(1, &[input.left, input.right])?;
        Ok(mv)
    }

    /// Realizes `targets` on `slots` (current values must majorize them).
    pub fn realize(
        &mut self,
        slots: &[usize],
        targets: &[T],
        stage: &str,
    ) -> Result<(), ConstructError> {
        let mut log = self.open_log();
        realize_block(self.oracle, &mut self.frame, slots, targets, &mut log).map_err(
            |source| ConstructError::SchurHorn {
                stage: stage.to_string(),
                source,
            },
        )?;
        let touched: Vec<usize> = log.moves.iter().flat_map(|m| [m.left, m.right]).collect();
        let n = log.len();
        self.close_log(log, stage);
        self.after_moves(n, &touched)?;
        for (&s, &t) in slots.iter().zip(targets) {
            self.state.insert(s, SlotState::Target(t));
        }
        Ok(())
    }

    /// Checks the recently written slots against every touched slot once
    /// enough moves have accumulated.
    fn after_moves(&mut self, n: usize, recent: &[usize]) -> Result<(), ConstructError> {
        self.moves_since_check += n;
        if self.moves_since_check < SPOT_CHECK_EVERY {
            return Ok(());
        }
        self.moves_since_check = 0;
        for &a in recent {
            let va = self.frame.get(a);
            for (b, vb) in self.frame.touched() {
                let want = if a == b { T::one() } else { T::zero() };
                let dev = abs(va.dot(vb) - want);
                if dev > T::c(ORTHO_TOL) {
                    return Err(ConstructError::Orthonormality {
                        slots: (a, b),
                        deviation: dev.to_f64_lossy(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn set_target(&mut self, slot: usize, t: T) {
        self.state.insert(slot, SlotState::Target(t));
    }

    pub fn set_pending(&mut self, slot: usize, chain_id: usize) {
        self.state.insert(slot, SlotState::Pending { chain_id });
    }

    pub fn target_of(&self, slot: usize) -> Option<T> {
        match self.state.get(&slot) {
            Some(SlotState::Target(t)) => Some(*t),
            _ => None,
        }
    }

    pub fn record(&mut self, r: TransformRecord) -> usize {
        self.transforms.push(r);
        self.transforms.len() - 1
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.insert(key.to_string(), v.into());
    }

    /// Sorts every window slot into constructed / residual / untouched.
    /// A slot is constructed when its last assigned target is the problem's
    /// `d` value; any other touched slot is a residual.
    pub fn finish(
        self,
        route: Route,
        window: usize,
        d: &[T],
    ) -> Result<ConstructionResult<T>, ConstructError> {
        let mut constructed = Vec::new();
        let mut residuals = Vec::new();
        let mut untouched = Vec::new();
        for slot in 1..=window {
            let vector = self.frame.get(slot);
            let value = self.oracle.rayleigh(&vector)?;
            match self.state.get(&slot) {
                Some(SlotState::Target(t)) if *t == d[slot - 1] => constructed.push(Constructed {
                    slot,
                    vector,
                    target: *t,
                    achieved: value,
                }),
                Some(_) => residuals.push(Residual {
                    slot,
                    vector,
                    current_value: value,
                    chain_id: self.last_chain.get(&slot).copied().unwrap_or(0),
                }),
                None if self.frame.is_touched(slot) => residuals.push(Residual {
                    slot,
                    vector,
                    current_value: value,
                    chain_id: self.last_chain.get(&slot).copied().unwrap_or(0),
                }),
                None => untouched.push(slot),
            }
        }
        let all: Vec<_> = constructed
            .iter()
            .map(|c| (c.slot, &c.vector))
            .chain(residuals.iter().map(|r| (r.slot, &r.vector)))
            .collect();
        for (i, (sa, a)) in all.iter().enumerate() {
            for (j, (sb, b)) in all.iter().enumerate().skip(i) {
                let want = if i == j { T::one() } else { T::zero() };
                let dev = abs(a.dot(b) - want);
                if dev > T::c(ORTHO_TOL) {
                    return Err(ConstructError::Orthonormality {
                        slots: (*sa, *sb),
                        deviation: dev.to_f64_lossy(),
                    });
                }
            }
        }
        log::info!(
            "{}: {} constructed, {} residual, {} untouched, {} moves",
            route.label(),
            constructed.len(),
            residuals.len(),
            untouched.len(),
            self.logs.iter().map(|l| l.len()).sum::<usize>()
        );
        Ok(ConstructionResult {
            route,
            window,
            parameters: self.params,
            constructed,
            residuals,
            untouched,
            logs: self.logs,
            chains: self.chains,
            transforms_applied: self.transforms,
            notes: self.notes,
        })
    }
}
