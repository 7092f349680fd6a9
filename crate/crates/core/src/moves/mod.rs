//! 2×2 convex moves and the rotation chains built from them.

mod chain;
mod frame;
mod log;
mod solver;

pub use chain::{apply_pair_move, chain_execute, execute_move, Frame, StepInput};
pub use frame::FrameVector;
pub use log::{completeness_diagnostics, CompletenessDiagnostics, MoveLog, PairMove};
pub use solver::{g, move_tol, solve_two_by_two, TwoByTwo};

use thiserror::Error;

use crate::operators::OperatorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoveError {
    #[error("target {target} outside [{lo}, {hi}]")]
    OutOfBracket { target: f64, lo: f64, hi: f64 },
    #[error("degenerate pair: both diagonal values equal {0}")]
    DegeneratePair(f64),
    #[error("input vectors are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("bracketing failure at step {step}: target {target} not between {dt1} and {dt2}")]
    Bracketing {
        step: usize,
        dt1: f64,
        dt2: f64,
        target: f64,
    },
    #[error("chain needs {requested} steps, limit is {max}")]
    MaxSteps { requested: usize, max: usize },
    #[error("feed/target mismatch: {feed} feed indices, {targets} targets")]
    FeedMismatch { feed: usize, targets: usize },
    #[error("malformed move log: {0}")]
    Parse(String),
    #[error(transparent)]
    Oracle(#[from] OperatorError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
