//! Sequences, δ-profiles, majorization checks and the pure sequence
//! transforms used by the construction pipelines.
//!
//! All indices in this module's public API are one-based, matching the
//! `f_1, f_2, …` frame they eventually address.

mod diagnostics;
pub mod io;
mod majorization;
mod profile;
mod spec;
mod transforms;

pub use diagnostics::{divergence_diagnostic, hlp_transform_check, DivergenceDiagnostic, HlpPhi};
pub use majorization::{
    check_finite_majorization, check_finite_majorization_tol, check_weak_majorization,
    check_weak_majorization_tol, majorization_tolerance, Verdict,
};
pub use profile::{
    delta_profile, delta_profile_with_tol, running_tail_minima, strict_decrease_records,
    zero_partition, BlockPartition, DeltaProfile,
};
pub use spec::{SequenceSpec, TailRegime};
pub use transforms::{
    averaged_interpolant, decdel_tail_data, flat_prefix_transform, limalpha_choose_n,
    limalpha_shift, tonondec_transform, DecdelTailData,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("sequence `{name}` is empty")]
    Empty { name: String },
    #[error("sequence `{name}` is not nondecreasing at index {index}")]
    NotNondecreasing { name: String, index: usize },
    #[error("sequence `{name}` has {got} values, {needed} needed")]
    TooShort {
        name: String,
        needed: usize,
        got: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("negative partial sum δ_{index}")]
    NegativeDelta { index: usize },
    #[error("guard {guard} leaves no certified index in window {window}")]
    GuardTooLarge { guard: usize, window: usize },
    #[error("invalid record list: {0}")]
    InvalidRecords(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no valid N within window {window}: {reason}")]
    NoValidN { window: usize, reason: String },
    #[error("regime mismatch: expected {expected}, found {found}")]
    RegimeMismatch { expected: String, found: String },
    #[error("invalid regime: {0}")]
    RegimeInvalid(String),
    #[error("entry {index} is not positive")]
    NonPositive { index: usize },
    #[error("inputs are not majorized (first violation at prefix {index})")]
    NotMajorized { index: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}
