//! Constructive majorization for diagonals of self-adjoint operators.
//!
//! Given the eigenvalues `λ` of an operator `E` (through an [`EntryOracle`])
//! and a target sequence `d`, build an orthonormal family `e_1, e_2, …` with
//! `⟨E e_i, e_i⟩ = d_i`, one 2×2 rotation at a time, and record every move so
//! that the result can be replayed and checked independently.
//!
//! Sequence algebra is generic over [`scalar::Scalar`] (`f32`, `f64`, exact
//! rationals); constructions need square roots and run on [`scalar::Real`].
//! The `*64` aliases fix the scalar to `f64`. The `f256` feature adds
//! `F256`, a 237-bit float for inputs that `f64` cannot represent.

pub mod construct;
pub mod moves;
pub mod operators;
pub mod scalar;
pub mod schurhorn;
pub mod sequences;
pub mod table;
pub mod verify;

pub use construct::{
    d2d_dispatch, decdel_construct, lim0_construct, limalpha_construct, nondec_construct,
    reduce_prefix, replay_transforms, tonondec_construct, ConstructError, ConstructOptions,
    ConstructionResult, Route,
};
pub use moves::{execute_move, solve_two_by_two, Frame, FrameVector, MoveLog, PairMove};
pub use operators::{neumann_model, EntryOracle};
pub use scalar::{Real, Scalar};
pub use schurhorn::{realize_block, robin_hood_plan, TransferPlan};
pub use sequences::{delta_profile, DeltaProfile, SequenceSpec, TailRegime};
pub use verify::{verify_result, Tolerances, VerificationReport};

pub type Sequence64 = SequenceSpec<f64>;
pub type Regime64 = TailRegime<f64>;
pub type Oracle64 = EntryOracle<f64>;
pub type Vector64 = FrameVector<f64>;
pub type Log64 = MoveLog<f64>;
pub type Result64 = ConstructionResult<f64>;
pub type Profile64 = DeltaProfile<f64>;
/// Exact rational scalar for the sequence algebra.
pub type Rational = num_rational::Ratio<i64>;
#[cfg(feature = "f256")]
pub use scalar::F256;
