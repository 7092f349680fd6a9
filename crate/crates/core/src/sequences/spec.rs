use std::fmt;

use crate::scalar::Scalar;

use super::SequenceError;

/// Declared behaviour of a sequence pair beyond the explicit prefix.
///
/// Tail facts (liminf values, infinitely many zeros) cannot be derived from a
/// finite prefix; the regime is an input that is validated for consistency on
/// the window only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRegime<T> {
    /// Only the prefix exists: the problem is finite-dimensional.
    ExplicitOnly,
    /// `liminf δ_k = 0`.
    ConservationOfMass,
    /// `δ_k ≥ α` for all large `k`, with `α = liminf δ_k`.
    EventuallyAbove(T),
    /// `δ_k < α = liminf δ_k` for infinitely many `k`.
    DipsInfinitelyOften(T),
    /// `d_i ≥ λ_i` for every `i`.
    PointwiseDominated,
    /// `δ_k = 0` for infinitely many `k`.
    ZerosInfinitelyOften,
}

impl<T> TailRegime<T> {
    pub fn label(&self) -> &'static str {
        match self {
            TailRegime::ExplicitOnly => "explicit",
            TailRegime::ConservationOfMass => "conservation",
            TailRegime::EventuallyAbove(_) => "eventually_above",
            TailRegime::DipsInfinitelyOften(_) => "dips",
            TailRegime::PointwiseDominated => "pointwise",
            TailRegime::ZerosInfinitelyOften => "zeros",
        }
    }
}

impl<T: Copy> TailRegime<T> {
    pub fn alpha(&self) -> Option<T> {
        match *self {
            TailRegime::EventuallyAbove(a) | TailRegime::DipsInfinitelyOften(a) => Some(a),
            _ => None,
        }
    }
}

impl<T> fmt::Display for TailRegime<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A real sequence given by an explicit prefix plus a declared tail regime.
///
/// Sequences built with [`SequenceSpec::new`] are checked to be
/// nondecreasing. Intermediate sequences produced by the transforms are
/// generally not monotone and are built with [`SequenceSpec::derived`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec<T> {
    prefix: Vec<T>,
    tail_regime: TailRegime<T>,
    name: String,
    nondecreasing: bool,
}

impl<T: Scalar> SequenceSpec<T> {
    pub fn new(
        prefix: Vec<T>,
        tail_regime: TailRegime<T>,
        name: impl Into<String>,
    ) -> Result<Self, SequenceError> {
        let name = name.into();
        if prefix.is_empty() {
            return Err(SequenceError::Empty { name });
        }
        if let Some(i) = prefix.windows(2).position(|w| w[1] < w[0]) {
            return Err(SequenceError::NotNondecreasing { name, index: i + 2 });
        }
        Ok(Self {
            prefix,
            tail_regime,
            name,
            nondecreasing: true,
        })
    }

    /// Builds a sequence without the monotonicity requirement.
    pub fn derived(
        prefix: Vec<T>,
        tail_regime: TailRegime<T>,
        name: impl Into<String>,
    ) -> Result<Self, SequenceError> {
        let name = name.into();
        if prefix.is_empty() {
            return Err(SequenceError::Empty { name });
        }
        let nondecreasing = prefix.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self {
            prefix,
            tail_regime,
            name,
            nondecreasing,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.prefix
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    /// One-based access.
    pub fn at(&self, k: usize) -> T {
        self.prefix[k - 1]
    }

    pub fn regime(&self) -> TailRegime<T> {
        self.tail_regime
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.nondecreasing
    }

    pub fn with_regime(mut self, regime: TailRegime<T>) -> Self {
        self.tail_regime = regime;
        self
    }

    /// Keeps the first `k` values.
    pub fn truncated(&self, k: usize) -> Result<Self, SequenceError> {
        if k == 0 || k > self.len() {
            return Err(SequenceError::TooShort {
                name: self.name.clone(),
                needed: k.max(1),
                got: self.len(),
            });
        }
        let mut out = self.clone();
        out.prefix.truncate(k);
        Ok(out)
    }

    pub(crate) fn require_len(&self, k: usize) -> Result<(), SequenceError> {
        if self.len() < k || k == 0 {
            Err(SequenceError::TooShort {
                name: self.name.clone(),
                needed: k.max(1),
                got: self.len(),
            })
        } else {
            Ok(())
        }
    }
}
