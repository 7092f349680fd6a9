use serde::Serialize;

use crate::scalar::{abs, scaled_tol, Scalar};

use super::{SequenceError, SequenceSpec};

/// Partial sums `δ_k = Σ_{i≤k} (d_i − λ_i)` on a window, with the index
/// sets the pipelines branch on.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaProfile<T> {
    pub deltas: Vec<T>,
    pub zero_indices: Vec<usize>,
    /// Tail minima with guard 0; see [`running_tail_minima`] for guarded ones.
    pub running_tail_minima: Vec<usize>,
    pub strict_decrease_records: Vec<usize>,
    pub declared_alpha: Option<T>,
    pub zero_tol: T,
}

impl<T: Scalar> DeltaProfile<T> {
    /// Profile from precomputed partial sums, using the default zero
    /// tolerance.
    pub fn from_deltas(deltas: Vec<T>) -> Self {
        let tol = default_zero_tol(&deltas);
        Self::from_deltas_with_tol(deltas, tol)
    }

    pub fn from_deltas_with_tol(deltas: Vec<T>, zero_tol: T) -> Self {
        let zero_indices = deltas
            .iter()
            .enumerate()
            .filter(|(_, &v)| abs(v) <= zero_tol)
            .map(|(i, _)| i + 1)
            .collect();
        let records = scan_records(&deltas);
        let minima = tail_minima(&deltas, deltas.len());
        Self {
            deltas,
            zero_indices,
            running_tail_minima: minima,
            strict_decrease_records: records,
            declared_alpha: None,
            zero_tol,
        }
    }

    pub fn window(&self) -> usize {
        self.deltas.len()
    }

    /// One-based access with `δ_0 = 0`.
    pub fn delta(&self, k: usize) -> T {
        if k == 0 {
            T::zero()
        } else {
            self.deltas[k - 1]
        }
    }

    pub fn is_zero(&self, k: usize) -> bool {
        abs(self.delta(k)) <= self.zero_tol
    }

    /// First index with `δ_k < −tol`, if any.
    pub fn first_negative(&self) -> Option<usize> {
        self.deltas
            .iter()
            .position(|&v| v < -self.zero_tol)
            .map(|i| i + 1)
    }
}

fn default_zero_tol<T: Scalar>(deltas: &[T]) -> T {
    if T::EXACT || deltas.is_empty() {
        T::zero()
    } else {
        scaled_tol(T::default_rel_tol(), deltas[0])
    }
}

pub fn delta_profile<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    k: usize,
) -> Result<DeltaProfile<T>, SequenceError> {
    let mut p = delta_profile_with_tol(lambda, d, k, None)?;
    p.declared_alpha = d.regime().alpha();
    Ok(p)
}

/// As [`delta_profile`], with an explicit zero-detection tolerance.
pub fn delta_profile_with_tol<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    k: usize,
    zero_tol: Option<T>,
) -> Result<DeltaProfile<T>, SequenceError> {
    lambda.require_len(k)?;
    d.require_len(k)?;
    if !lambda.is_nondecreasing() {
        let index = lambda
            .values()
            .windows(2)
            .position(|w| w[1] < w[0])
            .map_or(1, |i| i + 2);
        return Err(SequenceError::NotNondecreasing {
            name: lambda.name().to_string(),
            index,
        });
    }
    let mut acc = T::zero();
    let deltas: Vec<T> = lambda.values()[..k]
        .iter()
        .zip(&d.values()[..k])
        .map(|(&l, &x)| {
            acc = acc + (x - l);
            acc
        })
        .collect();
    let tol = zero_tol.unwrap_or_else(|| default_zero_tol(&deltas));
    let mut p = DeltaProfile::from_deltas_with_tol(deltas, tol);
    p.declared_alpha = d.regime().alpha();
    Ok(p)
}

fn scan_records<T: Scalar>(deltas: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut best: Option<T> = None;
    for (i, &v) in deltas.iter().enumerate() {
        if best.is_none_or(|b| v < b) {
            out.push(i + 1);
            best = Some(v);
        }
    }
    out
}

/// Indices `n ≤ limit` with `δ_n ≤ δ_k` for all `k ∈ (n, limit]`.
fn tail_minima<T: Scalar>(deltas: &[T], limit: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut suffix_min: Option<T> = None;
    for n in (1..=limit).rev() {
        let v = deltas[n - 1];
        if suffix_min.is_none_or(|m| v <= m) {
            out.push(n);
        }
        suffix_min = Some(match suffix_min {
            Some(m) if m < v => m,
            _ => v,
        });
    }
    out.reverse();
    out
}

/// `m_1 = 1`, then each next record is the first later index strictly
/// below the previous one.
pub fn strict_decrease_records<T: Scalar>(profile: &DeltaProfile<T>) -> Vec<usize> {
    scan_records(&profile.deltas)
}

/// Consecutive tail minima certified on `1..=window−guard`.
pub fn running_tail_minima<T: Scalar>(
    profile: &DeltaProfile<T>,
    guard: usize,
) -> Result<Vec<usize>, SequenceError> {
    let w = profile.window();
    if guard >= w {
        return Err(SequenceError::GuardTooLarge { guard, window: w });
    }
    Ok(tail_minima(&profile.deltas, w - guard))
}

/// Disjoint one-based inclusive index intervals inside a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    blocks: Vec<(usize, usize)>,
    /// Start of a trailing run not closed by any block.
    open_tail: Option<usize>,
    window: usize,
}

impl BlockPartition {
    pub fn new(mut blocks: Vec<(usize, usize)>, window: usize) -> Result<Self, SequenceError> {
        blocks.sort_unstable();
        for &(a, b) in &blocks {
            if a == 0 || a > b || b > window {
                return Err(SequenceError::Precondition(format!(
                    "block {a}..={b} outside window 1..={window}"
                )));
            }
        }
        if let Some(w) = blocks.windows(2).find(|w| w[1].0 <= w[0].1) {
            return Err(SequenceError::Precondition(format!(
                "blocks {}..={} and {}..={} overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        Ok(Self {
            blocks,
            open_tail: None,
            window,
        })
    }

    pub fn empty(window: usize) -> Self {
        Self {
            blocks: Vec::new(),
            open_tail: None,
            window,
        }
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn open_tail(&self) -> Option<usize> {
        self.open_tail
    }

    /// Whether the blocks partition the whole window.
    pub fn is_covered(&self) -> bool {
        let mut next = 1;
        for &(a, b) in &self.blocks {
            if a != next {
                return false;
            }
            next = b + 1;
        }
        next == self.window + 1
    }

    pub fn block_of(&self, i: usize) -> Option<(usize, usize)> {
        self.blocks.iter().copied().find(|&(a, b)| a <= i && i <= b)
    }
}

/// Blocks `{k_j+1, …, k_{j+1}}` between consecutive zeros of δ, with
/// `k_1 = 0`.
pub fn zero_partition<T: Scalar>(profile: &DeltaProfile<T>) -> BlockPartition {
    let w = profile.window();
    let mut blocks = Vec::new();
    let mut prev = 0;
    for &z in &profile.zero_indices {
        blocks.push((prev + 1, z));
        prev = z;
    }
    BlockPartition {
        blocks,
        open_tail: (prev < w).then_some(prev + 1),
        window: w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::TailRegime;
    use num_rational::Ratio;

    fn spec(v: &[f64]) -> SequenceSpec<f64> {
        SequenceSpec::new(v.to_vec(), TailRegime::ExplicitOnly, "s").unwrap()
    }

    #[test]
    fn squares() {
        let p = delta_profile(&spec(&[0., 1., 4., 9.]), &spec(&[1., 4., 9., 16.]), 4).unwrap();
        assert_eq!(p.deltas, vec![1., 4., 9., 16.]);
        assert!(p.zero_indices.is_empty());
    }

    #[test]
    fn geometric_deltas() {
        let l = spec(&[0., 1., 2., 3.]);
        let d = SequenceSpec::derived(
            vec![0.5, 0.75, 1.875, 2.9375],
            TailRegime::ExplicitOnly,
            "d",
        )
        .unwrap();
        let p = delta_profile(&l, &d, 4).unwrap();
        assert_eq!(p.deltas, vec![0.5, 0.25, 0.125, 0.0625]);
        assert_eq!(p.strict_decrease_records, vec![1, 2, 3, 4]);
    }

    #[test]
    fn identity_is_all_zero() {
        let l = spec(&[0., 3., 3., 7.]);
        let p = delta_profile(&l, &l, 4).unwrap();
        assert_eq!(p.zero_indices, vec![1, 2, 3, 4]);
    }

    #[test]
    fn too_short_and_unsorted_lambda() {
        let l = spec(&[0., 1.]);
        assert!(matches!(
            delta_profile(&l, &l, 3),
            Err(SequenceError::TooShort { .. })
        ));
        let bad = SequenceSpec::derived(vec![1., 0.], TailRegime::ExplicitOnly, "l").unwrap();
        assert!(matches!(
            delta_profile(&bad, &l, 2),
            Err(SequenceError::NotNondecreasing { .. })
        ));
    }

    #[test]
    fn records() {
        let p = DeltaProfile::from_deltas(vec![0.5, 0.25, 0.3, 0.125]);
        assert_eq!(strict_decrease_records(&p), vec![1, 2, 4]);
        let p = DeltaProfile::from_deltas(vec![1., 1., 2., 3.]);
        assert_eq!(strict_decrease_records(&p), vec![1]);
    }

    #[test]
    fn tail_minima_examples() {
        let p = DeltaProfile::from_deltas(vec![2., 1., 3., 1., 4., 5., 6.]);
        assert_eq!(running_tail_minima(&p, 0).unwrap(), vec![2, 4, 5, 6, 7]);
        let p = DeltaProfile::from_deltas(vec![1., 2., 3.]);
        assert_eq!(running_tail_minima(&p, 0).unwrap(), vec![1, 2, 3]);
        let p = DeltaProfile::from_deltas(vec![3., 2., 1.]);
        assert_eq!(running_tail_minima(&p, 0).unwrap(), vec![3]);
        assert!(running_tail_minima(&p, 3).is_err());
        // Guard 2 only certifies against the first window−2 values.
        let p = DeltaProfile::from_deltas(vec![1., 2., 3., 0.]);
        assert_eq!(running_tail_minima(&p, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn zero_partitions() {
        let p = DeltaProfile::from_deltas(vec![1., 0., 2., 0.]);
        let b = zero_partition(&p);
        assert_eq!(b.blocks(), &[(1, 2), (3, 4)]);
        assert!(b.is_covered());
        let b = zero_partition(&DeltaProfile::from_deltas(vec![0., 0., 0.]));
        assert_eq!(b.blocks(), &[(1, 1), (2, 2), (3, 3)]);
        let b = zero_partition(&DeltaProfile::from_deltas(vec![1., 2., 3.]));
        assert!(b.blocks().is_empty());
        assert!(!b.is_covered());
        assert_eq!(b.open_tail(), Some(1));
        let b = zero_partition(&DeltaProfile::from_deltas(vec![1., 0., 2., 3.]));
        assert_eq!(b.blocks(), &[(1, 2)]);
        assert_eq!(b.open_tail(), Some(3));
    }

    #[test]
    fn zero_detection_scales_with_first_delta() {
        let p = DeltaProfile::from_deltas(vec![100.0, 5e-11, 1e-9]);
        assert_eq!(p.zero_indices, vec![2]);
        let q = DeltaProfile::from_deltas(vec![Ratio::new(1i64, 3), Ratio::new(1, 1_000_000_000)]);
        assert!(q.zero_indices.is_empty());
    }

    #[test]
    fn partition_validation() {
        assert!(BlockPartition::new(vec![(1, 3), (3, 4)], 4).is_err());
        assert!(BlockPartition::new(vec![(1, 5)], 4).is_err());
        let b = BlockPartition::new(vec![(3, 4), (1, 2)], 4).unwrap();
        assert!(b.is_covered());
        assert_eq!(b.block_of(3), Some((3, 4)));
    }
}
