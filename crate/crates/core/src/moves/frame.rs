use std::collections::BTreeMap;

use crate::scalar::{abs, Real, Scalar};

/// A finite real combination `Σ c_i f_i` of reference frame vectors.
///
/// Entries are kept sorted by frame index with no duplicates; indices are
/// one-based.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameVector<T> {
    pub id: String,
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> FrameVector<T> {
    /// The reference vector `f_j`.
    pub fn basis(j: usize) -> Self {
        assert!(j >= 1, "frame indices are one-based");
        Self {
            id: format!("f{j}"),
            entries: vec![(j, T::one())],
        }
    }

    /// Builds from arbitrary `(index, coefficient)` pairs, summing
    /// duplicates and dropping exact zeros.
    pub fn from_entries(
        id: impl Into<String>,
        entries: impl IntoIterator<Item = (usize, T)>,
    ) -> Self {
        let mut map: BTreeMap<usize, T> = BTreeMap::new();
        for (i, c) in entries {
            assert!(i >= 1, "frame indices are one-based");
            let slot = map.entry(i).or_insert_with(T::zero);
            *slot = *slot + c;
        }
        Self {
            id: id.into(),
            entries: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn zero(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            entries: Vec::new(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn coeff(&self, j: usize) -> T {
        self.entries
            .binary_search_by_key(&j, |e| e.0)
            .map_or(T::zero(), |p| self.entries[p].1)
    }

    pub fn coeff_mut(&mut self, j: usize) -> Option<&mut T> {
        self.entries
            .binary_search_by_key(&j, |e| e.0)
            .ok()
            .map(|p| &mut self.entries[p].1)
    }

    pub fn dot(&self, other: &Self) -> T {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, T::zero());
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = acc + a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, &(_, c)| acc + c * c)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            id: self.id.clone(),
            entries: self.entries.iter().map(|&(i, c)| (i, c * s)).collect(),
        }
    }

    /// `a·self + b·other`, keeping every index of either support (so the
    /// support of a rotated pair never shrinks through cancellation noise).
    pub fn combine(&self, a: T, other: &Self, b: T, id: impl Into<String>) -> Self {
        let (x, y) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(x.len() + y.len());
        let (mut i, mut j) = (0, 0);
        while i < x.len() || j < y.len() {
            let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
            let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
            if take_x {
                out.push((x[i].0, a * x[i].1));
                i += 1;
            } else if take_y {
                out.push((y[j].0, b * y[j].1));
                j += 1;
            } else {
                out.push((x[i].0, a * x[i].1 + b * y[j].1));
                i += 1;
                j += 1;
            }
        }
        Self {
            id: id.into(),
            entries: out,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = self.combine(T::one(), other, -T::one(), "");
        d.entries
            .iter()
            .fold(T::zero(), |m, &(_, c)| crate::scalar::max(m, abs(c)))
    }
}

impl<T: Real> FrameVector<T> {
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Self {
        self.scaled(self.norm().recip())
    }
}
