//! Entry oracles `⟨E f_i, f_j⟩` and the interval Laplacian model.
//!
//! Constructions only ever touch an operator through its compression to the
//! reference frame, so an oracle is all they need.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::moves::FrameVector;
use crate::scalar::{Real, Scalar};
use crate::sequences::{SequenceError, SequenceSpec, TailRegime};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("frame index {index} outside oracle window 1..={window}")]
    WindowExceeded { index: usize, window: usize },
    #[error("matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("grid must have at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleKind<T> {
    Diagonal(Vec<T>),
    /// Row-major upper triangle of an `n × n` symmetric matrix.
    DenseSymmetric {
        n: usize,
        upper: Vec<T>,
    },
}

/// Read-only access to the compression of `E` onto `span{f_1, …, f_window}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryOracle<T> {
    kind: OracleKind<T>,
}

impl<T: Scalar> EntryOracle<T> {
    pub fn diagonal(values: Vec<T>) -> Self {
        Self {
            kind: OracleKind::Diagonal(values),
        }
    }

    pub fn from_spec(spec: &SequenceSpec<T>) -> Self {
        Self::diagonal(spec.values().to_vec())
    }

    /// Dense symmetric matrix given by rows; symmetry must be exact.
    pub fn dense(rows: &[Vec<T>]) -> Result<Self, OperatorError> {
        let n = rows.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(OperatorError::NotSquare {
                    row: r + 1,
                    len: row.len(),
                    n,
                });
            }
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                if rows[i][j] != rows[j][i] {
                    return Err(OperatorError::NotSymmetric { i: i + 1, j: j + 1 });
                }
                upper.push(rows[i][j]);
            }
        }
        Ok(Self {
            kind: OracleKind::DenseSymmetric { n, upper },
        })
    }

    pub fn kind(&self) -> &OracleKind<T> {
        &self.kind
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, OracleKind::Diagonal(_))
    }

    pub fn window(&self) -> usize {
        match &self.kind {
            OracleKind::Diagonal(v) => v.len(),
            OracleKind::DenseSymmetric { n, .. } => *n,
        }
    }

    fn check(&self, i: usize) -> Result<(), OperatorError> {
        let window = self.window();
        if i == 0 || i > window {
            Err(OperatorError::WindowExceeded { index: i, window })
        } else {
            Ok(())
        }
    }

    fn raw(&self, i: usize, j: usize) -> T {
        match &self.kind {
            OracleKind::Diagonal(v) => {
                if i == j {
                    v[i - 1]
                } else {
                    T::zero()
                }
            }
            OracleKind::DenseSymmetric { n, upper } => {
                let (a, b) = if i <= j {
                    (i - 1, j - 1)
                } else {
                    (j - 1, i - 1)
                };
                // offset of row a in the packed upper triangle
                upper[a * n - a * (a + 1) / 2 + b]
            }
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<T, OperatorError> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.raw(i, j))
    }

    /// `⟨E u, v⟩` by bilinear extension.
    pub fn compressed_entry(
        &self,
        u: &FrameVector<T>,
        v: &FrameVector<T>,
    ) -> Result<T, OperatorError> {
        for w in [u, v] {
            if let Some(m) = w.max_index() {
                self.check(m)?;
            }
        }
        Ok(match &self.kind {
            OracleKind::Diagonal(lam) => {
                let (a, b) = (u.entries(), v.entries());
                let (mut i, mut j, mut acc) = (0, 0, T::zero());
                while i < a.len() && j < b.len() {
                    match a[i].0.cmp(&b[j].0) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            acc = acc + a[i].1 * b[j].1 * lam[a[i].0 - 1];
                            i += 1;
                            j += 1;
                        }
                    }
                }
                acc
            }
            OracleKind::DenseSymmetric { .. } => {
                let mut acc = T::zero();
                for &(i, ui) in u.entries() {
                    let mut row = T::zero();
                    for &(j, vj) in v.entries() {
                        row = row + self.raw(i, j) * vj;
                    }
                    acc = acc + ui * row;
                }
                acc
            }
        })
    }

    /// Rayleigh value `⟨E u, u⟩`.
    pub fn rayleigh(&self, u: &FrameVector<T>) -> Result<T, OperatorError> {
        self.compressed_entry(u, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Neumann,
    Dirichlet,
}

impl Flavor {
    pub fn label(self) -> &'static str {
        match self {
            Flavor::Neumann => "neumann",
            Flavor::Dirichlet => "dirichlet",
        }
    }
}

/// Spectra of the Neumann and Dirichlet Laplacians on `[0, π]`:
/// `μ_j = (j−1)²` with eigenfunctions `1/√π, √(2/π) cos((j−1)x)`, and
/// `λ_j = j²` with eigenfunctions `√(2/π) sin(jx)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalLaplacianModel {
    pub flavor: Flavor,
}

impl IntervalLaplacianModel {
    pub fn eigenvalue<T: Scalar>(&self, j: usize) -> T {
        let k = match self.flavor {
            Flavor::Neumann => j - 1,
            Flavor::Dirichlet => j,
        };
        T::from_count(k * k)
    }

    pub fn eigenvalues<T: Scalar>(&self, window: usize) -> Vec<T> {
        (1..=window).map(|j| self.eigenvalue(j)).collect()
    }

    /// The `j`-th normalized eigenfunction at `x`.
    pub fn eigenfunction(&self, j: usize, x: f64) -> f64 {
        match self.flavor {
            Flavor::Neumann if j == 1 => 1.0 / PI.sqrt(),
            Flavor::Neumann => (2.0 / PI).sqrt() * ((j - 1) as f64 * x).cos(),
            Flavor::Dirichlet => (2.0 / PI).sqrt() * (j as f64 * x).sin(),
        }
    }
}

/// The Neumann-to-Dirichlet demo on a window: oracle `diag((j−1)²)`, its
/// spectrum, and the target `d_j = j²`.
#[derive(Debug, Clone)]
pub struct NeumannDemo<T> {
    pub oracle: EntryOracle<T>,
    pub lambda: SequenceSpec<T>,
    pub d: SequenceSpec<T>,
}

pub fn neumann_model<T: Scalar>(window: usize) -> Result<NeumannDemo<T>, OperatorError> {
    let neumann = IntervalLaplacianModel {
        flavor: Flavor::Neumann,
    };
    let dirichlet = IntervalLaplacianModel {
        flavor: Flavor::Dirichlet,
    };
    let mu = neumann.eigenvalues::<T>(window);
    let target = dirichlet.eigenvalues::<T>(window);
    assert!(mu.iter().zip(&target).all(|(m, l)| m <= l));
    let lambda = SequenceSpec::new(mu, TailRegime::PointwiseDominated, "neumann")?;
    let d = SequenceSpec::new(target, TailRegime::PointwiseDominated, "dirichlet")?;
    Ok(NeumannDemo {
        oracle: EntryOracle::from_spec(&lambda),
        lambda,
        d,
    })
}

/// Samples `Σ_j c_j φ_j(x)` at `grid` equally spaced points of `[0, π]`.
pub fn sample_function<T: Real>(
    vec: &FrameVector<T>,
    flavor: Flavor,
    grid: usize,
) -> Result<Vec<(f64, f64)>, OperatorError> {
    if grid < 2 {
        return Err(OperatorError::GridTooSmall(grid));
    }
    let model = IntervalLaplacianModel { flavor };
    Ok((0..grid)
        .map(|k| {
            let x = PI * k as f64 / (grid - 1) as f64;
            let y = vec
                .entries()
                .iter()
                .map(|&(j, c)| c.to_f64_lossy() * model.eigenfunction(j, x))
                .sum();
            (x, y)
        })
        .collect())
}

/// `∫_0^π sin(jx) cos(kx) dx = j(1 − (−1)^{j+k}) / (j² − k²)`, zero for `j = k`.
pub fn sine_in_cosine_coeffs(j: usize, k: usize) -> f64 {
    if j == k || (j + k).is_multiple_of(2) {
        return 0.0;
    }
    let (jf, kf) = (j as f64, k as f64);
    2.0 * jf / (jf * jf - kf * kf)
}
