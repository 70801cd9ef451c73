use nalgebra::DMatrix;

use super::{displaced_population, FockSpace, PhononDistribution};
use crate::error::{domain, Error, Result};

/// Default bound on the pre-normalization truncation deficit of a kernel column.
pub const LEAKAGE_BOUND: f64 = 1e-3;

/// Column-stochastic matrix acting on phonon populations: `K[m][n]` is the
/// probability of ending in `|m⟩` from `|n⟩`.
///
/// Columns are renormalized after truncation; the pre-normalization deficit of
/// each column is kept in `leakage` so callers can account for it.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticKernel {
    matrix: DMatrix<f64>,
    leakage: Vec<f64>,
}

impl StochasticKernel {
    pub fn identity(dim: usize) -> Self {
        StochasticKernel {
            matrix: DMatrix::identity(dim, dim),
            leakage: vec![0.0; dim],
        }
    }

    /// Renormalizes each column of a non-negative matrix and records its deficit.
    pub fn from_columns(mut matrix: DMatrix<f64>) -> Result<Self> {
        let mut leakage = Vec::with_capacity(matrix.ncols());
        for mut col in matrix.column_iter_mut() {
            if col.iter().any(|v| !(*v >= 0.0)) {
                return Err(domain("kernel entries must be non-negative"));
            }
            let total: f64 = col.iter().sum();
            if !(total > 0.0) {
                return Err(domain("kernel column with zero mass"));
            }
            leakage.push((1.0 - total).max(0.0));
            col /= total;
        }
        Ok(StochasticKernel { matrix, leakage })
    }

    /// Builds a kernel from empirical outcome counts, one column per input.
    pub fn from_counts(counts: &[Vec<u64>], rows: usize) -> Result<Self> {
        let mut m = DMatrix::zeros(rows, counts.len());
        for (j, col) in counts.iter().enumerate() {
            for (i, &c) in col.iter().enumerate().take(rows) {
                m[(i, j)] = c as f64;
            }
        }
        let mut k = Self::from_columns(m)?;
        k.leakage.iter_mut().for_each(|l| *l = 0.0);
        Ok(k)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.matrix[(m, n)]
    }

    pub fn leakage(&self) -> &[f64] {
        &self.leakage
    }

    pub fn column(&self, n: usize) -> PhononDistribution {
        let probs: Vec<f64> = self.matrix.column(n).iter().copied().collect();
        PhononDistribution::from_weights(probs).expect("kernel columns are normalized")
    }

    pub fn column_mean(&self, n: usize) -> f64 {
        self.matrix
            .column(n)
            .iter()
            .enumerate()
            .map(|(m, p)| m as f64 * p)
            .sum()
    }

    /// Fails if any column `n ≤ checked_max` lost more than `bound` to truncation.
    pub fn check_leakage(self, checked_max: usize, bound: f64) -> Result<Self> {
        for (column, &deficit) in self.leakage.iter().enumerate().take(checked_max + 1) {
            if deficit > bound {
                return Err(Error::LeakageExceeded {
                    column,
                    deficit,
                    bound,
                });
            }
        }
        Ok(self)
    }

    /// Applies the kernel to a population vector. Returns the image and the
    /// probability that was lost to truncation before renormalization.
    pub fn apply(&self, probs: &[f64]) -> (Vec<f64>, f64) {
        assert_eq!(probs.len(), self.cols(), "kernel/state dimension mismatch");
        let mut out = vec![0.0; self.rows()];
        let mut leaked = 0.0;
        for (n, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            leaked += p * self.leakage[n];
            for (m, k) in self.matrix.column(n).iter().enumerate() {
                out[m] += k * p;
            }
        }
        (out, leaked)
    }

    /// Draws an output level from column `n` given a uniform deviate `u ∈ [0, 1)`.
    pub fn sample_column(&self, n: usize, u: f64) -> usize {
        let col = self.matrix.column(n);
        let mut acc = 0.0;
        for (m, p) in col.iter().enumerate() {
            acc += p;
            if u < acc {
                return m;
            }
        }
        // round-off: land on the last populated row
        col.iter().rposition(|p| *p > 0.0).unwrap_or(n)
    }

    /// Kernel composition `self · other` (apply `other` first).
    pub fn compose(&self, other: &StochasticKernel) -> StochasticKernel {
        let matrix = &self.matrix * &other.matrix;
        let leakage = (0..other.cols())
            .map(|n| {
                let carried: f64 = other
                    .matrix
                    .column(n)
                    .iter()
                    .enumerate()
                    .map(|(m, p)| p * self.leakage.get(m).copied().unwrap_or(0.0))
                    .sum();
                other.leakage[n] + carried
            })
            .collect();
        StochasticKernel { matrix, leakage }
    }

    /// Weighted average of kernels with equal shapes.
    pub(crate) fn accumulate(&mut self, other: &DMatrix<f64>, weight: f64) {
        self.matrix.zip_apply(other, |a, b| *a += weight * b);
    }

    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        StochasticKernel {
            matrix: DMatrix::zeros(rows, cols),
            leakage: vec![0.0; cols],
        }
    }

    pub(crate) fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Raw `|<m|D(α)|n>|²` table on the workspace, before renormalization.
pub fn displacement_table(s: f64, space: &FockSpace) -> DMatrix<f64> {
    let dim = space.dim();
    DMatrix::from_fn(dim, dim, |m, n| displaced_population(m, n, s))
}

/// Displacement kernel for `s = |α|²`, renormalized per column.
///
/// Columns `n ≤ n_max` whose truncation deficit exceeds [`LEAKAGE_BOUND`]
/// raise [`Error::LeakageExceeded`]; deficits of higher columns are recorded
/// in the kernel and surface as leakage when it is applied.
pub fn displacement_kernel(s: f64, space: &FockSpace) -> Result<StochasticKernel> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(domain(format!("displacement |α|² must be finite and >= 0, got {s}")));
    }
    StochasticKernel::from_columns(displacement_table(s, space))?
        .check_leakage(space.n_max, LEAKAGE_BOUND)
}
