//! Truncated Fock space for the qubit ⊗ oscillator system.

mod kernel;
mod special;
mod state;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use kernel::{displacement_kernel, displacement_table, StochasticKernel, LEAKAGE_BOUND};
pub use special::{assoc_laguerre, displaced_population, displacement_amplitude, ln_factorial};
pub(crate) use special::displaced_population_scaled;
pub use state::{state_statistics, JointState, StateStatistics};

/// Battery cutoff `n_max` and the padded workspace cutoff `n_work`.
///
/// Dynamics run on `0..=n_work`; reported distributions are cut at `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpace {
    pub n_max: usize,
    pub n_work: usize,
}

impl FockSpace {
    pub fn new(n_max: usize, n_work: usize) -> Result<Self> {
        if n_max < 1 || n_work < n_max {
            return Err(domain(format!(
                "need n_work >= n_max >= 1, got n_max={n_max} n_work={n_work}"
            )));
        }
        Ok(FockSpace { n_max, n_work })
    }

    /// Workspace padded for a run of `cycles` engine cycles.
    pub fn for_cycles(n_max: usize, cycles: usize) -> Self {
        FockSpace {
            n_max: n_max.max(1),
            n_work: n_max.max(1) + cycles + 5,
        }
    }

    /// Oscillator dimension `n_work + 1`.
    pub fn dim(&self) -> usize {
        self.n_work + 1
    }

    /// Joint qubit ⊗ oscillator dimension.
    pub fn joint_dim(&self) -> usize {
        2 * self.dim()
    }
}

impl Default for FockSpace {
    fn default() -> Self {
        FockSpace::for_cycles(10, 10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Qubit {
    Down,
    Up,
}

impl Qubit {
    pub fn index(self) -> usize {
        match self {
            Qubit::Down => 0,
            Qubit::Up => 1,
        }
    }

    pub fn flip(self) -> Qubit {
        match self {
            Qubit::Down => Qubit::Up,
            Qubit::Up => Qubit::Down,
        }
    }

    pub const BOTH: [Qubit; 2] = [Qubit::Down, Qubit::Up];
}

/// Phase-space displacement `α` (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexDisplacement(pub Complex64);

impl ComplexDisplacement {
    pub fn zero() -> Self {
        ComplexDisplacement(Complex64::new(0.0, 0.0))
    }

    /// `|α|²`, the mean phonon number added to the vacuum.
    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }
}

/// Probability vector over Fock states `|0⟩..|n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononDistribution {
    probs: Vec<f64>,
}

impl PhononDistribution {
    const SUM_TOL: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(domain("empty phonon distribution"));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(domain(format!("negative or non-finite probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOL {
            return Err(domain(format!("probabilities sum to {total}")));
        }
        Ok(PhononDistribution { probs })
    }

    /// Normalizes a non-negative weight vector.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(domain("weights sum to zero"));
        }
        Self::new(weights.into_iter().map(|w| w.max(0.0) / total).collect())
    }

    pub fn fock(n: usize, dim: usize) -> Self {
        assert!(n < dim);
        let mut probs = vec![0.0; dim];
        probs[n] = 1.0;
        PhononDistribution { probs }
    }

    /// Thermal occupation with mean `nbar`, truncated to `dim` levels and renormalized.
    pub fn thermal(nbar: f64, dim: usize) -> Self {
        if nbar <= 0.0 {
            return Self::fock(0, dim);
        }
        let ratio = nbar / (1.0 + nbar);
        let weights: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32)).collect();
        let total: f64 = weights.iter().sum();
        PhononDistribution {
            probs: weights.into_iter().map(|w| w / total).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Restriction to `0..=n_max`, renormalized. The discarded tail is returned.
    pub fn truncated(&self, n_max: usize) -> (PhononDistribution, f64) {
        let keep = (n_max + 1).min(self.probs.len());
        let head: Vec<f64> = self.probs[..keep].to_vec();
        let kept: f64 = head.iter().sum();
        let tail = 1.0 - kept;
        let probs = if kept > 0.0 {
            head.into_iter().map(|p| p / kept).collect()
        } else {
            let mut v = vec![0.0; keep];
            v[keep - 1] = 1.0;
            v
        };
        (PhononDistribution { probs }, tail.max(0.0))
    }

    /// Zero-padded or cut copy of length `dim`; mass beyond `dim` must be negligible.
    pub fn resized(&self, dim: usize) -> PhononDistribution {
        let mut probs = self.probs.clone();
        probs.resize(dim, 0.0);
        let total: f64 = probs.iter().sum();
        PhononDistribution {
            probs: probs.into_iter().map(|p| p / total).collect(),
        }
    }

    /// Shifted up by `k` quanta (the top `k` levels fold into the last one).
    pub fn shifted_up(&self, k: usize) -> PhononDistribution {
        let dim = self.probs.len();
        let mut probs = vec![0.0; dim];
        for (n, p) in self.probs.iter().enumerate() {
            probs[(n + k).min(dim - 1)] += p;
        }
        PhononDistribution { probs }
    }

    pub fn total_variation(&self, other: &PhononDistribution) -> f64 {
        let len = self.len().max(other.len());
        0.5 * (0..len).map(|n| (self.get(n) - other.get(n)).abs()).sum::<f64>()
    }
}
