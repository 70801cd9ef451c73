use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{FockSpace, PhononDistribution, Qubit};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-CLIP_TOL, 0)` are float noise and get clipped.
pub(crate) const CLIP_TOL: f64 = 1e-9;

/// Density matrix of the qubit ⊗ truncated oscillator.
///
/// Basis index is `q * (n_work + 1) + n` with `q = 0` for `|↓⟩` and `q = 1`
/// for `|↑⟩`. In the rotating frame `|↓,n⟩` carries `n` quanta and `|↑,n⟩`
/// carries `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    matrix: DMatrix<Complex64>,
    space: FockSpace,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl JointState {
    /// Validates Hermiticity, unit trace and positivity; clips float-noise
    /// negative eigenvalues.
    pub fn from_matrix(matrix: DMatrix<Complex64>, space: FockSpace) -> Result<Self> {
        let dim = space.joint_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "expected {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let state = JointState { matrix, space };
        state.check_hermitian_trace()?;
        state.clip_negative()
    }

    /// Builds a state without validation; callers guarantee a density matrix.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>, space: FockSpace) -> Self {
        JointState { matrix, space }
    }

    pub fn basis(space: FockSpace, q: Qubit, n: usize) -> Self {
        assert!(n <= space.n_work, "Fock level {n} outside workspace");
        let mut matrix = DMatrix::zeros(space.joint_dim(), space.joint_dim());
        let i = q.index() * space.dim() + n;
        matrix[(i, i)] = c(1.0);
        JointState { matrix, space }
    }

    /// Diagonal state from joint populations `pops[q][n]`.
    pub fn from_populations(space: FockSpace, down: &[f64], up: &[f64]) -> Result<Self> {
        let dim = space.dim();
        if down.len() > dim || up.len() > dim {
            return Err(Error::InvalidState("population vector longer than workspace".into()));
        }
        let mut matrix = DMatrix::zeros(space.joint_dim(), space.joint_dim());
        for (n, p) in down.iter().enumerate() {
            matrix[(n, n)] = c(*p);
        }
        for (n, p) in up.iter().enumerate() {
            matrix[(dim + n, dim + n)] = c(*p);
        }
        Self::from_matrix(matrix, space)
    }

    /// Product of a diagonal qubit state `(1-p_up, p_up)` and a diagonal oscillator.
    pub fn product(space: FockSpace, p_up: f64, osc: &PhononDistribution) -> Result<Self> {
        let osc = osc.resized(space.dim());
        let down: Vec<f64> = osc.probs().iter().map(|p| (1.0 - p_up) * p).collect();
        let up: Vec<f64> = osc.probs().iter().map(|p| p_up * p).collect();
        Self::from_populations(space, &down, &up)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn index(&self, q: Qubit, n: usize) -> usize {
        q.index() * self.space.dim() + n
    }

    pub fn population(&self, q: Qubit, n: usize) -> f64 {
        let i = self.index(q, n);
        self.matrix[(i, i)].re
    }

    pub fn sector_population(&self, q: Qubit) -> f64 {
        (0..self.space.dim()).map(|n| self.population(q, n)).sum()
    }

    pub fn sector_populations(&self, q: Qubit) -> Vec<f64> {
        (0..self.space.dim()).map(|n| self.population(q, n)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Oscillator reduced density matrix `Tr_q ρ`.
    pub fn oscillator_reduced(&self) -> DMatrix<Complex64> {
        let d = self.space.dim();
        self.matrix.view((0, 0), (d, d)) + self.matrix.view((d, d), (d, d))
    }

    /// Qubit block `⟨a|ρ|b⟩` as an oscillator operator.
    pub fn block(&self, a: Qubit, b: Qubit) -> DMatrix<Complex64> {
        let d = self.space.dim();
        self.matrix
            .view((a.index() * d, b.index() * d), (d, d))
            .into_owned()
    }

    pub fn phonon_marginal(&self) -> PhononDistribution {
        let d = self.space.dim();
        let probs: Vec<f64> = (0..d)
            .map(|n| (self.population(Qubit::Down, n) + self.population(Qubit::Up, n)).max(0.0))
            .collect();
        PhononDistribution::from_weights(probs).expect("state has unit trace")
    }

    pub fn mean_phonon(&self) -> f64 {
        self.phonon_marginal().mean()
    }

    /// Energy in quanta: `n` for `|↓,n⟩`, `n + 1` for `|↑,n⟩`.
    pub fn energy(&self) -> f64 {
        (0..self.space.dim())
            .map(|n| {
                n as f64 * self.population(Qubit::Down, n)
                    + (n + 1) as f64 * self.population(Qubit::Up, n)
            })
            .sum()
    }

    /// Projects onto a qubit sector. Returns the sector probability and the
    /// normalized post-projection state, or `None` if the sector is empty.
    pub fn project(&self, q: Qubit) -> (f64, Option<JointState>) {
        let prob = self.sector_population(q).max(0.0);
        if prob <= 0.0 {
            return (0.0, None);
        }
        let d = self.space.dim();
        let o = q.index() * d;
        let mut matrix = DMatrix::zeros(self.matrix.nrows(), self.matrix.ncols());
        let block = self.matrix.view((o, o), (d, d)) / c(prob);
        matrix.view_mut((o, o), (d, d)).copy_from(&block);
        (prob, Some(JointState { matrix, space: self.space }))
    }

    /// Convex combination `Σ wᵢ ρᵢ / Σ wᵢ` of states on the same space.
    pub fn mixture(parts: &[(f64, &JointState)]) -> Result<JointState> {
        let first = parts
            .iter()
            .find(|(w, _)| *w > 0.0)
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let space = first.1.space;
        let total: f64 = parts.iter().map(|(w, _)| w.max(0.0)).sum();
        let mut matrix = DMatrix::zeros(space.joint_dim(), space.joint_dim());
        for (w, s) in parts.iter().filter(|(w, _)| *w > 0.0) {
            matrix += &s.matrix * c(*w / total);
        }
        Ok(JointState { matrix, space })
    }

    /// Rescales to unit trace, returning the missing mass.
    pub(crate) fn renormalized(mut self) -> (JointState, f64) {
        let tr = self.trace();
        let lost = (1.0 - tr).max(0.0);
        if tr > 0.0 {
            self.matrix /= c(tr);
        }
        (self, lost)
    }

    fn check_hermitian_trace(&self) -> Result<()> {
        let dev = (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(())
    }

    /// Smallest eigenvalue of the density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.is_diagonal() {
            return self.matrix.diagonal().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        }
        SymmetricEigen::new(self.hermitian_part())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Full validity check: Hermitian, unit trace, eigenvalues ≥ −1e−9.
    pub fn validate(&self) -> Result<()> {
        self.check_hermitian_trace()?;
        let min = self.min_eigenvalue();
        if min < -CLIP_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    fn is_diagonal(&self) -> bool {
        let n = self.matrix.nrows();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == c(0.0)))
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.matrix + self.matrix.adjoint()) * c(0.5)
    }

    /// Clips eigenvalues in `[-1e-9, 0)` to zero and renormalizes; more
    /// negative eigenvalues are an error.
    pub fn clip_negative(self) -> Result<Self> {
        let min = self.min_eigenvalue();
        if min >= 0.0 {
            return Ok(self);
        }
        if min < -CLIP_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        let space = self.space;
        let eig = SymmetricEigen::new(self.hermitian_part());
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let vals = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            clipped.len(),
            clipped.iter().map(|l| c(l / total)),
        ));
        let matrix = &eig.eigenvectors * vals * eig.eigenvectors.adjoint();
        Ok(JointState { matrix, space })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateStatistics {
    pub mean_phonon: f64,
    pub qubit_up_population: f64,
    pub phonon_marginal: PhononDistribution,
}

pub fn state_statistics(state: &JointState) -> StateStatistics {
    let phonon_marginal = state.phonon_marginal();
    StateStatistics {
        mean_phonon: phonon_marginal.mean(),
        qubit_up_population: state.sector_population(Qubit::Up).clamp(0.0, 1.0),
        phonon_marginal,
    }
}
