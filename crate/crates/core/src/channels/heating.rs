use nalgebra::{DMatrix, SymmetricEigen};

use super::kernel_channel;
use crate::error::{domain, Result};
use crate::fock::{displaced_population_scaled, FockSpace, JointState, StochasticKernel, LEAKAGE_BOUND};

/// Gauss-Laguerre nodes and weights for `∫₀^∞ e^{-x} f(x) dx` (Golub-Welsch).
pub fn gauss_laguerre(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points > 0);
    let jacobi = DMatrix::from_fn(points, points, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i.abs_diff(j) == 1 {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.row(0).iter())
        .map(|(x, v)| (*x, v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Population kernel of a Gaussian random displacement with `E|α|² = delta_nbar`.
///
/// `|α|²` is exponentially distributed, and each `|<m|D|n>|²` is `e^{-s}`
/// times a polynomial of degree `m + n`, so a Gauss-Laguerre rule with
/// `n_work + 1` points integrates every entry exactly.
pub fn heating_kernel(delta_nbar: f64, space: &FockSpace) -> Result<StochasticKernel> {
    if !(delta_nbar >= 0.0) || !delta_nbar.is_finite() {
        return Err(domain(format!("heating increment must be >= 0, got {delta_nbar}")));
    }
    let dim = space.dim();
    if delta_nbar == 0.0 {
        return Ok(StochasticKernel::identity(dim));
    }
    // ∫ (1/Δ) e^{-s/Δ} e^{-s} g(s) ds = 1/(1+Δ) ∫ e^{-x} g(c x) dx, c = Δ/(1+Δ)
    let c = delta_nbar / (1.0 + delta_nbar);
    let (nodes, weights) = gauss_laguerre(dim + 1);
    let table = DMatrix::from_fn(dim, dim, |m, n| {
        nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * displaced_population_scaled(m, n, c * x))
            .sum::<f64>()
            / (1.0 + delta_nbar)
    });
    StochasticKernel::from_columns(table.map(|v| v.max(0.0)))?.check_leakage(space.n_max, LEAKAGE_BOUND)
}

/// Anomalous heating: every qubit sector's phonon populations pass through
/// [`heating_kernel`]. Returns the state and the truncation leakage.
pub fn heating_channel(state: &JointState, delta_nbar: f64, space: &FockSpace) -> Result<(JointState, f64)> {
    if delta_nbar == 0.0 {
        return Ok((state.clone(), 0.0));
    }
    let kernel = heating_kernel(delta_nbar, space)?;
    Ok(kernel_channel(state, &kernel))
}
