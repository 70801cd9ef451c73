use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::Engine;
use crate::channels::{carrier_pi, measure_qubit, optical_pump, recoil_avg_kernel, DetectorModel};
use crate::error::{domain, Result};
use crate::fock::{JointState, PhononDistribution, Qubit, StochasticKernel};
use crate::seed;

/// Result of one number-resolving readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PnrdOutcome {
    /// Rounds minus one.
    pub value: usize,
    /// The round cap was hit without a bright report.
    pub saturated: bool,
}

impl Engine {
    fn pnrd_cap(&self) -> usize {
        self.cfg.space.n_work + 1
    }

    fn pnrd_detector(&self) -> DetectorModel {
        let mut det = self.cfg.detector;
        if !self.cfg.pnrd_recoil {
            det.n_photon_pairs = 0;
        }
        det
    }

    fn saturated(&self) -> PnrdOutcome {
        PnrdOutcome {
            value: self.cfg.space.n_work,
            saturated: true,
        }
    }

    /// Readout loop on a full state: pump, sideband transfer, carrier π,
    /// detect; repeat until a bright report. The result is the number of
    /// rounds minus one.
    pub fn pnrd<R: Rng + ?Sized>(&self, state: &JointState, rng: &mut R) -> Result<PnrdOutcome> {
        let det = self.pnrd_detector();
        let mut s = state.clone();
        for round in 1..=self.pnrd_cap() {
            let (moved, _) = self.transfer(&optical_pump(&s));
            let m = measure_qubit(&carrier_pi(&moved), &det, &self.cfg.geometry, rng)?;
            if m.reported == Qubit::Up {
                return Ok(PnrdOutcome {
                    value: round - 1,
                    saturated: false,
                });
            }
            s = m.state;
        }
        Ok(self.saturated())
    }

    /// The same loop on a phonon number state.
    pub(crate) fn pnrd_basis<R: Rng + ?Sized>(&self, mut n: usize, rng: &mut R) -> PnrdOutcome {
        for round in 1..=self.pnrd_cap() {
            let mut q = Qubit::Down;
            self.transfer_basis(&mut q, &mut n, rng);
            let (reported, _) = self.detect_basis(q.flip(), &mut n, self.cfg.pnrd_recoil, rng);
            if reported == Qubit::Up {
                return PnrdOutcome {
                    value: round - 1,
                    saturated: false,
                };
            }
        }
        self.saturated()
    }

    /// Exact readout kernel: column `n` is the distribution of the loop's
    /// result for input `|n⟩`, summed over all paths. Saturated runs land in
    /// the last row.
    pub(crate) fn exact_readout_kernel(&self) -> StochasticKernel {
        let dim = self.cfg.space.dim();
        let det = &self.cfg.detector;
        let dark_stop = det.report_probability(Qubit::Up, Qubit::Down);
        let bright_stop = det.report_probability(Qubit::Up, Qubit::Up);
        let kick = self.cfg.pnrd_recoil && self.recoil_active();
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut alive = vec![0.0; dim];
            alive[col] = 1.0;
            for round in 1..=self.pnrd_cap() {
                let mut next = vec![0.0; dim];
                let mut stop = 0.0;
                for (n, &a) in alive.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let s = if n >= 1 { self.transfer_probability(n - 1) } else { 0.0 };
                    // moved down a level, then flipped dark
                    if s > 0.0 {
                        stop += a * s * dark_stop;
                        next[n - 1] += a * s * (1.0 - dark_stop);
                    }
                    // untouched, flipped bright
                    let b = a * (1.0 - s);
                    if b > 0.0 {
                        stop += b * bright_stop;
                        let cont = b * (1.0 - bright_stop);
                        if kick {
                            for (k, p) in self.recoil.matrix().column(n).iter().enumerate() {
                                next[k] += cont * p;
                            }
                        } else {
                            next[n] += cont;
                        }
                    }
                }
                m[(round - 1, col)] += stop;
                alive = next;
            }
            m[(dim - 1, col)] += alive.iter().sum::<f64>();
        }
        StochasticKernel::from_columns(m).expect("readout columns carry unit mass")
    }
}

/// Empirical readout matrix: column `i ≤ n_max` is the histogram of
/// [`Engine::pnrd`] results for input `|↓,i⟩`. Rows span the workspace.
pub fn estimate_m1<R: Rng + ?Sized>(engine: &Engine, shots: usize, rng: &mut R) -> Result<StochasticKernel> {
    if shots < 1000 {
        return Err(domain(format!("estimate_m1 needs >= 1000 shots, got {shots}")));
    }
    let space = engine.space();
    let base: u64 = rng.random();
    let tag = seed::tag("m1");
    let counts = (0..=space.n_max)
        .into_par_iter()
        .map(|i| {
            let mut r = seed::stream(base, &[tag, i as u64]);
            let input = JointState::basis(space, Qubit::Down, i);
            let mut hist = vec![0u64; space.dim()];
            for _ in 0..shots {
                hist[engine.pnrd(&input, &mut r)?.value] += 1;
            }
            Ok(hist)
        })
        .collect::<Result<Vec<_>>>()?;
    StochasticKernel::from_counts(&counts, space.dim())
}

/// Fluorescence-disturbance kernel at the configured photon number and geometry.
pub fn estimate_m2<R: Rng + ?Sized>(engine: &Engine, samples: usize, rng: &mut R) -> Result<StochasticKernel> {
    let cfg = engine.config();
    recoil_avg_kernel(cfg.detector.n_photon_pairs, &cfg.geometry, samples, &cfg.space, rng)
}

/// Comparison of the simulated disturbance-then-readout sequence with the
/// kernel prediction `M1·M2`.
#[derive(Debug, Clone)]
pub struct M2Check {
    pub simulated: Vec<PhononDistribution>,
    pub predicted: Vec<PhononDistribution>,
    pub total_variation: Vec<f64>,
}

impl M2Check {
    pub fn max_total_variation(&self) -> f64 {
        self.total_variation.iter().copied().fold(0.0, f64::max)
    }
}

/// For each `i ≤ n_max`: prepare `|↑,i⟩`, run one fluorescence detection
/// (the bright ion scatters and kicks the oscillator), then read out. The
/// histogram is compared with `M1·M2|i⟩` built from the exact readout kernel
/// and the engine's recoil kernel.
pub fn verify_m2<R: Rng + ?Sized>(engine: &Engine, shots: usize, rng: &mut R) -> Result<M2Check> {
    if shots < 1000 {
        return Err(domain(format!("verify_m2 needs >= 1000 shots, got {shots}")));
    }
    let cfg = engine.config();
    let space = cfg.space;
    let base: u64 = rng.random();
    let tag = seed::tag("m2-check");
    let simulated = (0..=space.n_max)
        .into_par_iter()
        .map(|i| {
            let mut r = seed::stream(base, &[tag, i as u64]);
            let input = JointState::basis(space, Qubit::Up, i);
            let mut hist = vec![0.0; space.dim()];
            for _ in 0..shots {
                let m = measure_qubit(&input, &cfg.detector, &cfg.geometry, &mut r)?;
                hist[engine.pnrd(&m.state, &mut r)?.value] += 1.0;
            }
            PhononDistribution::from_weights(hist)
        })
        .collect::<Result<Vec<_>>>()?;
    let composed = engine.readout_kernel().compose(engine.recoil_kernel());
    let predicted: Vec<PhononDistribution> = (0..=space.n_max).map(|i| composed.column(i)).collect();
    let total_variation = simulated
        .iter()
        .zip(&predicted)
        .map(|(s, p)| s.total_variation(p))
        .collect();
    Ok(M2Check {
        simulated,
        predicted,
        total_variation,
    })
}
