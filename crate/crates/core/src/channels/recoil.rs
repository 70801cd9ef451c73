use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fock::{
    displacement_amplitude, displacement_table, ComplexDisplacement, FockSpace, JointState, Qubit,
    StochasticKernel, LEAKAGE_BOUND,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionModel {
    /// Emission direction uniform on the sphere: the x projection `u` is
    /// uniform on `[-1, 1]` and `f_sx = u²`.
    #[default]
    Isotropic,
}

/// Recoil geometry of the detection beam relative to the trap axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoilGeometry {
    /// Lamb-Dicke parameter of one 369.5 nm photon along x.
    pub eta: f64,
    /// Squared projection of the incident beam on x.
    pub f_x: f64,
    pub emission: EmissionModel,
}

impl Default for RecoilGeometry {
    fn default() -> Self {
        RecoilGeometry {
            eta: 0.0525,
            // calibrated to a 0.5 phonon kick at 235 pairs
            f_x: 0.109,
            emission: EmissionModel::Isotropic,
        }
    }
}

impl RecoilGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(domain(format!("eta must be positive, got {}", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.f_x) {
            return Err(domain(format!("f_x must lie in [0, 1], got {}", self.f_x)));
        }
        Ok(())
    }
}

/// Draws the phase and emission projection of one photon pair.
fn draw_pair<R: Rng + ?Sized>(rng: &mut R) -> (Complex64, f64) {
    let phi = 2.0 * PI * rng.random::<f64>();
    let u: f64 = rng.random_range(-1.0..=1.0);
    (Complex64::from_polar(1.0, phi), u.abs())
}

/// Total phase-space kick of `n_pairs` absorption/emission pairs.
///
/// Pair `j` contributes `η (√f_x + √f_sx,j) e^{iφ_j}` with an independent
/// uniform phase, so `E[α] = 0` and `E|α|²` grows linearly in `n_pairs`.
pub fn recoil_kick<R: Rng + ?Sized>(n_pairs: usize, geom: &RecoilGeometry, rng: &mut R) -> ComplexDisplacement {
    let sx = geom.f_x.sqrt();
    let mut alpha = Complex64::new(0.0, 0.0);
    for _ in 0..n_pairs {
        let (phase, proj) = draw_pair(rng);
        alpha += phase * (geom.eta * (sx + proj));
    }
    ComplexDisplacement(alpha)
}

/// Monte Carlo estimate of `E|α|²` and its standard error.
pub fn mean_recoil_energy<R: Rng + ?Sized>(
    n_pairs: usize,
    geom: &RecoilGeometry,
    shots: usize,
    rng: &mut R,
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..shots {
        let s = recoil_kick(n_pairs, geom, rng).norm_sqr();
        sum += s;
        sum_sq += s * s;
    }
    let n = shots as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Applies the displacement `D(α)` to the oscillator of every qubit block.
/// Returns the renormalized state and the trace lost to truncation.
pub fn apply_displacement(state: &JointState, kick: ComplexDisplacement) -> (JointState, f64) {
    if kick.norm_sqr() == 0.0 {
        return (state.clone(), 0.0);
    }
    let space = state.space();
    let d = space.dim();
    let disp = DMatrix::from_fn(d, d, |m, n| displacement_amplitude(m, n, kick.0));
    let disp_adj = disp.adjoint();
    let mut out = DMatrix::zeros(space.joint_dim(), space.joint_dim());
    for a in Qubit::BOTH {
        for b in Qubit::BOTH {
            let block = state.block(a, b);
            if block.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let moved = &disp * block * &disp_adj;
            out.view_mut((a.index() * d, b.index() * d), (d, d)).copy_from(&moved);
        }
    }
    JointState::from_matrix_unchecked(out, space).renormalized()
}

/// Fits `f_x` so that the Monte Carlo mean kick energy hits `target_mean_phonon`.
///
/// All bisection steps reuse the same photon draws, so the estimator is a
/// smooth increasing function of `f_x`. A target within 1% of either end of
/// the bracket returns that end.
pub fn calibrate_recoil<R: Rng + ?Sized>(
    target_mean_phonon: f64,
    n_pairs: usize,
    geom: &RecoilGeometry,
    shots: usize,
    rng: &mut R,
) -> Result<RecoilGeometry> {
    if !(target_mean_phonon > 0.0) {
        return Err(domain(format!("calibration target must be positive, got {target_mean_phonon}")));
    }
    if shots == 0 {
        return Err(domain("calibration needs at least one shot"));
    }
    geom.validate()?;
    // |α|² = η² (f_x |S|² + 2√f_x Re(S̄T) + |T|²), S = Σ e^{iφ}, T = Σ √f_sx e^{iφ}
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for _ in 0..shots {
        let mut s = Complex64::new(0.0, 0.0);
        let mut t = Complex64::new(0.0, 0.0);
        for _ in 0..n_pairs {
            let (phase, proj) = draw_pair(rng);
            s += phase;
            t += phase * proj;
        }
        a += s.norm_sqr();
        b += 2.0 * (s.conj() * t).re;
        c += t.norm_sqr();
    }
    let scale = geom.eta * geom.eta / shots as f64;
    let mean_at = |f_x: f64| scale * (a * f_x + b * f_x.sqrt() + c);

    let tol = 0.01 * target_mean_phonon;
    let (low, high) = (mean_at(0.0), mean_at(1.0));
    let with = |f_x: f64| RecoilGeometry { f_x, ..*geom };
    if (low - target_mean_phonon).abs() <= tol {
        return Ok(with(0.0));
    }
    if (high - target_mean_phonon).abs() <= tol {
        return Ok(with(1.0));
    }
    if target_mean_phonon < low || target_mean_phonon > high {
        return Err(Error::CalibrationOutOfRange {
            target: target_mean_phonon,
            low,
            high,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < target_mean_phonon {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(with(0.5 * (lo + hi)))
}

/// Fluorescence-disturbance kernel: average displacement kernel over
/// sampled recoil kicks.
pub fn recoil_avg_kernel<R: Rng + ?Sized>(
    n_pairs: usize,
    geom: &RecoilGeometry,
    samples: usize,
    space: &FockSpace,
    rng: &mut R,
) -> Result<StochasticKernel> {
    if samples < 1000 {
        return Err(domain(format!("recoil kernel needs >= 1000 samples, got {samples}")));
    }
    if n_pairs == 0 {
        return Ok(StochasticKernel::identity(space.dim()));
    }
    let mut acc = StochasticKernel::zeros(space.dim(), space.dim());
    let w = 1.0 / samples as f64;
    for _ in 0..samples {
        let s = recoil_kick(n_pairs, geom, rng).norm_sqr();
        acc.accumulate(&displacement_table(s, space), w);
    }
    StochasticKernel::from_columns(acc.into_matrix())?.check_leakage(space.n_max, LEAKAGE_BOUND)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn zero_pairs_no_kick() {
        let mut rng = seed::stream(1, &[]);
        assert_eq!(recoil_kick(0, &RecoilGeometry::default(), &mut rng).norm_sqr(), 0.0);
    }

    #[test]
    fn kick_has_zero_mean() {
        let mut rng = seed::stream(2, &[]);
        let geom = RecoilGeometry::default();
        let shots = 100_000;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut energy = 0.0;
        for _ in 0..shots {
            let a = recoil_kick(235, &geom, &mut rng).0;
            sum += a;
            energy += a.norm_sqr();
        }
        let mean = sum / shots as f64;
        // each component has variance E|α|²/2
        let sigma = (energy / shots as f64 / 2.0 / shots as f64).sqrt();
        assert!(mean.re.abs() < 3.0 * sigma && mean.im.abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn kick_energy_linear_in_pairs() {
        let geom = RecoilGeometry::default();
        let (e1, _) = mean_recoil_energy(235, &geom, 100_000, &mut seed::stream(3, &[]));
        let (e2, _) = mean_recoil_energy(470, &geom, 100_000, &mut seed::stream(4, &[]));
        assert!((e2 / e1 - 2.0).abs() < 0.05, "ratio {}", e2 / e1);
    }

    #[test]
    fn calibration_matches_closed_form() {
        // N η² (f_x + 2√f_x E√f_sx + E f_sx) = 0.5 with E√f_sx = 1/2, E f_sx = 1/3
        let n = 235.0;
        let eta: f64 = 0.0525;
        let k = 0.5 / (n * eta * eta) - 1.0 / 3.0;
        let y = (-1.0 + (1.0 + 4.0 * k).sqrt()) / 2.0;
        let oracle = y * y;
        assert!((oracle - 0.1088).abs() < 1e-3);

        let g = calibrate_recoil(0.5, 235, &RecoilGeometry::default(), 50_000, &mut seed::stream(5, &[])).unwrap();
        assert!((g.f_x - oracle).abs() < 0.02, "f_x {}", g.f_x);
        assert!((g.f_x - 0.12).abs() <= 0.02);
    }

    #[test]
    fn calibration_lower_bracket() {
        let geom = RecoilGeometry::default();
        let target = 235.0 * geom.eta * geom.eta / 3.0;
        let g = calibrate_recoil(target, 235, &geom, 50_000, &mut seed::stream(6, &[])).unwrap();
        assert_eq!(g.f_x, 0.0);
    }

    #[test]
    fn calibration_out_of_range() {
        let geom = RecoilGeometry::default();
        let err = calibrate_recoil(50.0, 235, &geom, 10_000, &mut seed::stream(7, &[])).unwrap_err();
        match err {
            Error::CalibrationOutOfRange { low, high, .. } => assert!(low < high && high < 50.0),
            e => panic!("unexpected {e:?}"),
        }
        assert!(calibrate_recoil(0.01, 235, &geom, 10_000, &mut seed::stream(8, &[])).is_err());
        assert!(calibrate_recoil(0.0, 235, &geom, 10_000, &mut seed::stream(9, &[])).is_err());
    }

    #[test]
    fn doubling_target_doubles_pairs() {
        let geom = RecoilGeometry::default();
        let g1 = calibrate_recoil(0.5, 235, &geom, 50_000, &mut seed::stream(10, &[])).unwrap();
        let g2 = calibrate_recoil(1.0, 470, &geom, 50_000, &mut seed::stream(11, &[])).unwrap();
        assert!((g1.f_x - g2.f_x).abs() < 0.02, "{} vs {}", g1.f_x, g2.f_x);
    }

    #[test]
    fn kernel_identity_without_photons() {
        let space = FockSpace::new(10, 20).unwrap();
        let k = recoil_avg_kernel(0, &RecoilGeometry::default(), 1000, &space, &mut seed::stream(12, &[])).unwrap();
        assert_eq!(k, StochasticKernel::identity(21));
        assert!(recoil_avg_kernel(235, &RecoilGeometry::default(), 10, &space, &mut seed::stream(12, &[])).is_err());
    }

    #[test]
    fn kernel_vacuum_column_mean_is_kick_energy() {
        let space = FockSpace::new(10, 25).unwrap();
        let geom = RecoilGeometry::default();
        let samples = 20_000;
        let mut rng = seed::stream(13, &[]);
        let k = recoil_avg_kernel(235, &geom, samples, &space, &mut rng).unwrap();
        let (energy, se) = mean_recoil_energy(235, &geom, samples, &mut seed::stream(13, &[]));
        // same draws: the mean-shift law makes the column mean equal the sample mean of |α|²
        assert!((k.column_mean(0) - energy).abs() < 1e-6, "{} vs {energy} ± {se}", k.column_mean(0));
        for n in 0..k.cols() {
            assert!(k.matrix().column(n).iter().all(|p| *p >= 0.0));
            assert!((k.matrix().column(n).sum() - 1.0).abs() < 1e-12);
        }
    }
}
