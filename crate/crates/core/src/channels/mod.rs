//! Physical primitives of the engine as channels on [`JointState`].
//!
//! Kernel-type channels (recoil averages, heating) are phase-averaged: they
//! map Fock populations through a [`StochasticKernel`] and leave no
//! coherences behind.

mod detection;
mod heating;
mod recoil;
mod transfer;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::fock::{JointState, Qubit, StochasticKernel};

pub use detection::{measure_qubit, DetectionMode, DetectorModel, Measurement};
pub use heating::{gauss_laguerre, heating_channel, heating_kernel};
pub use recoil::{
    apply_displacement, calibrate_recoil, mean_recoil_energy, recoil_avg_kernel, recoil_kick, EmissionModel,
    RecoilGeometry,
};
pub use transfer::{adiabatic_ideal, adiabatic_sweep, SweepParams, SweepPropagator};

/// Thermalizes the qubit at excited population `p_up`.
///
/// The oscillator reduced state (populations and coherences) is kept; all
/// qubit coherences are erased.
pub fn bath_channel(state: &JointState, p_up: f64) -> Result<JointState> {
    if !(0.0..=0.5).contains(&p_up) {
        return Err(domain(format!(
            "bath population p_up must lie in [0, 0.5], got {p_up}"
        )));
    }
    let space = state.space();
    let d = space.dim();
    let osc = state.oscillator_reduced();
    let mut m = DMatrix::zeros(space.joint_dim(), space.joint_dim());
    m.view_mut((0, 0), (d, d))
        .copy_from(&(&osc * Complex64::new(1.0 - p_up, 0.0)));
    m.view_mut((d, d), (d, d))
        .copy_from(&(&osc * Complex64::new(p_up, 0.0)));
    Ok(JointState::from_matrix_unchecked(m, space))
}

/// Resonant carrier π pulse: `|↑,n⟩ ↔ |↓,n⟩` for every `n`.
pub fn carrier_pi(state: &JointState) -> JointState {
    let space = state.space();
    let d = space.dim();
    let src = state.matrix();
    let mut m = DMatrix::zeros(space.joint_dim(), space.joint_dim());
    for a in 0..2 {
        for b in 0..2 {
            m.view_mut((a * d, b * d), (d, d))
                .copy_from(&src.view(((1 - a) * d, (1 - b) * d), (d, d)));
        }
    }
    JointState::from_matrix_unchecked(m, space)
}

/// Ideal optical pumping into `|↓⟩`; the oscillator reduced state is kept.
pub fn optical_pump(state: &JointState) -> JointState {
    let space = state.space();
    let d = space.dim();
    let mut m = DMatrix::zeros(space.joint_dim(), space.joint_dim());
    m.view_mut((0, 0), (d, d)).copy_from(&state.oscillator_reduced());
    JointState::from_matrix_unchecked(m, space)
}

/// Applies a population kernel to each qubit sector, dephasing in the
/// Fock basis. Returns the new state and the probability lost to truncation.
pub fn kernel_channel(state: &JointState, kernel: &StochasticKernel) -> (JointState, f64) {
    let space = state.space();
    let d = space.dim();
    let mut m = DMatrix::zeros(space.joint_dim(), space.joint_dim());
    let mut leaked = 0.0;
    for q in Qubit::BOTH {
        let pops = state.sector_populations(q);
        if pops.iter().all(|p| *p == 0.0) {
            continue;
        }
        let (out, lost) = kernel.apply(&pops);
        leaked += lost;
        for (n, p) in out.into_iter().enumerate() {
            m[(q.index() * d + n, q.index() * d + n)] = Complex64::new(p, 0.0);
        }
    }
    (JointState::from_matrix_unchecked(m, space), leaked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;

    fn space() -> FockSpace {
        FockSpace::new(10, 14).unwrap()
    }

    fn coherent_mix() -> JointState {
        // superposition (|↑,1⟩ + |↓,2⟩ + |↓,0⟩)/√3 mixed with |↑,4⟩
        let sp = space();
        let d = sp.joint_dim();
        let mut v = nalgebra::DVector::<Complex64>::zeros(d);
        v[sp.dim() + 1] = Complex64::new(1.0, 0.0);
        v[2] = Complex64::new(0.0, 1.0);
        v[0] = Complex64::new(1.0, 0.0);
        v /= Complex64::new(3f64.sqrt(), 0.0);
        let pure = &v * v.adjoint();
        let pure = JointState::from_matrix(pure, sp).unwrap();
        JointState::mixture(&[(0.7, &pure), (0.3, &JointState::basis(sp, Qubit::Up, 4))]).unwrap()
    }

    #[test]
    fn bath_sets_qubit_and_keeps_oscillator() {
        let s = coherent_mix();
        for p in [0.0, 0.3, 0.5] {
            let out = bath_channel(&s, p).unwrap();
            out.validate().unwrap();
            assert!((out.sector_population(Qubit::Up) - p).abs() < 1e-12);
            assert!(out.block(Qubit::Down, Qubit::Up).iter().all(|z| z.norm() == 0.0));
            let diff = (out.oscillator_reduced() - s.oscillator_reduced()).norm();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn bath_is_idempotent() {
        let s = coherent_mix();
        let once = bath_channel(&s, 0.3).unwrap();
        let twice = bath_channel(&once, 0.3).unwrap();
        assert!((once.matrix() - twice.matrix()).norm() < 1e-14);
    }

    #[test]
    fn bath_leaves_ground_mean_phonon() {
        let s = JointState::basis(space(), Qubit::Down, 0);
        let out = bath_channel(&s, 0.3).unwrap();
        assert_eq!(out.mean_phonon(), 0.0);
    }

    #[test]
    fn bath_rejects_negative_temperature() {
        let s = JointState::basis(space(), Qubit::Down, 0);
        assert!(bath_channel(&s, 0.6).is_err());
        assert!(bath_channel(&s, -0.1).is_err());
        assert!(bath_channel(&s, 1e-9).is_ok());
    }

    #[test]
    fn carrier_swaps_and_is_involution() {
        let s = JointState::basis(space(), Qubit::Up, 3);
        let out = carrier_pi(&s);
        assert_eq!(out.population(Qubit::Down, 3), 1.0);
        let m = coherent_mix();
        let back = carrier_pi(&carrier_pi(&m));
        assert!((back.matrix() - m.matrix()).norm() < 1e-15);
        let pm = carrier_pi(&m).phonon_marginal();
        assert!(pm.total_variation(&m.phonon_marginal()) < 1e-15);
    }

    #[test]
    fn pump_resets_qubit() {
        let s = JointState::basis(space(), Qubit::Up, 2);
        let out = optical_pump(&s);
        assert_eq!(out.population(Qubit::Down, 2), 1.0);
        let m = coherent_mix();
        let once = optical_pump(&m);
        assert!((optical_pump(&once).matrix() - once.matrix()).norm() < 1e-15);
        assert!((once.mean_phonon() - m.mean_phonon()).abs() < 1e-14);
        once.validate().unwrap();
    }

    #[test]
    fn kernel_channel_preserves_trace() {
        let k = crate::fock::displacement_table(0.3, &space());
        let k = StochasticKernel::from_columns(k).unwrap();
        let (out, leaked) = kernel_channel(&coherent_mix(), &k);
        out.validate().unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        assert!(leaked < 1e-6);
    }
}
