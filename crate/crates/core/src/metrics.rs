//! Thermodynamic and information measures. Energies in `ħωₓ`, information in nats.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::engine::EngineRun;
use crate::error::{domain, Result};
use crate::fock::{FockSpace, PhononDistribution};

/// `k_BT = 1 / ln((1-p)/p)`; infinite at `p = 0.5`.
pub fn bath_temperature(p_up: f64) -> Result<f64> {
    if !(p_up > 0.0 && p_up <= 0.5) {
        return Err(domain(format!("bath temperature needs p_up in (0, 0.5], got {p_up}")));
    }
    if p_up == 0.5 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / ((1.0 - p_up) / p_up).ln())
}

/// Binary entropy of the measurement outcome.
pub fn mutual_information(p_up: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_up) {
        return Err(domain(format!("probability out of range: {p_up}")));
    }
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Ok(h(p_up) + h(1.0 - p_up))
}

/// Harmonic ladder `E_i = i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn harmonic(n_max: usize) -> Self {
        EnergySpectrum {
            levels: (0..=n_max).map(|i| i as f64).collect(),
        }
    }

    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("energy levels must be non-empty and strictly increasing"));
        }
        Ok(EnergySpectrum { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn energy(&self, probs: &[f64]) -> Result<f64> {
        if probs.len() > self.levels.len() {
            return Err(domain(format!(
                "distribution has {} levels but the spectrum only {}",
                probs.len(),
                self.levels.len()
            )));
        }
        Ok(probs.iter().zip(&self.levels).map(|(p, e)| p * e).sum())
    }
}

/// Probabilities sorted non-increasing; ties keep their original order.
pub fn passive_state(dist: &PhononDistribution) -> PhononDistribution {
    let mut probs = dist.probs().to_vec();
    probs.sort_by(|a, b| b.total_cmp(a));
    PhononDistribution::new(probs).expect("permutation of a valid distribution")
}

/// Ergotropy of a Fock-diagonal battery state: mean energy minus the energy
/// of its passive rearrangement.
pub fn ergotropy(dist: &PhononDistribution, spectrum: &EnergySpectrum) -> Result<f64> {
    let active = spectrum.energy(dist.probs())?;
    let passive = spectrum.energy(passive_state(dist).probs())?;
    Ok((active - passive).max(0.0))
}

/// Ergotropy of a general density matrix on the ladder, through its spectrum.
pub fn ergotropy_matrix(rho: &DMatrix<Complex64>, spectrum: &EnergySpectrum) -> Result<f64> {
    let d = rho.nrows();
    if rho.ncols() != d || d > spectrum.len() {
        return Err(domain("density matrix does not fit the spectrum"));
    }
    let active: f64 = (0..d).map(|i| rho[(i, i)].re * spectrum.levels[i]).sum();
    let mut eig: Vec<f64> = SymmetricEigen::new(rho.clone()).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let passive: f64 = eig.iter().zip(&spectrum.levels).map(|(l, e)| l * e).sum();
    Ok((active - passive).max(0.0))
}

/// `C(N,n) pᴺ (1-p)^{N-n}` over `0..len`, computed in log space.
pub fn binomial_distribution(cycles: usize, p_up: f64, len: usize) -> Result<PhononDistribution> {
    if !(0.0..=1.0).contains(&p_up) {
        return Err(domain(format!("probability out of range: {p_up}")));
    }
    if cycles >= len {
        return Err(domain(format!("{cycles} cycles do not fit in {len} levels")));
    }
    let mut probs = vec![0.0; len];
    if p_up == 0.0 || p_up == 1.0 {
        probs[if p_up == 0.0 { 0 } else { cycles }] = 1.0;
        return PhononDistribution::new(probs);
    }
    use crate::fock::ln_factorial;
    for (n, slot) in probs.iter_mut().enumerate().take(cycles + 1) {
        let ln = ln_factorial(cycles) - ln_factorial(n) - ln_factorial(cycles - n)
            + n as f64 * p_up.ln()
            + (cycles - n) as f64 * (1.0 - p_up).ln();
        *slot = ln.exp();
    }
    PhononDistribution::from_weights(probs)
}

/// Binomial battery distribution after `cycles` error-free cycles, padded to the workspace.
pub fn ideal_phonon_distribution(cycles: usize, p_up: f64, space: &FockSpace) -> Result<PhononDistribution> {
    if cycles > space.n_work {
        return Err(domain(format!("{cycles} cycles exceed n_work = {}", space.n_work)));
    }
    binomial_distribution(cycles, p_up, space.dim())
}

/// Large-N approximation `Np - √(2Np(1-p)/π)`.
pub fn ergotropy_asymptotic(cycles: usize, p_up: f64) -> Result<f64> {
    if cycles == 0 || !(p_up > 0.0 && p_up <= 1.0) {
        return Err(domain("asymptotic ergotropy needs cycles >= 1 and p_up in (0, 1]"));
    }
    let n = cycles as f64;
    Ok(n * p_up - (2.0 * n * p_up * (1.0 - p_up) / PI).sqrt())
}

/// Efficiencies of one bath setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub p_up: f64,
    pub cycles: usize,
    pub k_b_t: f64,
    pub mutual_info: f64,
    pub mean_work_per_cycle: f64,
    /// Mean over cycles `k = 1..N` of `E_k / k`.
    pub mean_ergotropy_per_cycle: f64,
    pub final_ergotropy: f64,
    pub info_work_eff: f64,
    /// `Ē / (k_BT I)` with the cycle-averaged `Ē`.
    pub charging_eff: f64,
    /// `(E_N / N) / (k_BT I)`.
    pub charging_eff_final: f64,
}

fn report(p_up: f64, work: f64, ergotropies: &[f64]) -> Result<EfficiencyReport> {
    if !(p_up > 0.0 && p_up <= 0.5) {
        return Err(domain(format!("efficiencies need p_up in (0, 0.5], got {p_up}")));
    }
    let cycles = ergotropies.len();
    if cycles == 0 {
        return Err(domain("efficiencies need at least one cycle"));
    }
    let k_b_t = bath_temperature(p_up)?;
    let mutual_info = mutual_information(p_up)?;
    let per_cycle = ergotropies
        .iter()
        .enumerate()
        .map(|(k, e)| e / (k + 1) as f64)
        .sum::<f64>()
        / cycles as f64;
    let final_ergotropy = ergotropies[cycles - 1];
    let scale = |x: f64| if k_b_t.is_infinite() { 0.0 } else { x / (k_b_t * mutual_info) };
    Ok(EfficiencyReport {
        p_up,
        cycles,
        k_b_t,
        mutual_info,
        mean_work_per_cycle: work,
        mean_ergotropy_per_cycle: per_cycle,
        final_ergotropy,
        info_work_eff: scale(work),
        charging_eff: scale(per_cycle),
        charging_eff_final: scale(final_ergotropy / cycles as f64),
    })
}

/// Error-free efficiencies from the binomial closed forms.
pub fn efficiencies_ideal(cycles: usize, p_up: f64) -> Result<EfficiencyReport> {
    let spectrum = EnergySpectrum::harmonic(cycles);
    let ergotropies = (1..=cycles)
        .map(|k| ergotropy(&binomial_distribution(k, p_up, cycles + 1)?, &spectrum))
        .collect::<Result<Vec<_>>>()?;
    report(p_up, p_up, &ergotropies)
}

/// Efficiencies of a simulated run, from its mean work and the ergotropy of
/// the number-resolved readout distributions (what an experiment records).
pub fn efficiencies(run: &EngineRun) -> Result<EfficiencyReport> {
    let spectrum = EnergySpectrum::harmonic(run.config.space.n_max);
    let ergotropies = run
        .per_cycle
        .iter()
        .map(|c| ergotropy(&c.readout(), &spectrum))
        .collect::<Result<Vec<_>>>()?;
    let work = run.per_cycle.iter().map(|c| c.mean_work).sum::<f64>() / run.per_cycle.len().max(1) as f64;
    report(run.config.p_up, work, &ergotropies)
}

/// `lim_{p→0} info_work_eff`, which the closed forms leave as 0/0.
pub fn info_work_eff_zero_limit() -> f64 {
    1.0
}

/// Ideal power `p_up / cycle_time` in quanta per µs.
pub fn engine_power(p_up: f64, cycle_time_us: f64) -> Result<f64> {
    if !(cycle_time_us > 0.0) {
        return Err(domain(format!("cycle time must be positive, got {cycle_time_us}")));
    }
    Ok(p_up / cycle_time_us)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temperature_examples() {
        let p = 1.0 / (1.0 + std::f64::consts::E);
        assert!((bath_temperature(p).unwrap() - 1.0).abs() < 1e-12);
        assert!(bath_temperature(0.5).unwrap().is_infinite());
        assert!((bath_temperature(0.1).unwrap() - 1.0 / 9f64.ln()).abs() < 1e-12);
        assert!(bath_temperature(0.0).is_err());
    }

    #[test]
    fn temperature_inverts_by_bisection() {
        let target = bath_temperature(0.1).unwrap();
        let (mut lo, mut hi) = (1e-6, 0.5 - 1e-9);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if bath_temperature(mid).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 0.1).abs() < 1e-9);
    }

    #[test]
    fn information_examples() {
        assert!((mutual_information(0.5).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(mutual_information(0.0).unwrap(), 0.0);
        assert!((mutual_information(0.3).unwrap() - 0.6109).abs() < 1e-4);
        assert!((mutual_information(0.2).unwrap() - mutual_information(0.8).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn ergotropy_examples() {
        let two = PhononDistribution::new(vec![0.3, 0.7]).unwrap();
        assert!((ergotropy(&two, &EnergySpectrum::harmonic(1)).unwrap() - 0.4).abs() < 1e-12);
        let thermal = PhononDistribution::thermal(0.7, 11);
        assert_eq!(ergotropy(&thermal, &EnergySpectrum::harmonic(10)).unwrap(), 0.0);
        let b = binomial_distribution(10, 0.5, 11).unwrap();
        let e = ergotropy(&b, &EnergySpectrum::harmonic(10)).unwrap();
        assert!((e - (5.0 - 2134.0 / 1024.0)).abs() < 1e-12);
    }

    #[test]
    fn passive_state_examples() {
        let d = PhononDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(passive_state(&d).probs(), &[0.5, 0.3, 0.2]);
        let s = passive_state(&d);
        assert_eq!(passive_state(&s), s);
    }

    #[test]
    fn matrix_path_matches_diagonal_path() {
        let d = PhononDistribution::new(vec![0.1, 0.2, 0.4, 0.3]).unwrap();
        let rho = DMatrix::from_fn(4, 4, |i, j| if i == j { Complex64::new(d.get(i), 0.0) } else { Complex64::new(0.0, 0.0) });
        let sp = EnergySpectrum::harmonic(3);
        assert!((ergotropy_matrix(&rho, &sp).unwrap() - ergotropy(&d, &sp).unwrap()).abs() < 1e-12);
        // pure superposition: all energy is extractable
        let v = [0.6f64.sqrt(), 0.0, 0.4f64.sqrt(), 0.0];
        let pure = DMatrix::from_fn(4, 4, |i, j| Complex64::new(v[i] * v[j], 0.0));
        assert!((ergotropy_matrix(&pure, &sp).unwrap() - 0.8).abs() < 1e-10);
    }

    #[test]
    fn binomial_means() {
        let sp = FockSpace::new(10, 25).unwrap();
        assert_eq!(ideal_phonon_distribution(0, 0.3, &sp).unwrap().get(0), 1.0);
        assert!((ideal_phonon_distribution(10, 0.5, &sp).unwrap().mean() - 5.0).abs() < 1e-12);
        assert!((ideal_phonon_distribution(10, 0.3, &sp).unwrap().mean() - 3.0).abs() < 1e-12);
        assert!(ideal_phonon_distribution(26, 0.3, &sp).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        let a = ergotropy_asymptotic(10, 0.5).unwrap();
        assert!((a - (5.0 - (5.0 / PI).sqrt())).abs() < 1e-12);
        assert!((ergotropy_asymptotic(10, 1.0).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn efficiency_examples() {
        let r = efficiencies_ideal(10, 0.3).unwrap();
        assert!((r.info_work_eff - 0.3 * (7.0f64 / 3.0).ln() / mutual_information(0.3).unwrap()).abs() < 1e-12);
        assert!((r.info_work_eff - 0.4161).abs() < 1e-4);
        let r = efficiencies_ideal(10, 0.5).unwrap();
        assert_eq!((r.info_work_eff, r.charging_eff), (0.0, 0.0));
        assert!(efficiencies_ideal(10, 0.0).is_err());
        for p in [0.05, 0.1, 0.2, 0.3, 0.4] {
            let r = efficiencies_ideal(10, p).unwrap();
            assert!(r.charging_eff <= r.info_work_eff);
        }
    }

    #[test]
    fn power_examples() {
        assert!((engine_power(0.5, 455.0).unwrap() - 0.0011).abs() < 0.0011 * 0.05);
        assert_eq!(engine_power(0.0, 455.0).unwrap(), 0.0);
        assert!((engine_power(0.3, 200.0).unwrap() - 2.0 * engine_power(0.3, 400.0).unwrap()).abs() < 1e-15);
    }
}
