use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::recoil::{apply_displacement, recoil_kick, RecoilGeometry};
use crate::error::Result;
use crate::fock::{ComplexDisplacement, JointState, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// Flip the physical value with the calibrated confusion probabilities.
    #[default]
    Confusion,
    /// Sample Poisson photon counts and threshold them.
    PhotonCounts,
}

/// Fast fluorescence detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorModel {
    /// P(report ↑ | physical ↓)
    pub eps_dark: f64,
    /// P(report ↓ | physical ↑)
    pub eps_bright: f64,
    /// Absorption/emission pairs scattered by a bright ion per detection.
    pub n_photon_pairs: usize,
    pub mean_bright_counts: f64,
    pub count_threshold: u64,
    pub mode: DetectionMode,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            eps_dark: 0.022,
            eps_bright: 0.004,
            n_photon_pairs: 235,
            mean_bright_counts: 7.3,
            count_threshold: 1,
            mode: DetectionMode::Confusion,
        }
    }
}

fn poisson_cdf_below(mean: f64, threshold: u64) -> f64 {
    // P(X < threshold)
    let mut term = (-mean).exp();
    let mut acc = 0.0;
    for k in 0..threshold {
        acc += term;
        term *= mean / (k + 1) as f64;
    }
    acc
}

impl DetectorModel {
    /// Error-free detector that leaves the oscillator alone.
    pub fn perfect() -> Self {
        DetectorModel {
            eps_dark: 0.0,
            eps_bright: 0.0,
            n_photon_pairs: 0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps_dark", self.eps_dark), ("eps_bright", self.eps_bright)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(crate::error::domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.mode == DetectionMode::PhotonCounts && !(self.mean_bright_counts >= 0.0) {
            return Err(crate::error::domain("mean_bright_counts must be >= 0"));
        }
        Ok(())
    }

    /// Mean background counts of the dark state, matched so that
    /// `P(counts ≥ 1) = eps_dark`.
    pub fn mean_dark_counts(&self) -> f64 {
        -(1.0 - self.eps_dark).ln()
    }

    /// Confusion probabilities `(P(↑|↓), P(↓|↑))` of the active mode.
    pub fn confusion(&self) -> (f64, f64) {
        match self.mode {
            DetectionMode::Confusion => (self.eps_dark, self.eps_bright),
            DetectionMode::PhotonCounts => (
                1.0 - poisson_cdf_below(self.mean_dark_counts(), self.count_threshold),
                poisson_cdf_below(self.mean_bright_counts, self.count_threshold),
            ),
        }
    }

    /// Probability of reporting `reported` when the ion is `physical`.
    pub fn report_probability(&self, reported: Qubit, physical: Qubit) -> f64 {
        let (false_bright, false_dark) = self.confusion();
        match (physical, reported) {
            (Qubit::Down, Qubit::Up) => false_bright,
            (Qubit::Down, Qubit::Down) => 1.0 - false_bright,
            (Qubit::Up, Qubit::Down) => false_dark,
            (Qubit::Up, Qubit::Up) => 1.0 - false_dark,
        }
    }

    /// Samples the reported label for a physical value.
    pub fn report<R: Rng + ?Sized>(&self, physical: Qubit, rng: &mut R) -> Qubit {
        match self.mode {
            DetectionMode::Confusion => {
                let flip = match physical {
                    Qubit::Down => self.eps_dark,
                    Qubit::Up => self.eps_bright,
                };
                if flip > 0.0 && rng.random::<f64>() < flip {
                    physical.flip()
                } else {
                    physical
                }
            }
            DetectionMode::PhotonCounts => {
                let mean = match physical {
                    Qubit::Down => self.mean_dark_counts(),
                    Qubit::Up => self.mean_bright_counts,
                };
                let counts = if mean > 0.0 {
                    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
                } else {
                    0
                };
                if counts >= self.count_threshold {
                    Qubit::Up
                } else {
                    Qubit::Down
                }
            }
        }
    }
}

/// Outcome of a selective fluorescence measurement.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub physical: Qubit,
    pub reported: Qubit,
    /// Recoil kick suffered by the oscillator (zero for a dark ion).
    pub kick: ComplexDisplacement,
    pub leakage: f64,
    pub state: JointState,
}

/// Fluorescence detection of the qubit.
///
/// The physical value is drawn from the sector populations and the state
/// collapses onto it. The reported label passes through the detector's
/// confusion model. A physically bright ion scatters photons whatever the
/// label, so its oscillator is displaced by a sampled recoil kick.
pub fn measure_qubit<R: Rng + ?Sized>(
    state: &JointState,
    det: &DetectorModel,
    geom: &RecoilGeometry,
    rng: &mut R,
) -> Result<Measurement> {
    let p_up = state.sector_population(Qubit::Up).clamp(0.0, 1.0);
    let physical = if rng.random::<f64>() < p_up {
        Qubit::Up
    } else {
        Qubit::Down
    };
    let (_, collapsed) = state.project(physical);
    let collapsed = collapsed.expect("sampled sector has weight");
    let reported = det.report(physical, rng);
    let (state, kick, leakage) = if physical == Qubit::Up && det.n_photon_pairs > 0 {
        let kick = recoil_kick(det.n_photon_pairs, geom, rng);
        let (s, lost) = apply_displacement(&collapsed, kick);
        (s, kick, lost)
    } else {
        (collapsed, ComplexDisplacement::zero(), 0.0)
    };
    Ok(Measurement {
        physical,
        reported,
        kick,
        leakage,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;
    use crate::seed;

    fn space() -> FockSpace {
        FockSpace::new(10, 14).unwrap()
    }

    #[test]
    fn dark_ground_state_untouched() {
        let s = JointState::basis(space(), Qubit::Down, 0);
        let det = DetectorModel {
            eps_dark: 0.0,
            ..Default::default()
        };
        let mut rng = seed::stream(1, &[]);
        let m = measure_qubit(&s, &det, &RecoilGeometry::default(), &mut rng).unwrap();
        assert_eq!(m.reported, Qubit::Down);
        assert_eq!(m.state, s);
    }

    #[test]
    fn projective_limit_is_repeatable() {
        let sp = space();
        let s = JointState::mixture(&[
            (0.4, &JointState::basis(sp, Qubit::Up, 1)),
            (0.6, &JointState::basis(sp, Qubit::Down, 3)),
        ])
        .unwrap();
        let det = DetectorModel::perfect();
        let mut rng = seed::stream(2, &[]);
        for _ in 0..200 {
            let first = measure_qubit(&s, &det, &RecoilGeometry::default(), &mut rng).unwrap();
            let second = measure_qubit(&first.state, &det, &RecoilGeometry::default(), &mut rng).unwrap();
            assert_eq!(first.reported, second.reported);
            assert_eq!(first.state, second.state);
        }
    }

    #[test]
    fn count_model_matches_threshold_rule() {
        let det = DetectorModel {
            mode: DetectionMode::PhotonCounts,
            ..Default::default()
        };
        let (fb, fd) = det.confusion();
        assert!((fb - 0.022).abs() < 1e-12);
        assert!((fd - (-7.3f64).exp()).abs() < 1e-12);
        let mut rng = seed::stream(3, &[]);
        let shots = 200_000;
        let bright_as_dark = (0..shots)
            .filter(|_| det.report(Qubit::Down, &mut rng) == Qubit::Up)
            .count() as f64
            / shots as f64;
        let sigma = (0.022 * 0.978 / shots as f64).sqrt();
        assert!((bright_as_dark - 0.022).abs() < 4.0 * sigma);
    }

    #[test]
    fn confusion_probabilities_sum_to_one() {
        let det = DetectorModel::default();
        for phys in Qubit::BOTH {
            let total: f64 = Qubit::BOTH.iter().map(|r| det.report_probability(*r, phys)).sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
    }
}
