use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{DetectorModel, RecoilGeometry, SweepParams};
use crate::engine::{Backend, EngineConfig};
use crate::error::{Error, Result};
use crate::fock::FockSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub shots: usize,
    pub backends: Vec<Backend>,
    pub p_grid: Vec<f64>,
    /// Perfect detector, no recoil, ideal transfer, no heating.
    pub ideal_ops: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 20_240_601,
            shots: 100_000,
            backends: Backend::ALL.to_vec(),
            p_grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            ideal_ops: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub cycles: usize,
    pub use_sweep: bool,
    pub heating_per_cycle: f64,
    pub cycle_time_us: f64,
    pub initial_nbar: f64,
    pub recoil_samples: usize,
    pub pnrd_recoil: bool,
}

impl Default for EngineSection {
    fn default() -> Self {
        let d = EngineConfig::default();
        EngineSection {
            cycles: d.cycles,
            use_sweep: d.use_sweep,
            heating_per_cycle: d.heating_per_cycle,
            cycle_time_us: d.cycle_time_us,
            initial_nbar: d.initial_nbar,
            recoil_samples: d.recoil_samples,
            pnrd_recoil: d.pnrd_recoil,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceSection {
    pub n_max: usize,
    /// Defaults to `n_max + max(cycles, 10) + 5`.
    pub n_work: Option<usize>,
}

impl Default for SpaceSection {
    fn default() -> Self {
        SpaceSection { n_max: 10, n_work: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub target_mean_phonon: f64,
    pub shots: usize,
    pub m1_shots: usize,
    pub m2_samples: usize,
    /// Shots per column of the disturbance-then-readout check; 0 skips it.
    pub verify_shots: usize,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection {
            target_mean_phonon: 0.5,
            shots: 100_000,
            m1_shots: 2000,
            m2_samples: 20_000,
            verify_shots: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure4Section {
    /// Bath settings of the efficiency curves.
    pub p_grid: Vec<f64>,
    /// Simulate the error model at each grid point (exact channel backend).
    pub simulate: bool,
}

impl Default for Figure4Section {
    fn default() -> Self {
        Figure4Section {
            p_grid: (1..=25).map(|k| k as f64 * 0.02).collect(),
            simulate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JarzynskiSection {
    pub p_grid: Vec<f64>,
    pub shots: usize,
    pub backends: Vec<Backend>,
}

impl Default for JarzynskiSection {
    fn default() -> Self {
        JarzynskiSection {
            p_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            shots: 100_000,
            backends: vec![Backend::ExactChannel, Backend::Trajectory],
        }
    }
}

/// Declarative experiment file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub engine: EngineSection,
    pub space: SpaceSection,
    pub detector: DetectorModel,
    pub geometry: RecoilGeometry,
    pub sweep: SweepParams,
    pub calibration: CalibrationSection,
    pub figure4: Figure4Section,
    pub jarzynski: JarzynskiSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn space(&self) -> Result<FockSpace> {
        let n_max = self.space.n_max;
        let n_work = self
            .space
            .n_work
            .unwrap_or(n_max + self.engine.cycles.max(10) + 5);
        FockSpace::new(n_max, n_work)
    }

    /// Engine settings at one bath population.
    pub fn engine_config(&self, p_up: f64, backend: Backend) -> Result<EngineConfig> {
        let e = &self.engine;
        let mut cfg = EngineConfig {
            p_up,
            cycles: e.cycles,
            backend,
            detector: self.detector,
            geometry: self.geometry,
            sweep: self.sweep,
            use_sweep: e.use_sweep,
            heating_per_cycle: e.heating_per_cycle,
            cycle_time_us: e.cycle_time_us,
            initial_nbar: e.initial_nbar,
            space: self.space()?,
            shots: self.run.shots,
            seed: self.run.seed,
            recoil_samples: e.recoil_samples,
            pnrd_recoil: e.pnrd_recoil,
        };
        if self.run.ideal_ops {
            cfg.detector = DetectorModel::perfect();
            cfg.use_sweep = false;
            cfg.heating_per_cycle = 0.0;
            cfg.initial_nbar = 0.0;
        }
        cfg.validate().map_err(|err| Error::Config(format!("p_up = {p_up}: {err}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Error::Config(format!("{name}: {msg}"));
        if self.run.backends.is_empty() {
            return Err(field("run.backends", "at least one backend required".into()));
        }
        for (name, grid) in [
            ("run.p_grid", &self.run.p_grid),
            ("figure4.p_grid", &self.figure4.p_grid),
            ("jarzynski.p_grid", &self.jarzynski.p_grid),
        ] {
            if let Some(p) = grid.iter().find(|p| !(0.0..=0.5).contains(*p)) {
                return Err(field(name, format!("{p} outside [0, 0.5]")));
            }
        }
        if let Some(p) = self.figure4.p_grid.iter().find(|p| **p <= 0.0) {
            return Err(field("figure4.p_grid", format!("{p}: efficiencies need p_up > 0")));
        }
        if let Some(p) = self.jarzynski.p_grid.iter().find(|p| **p <= 0.0) {
            return Err(field("jarzynski.p_grid", format!("{p}: the work protocol needs p_up > 0")));
        }
        if self.run.shots == 0 {
            return Err(field("run.shots", "must be >= 1".into()));
        }
        if self.jarzynski.shots < 1000 {
            return Err(field("jarzynski.shots", "must be >= 1000".into()));
        }
        if !(self.calibration.target_mean_phonon > 0.0) {
            return Err(field("calibration.target_mean_phonon", "must be positive".into()));
        }
        self.space().map_err(|e| field("space", e.to_string()))?;
        self.detector.validate().map_err(|e| field("detector", e.to_string()))?;
        self.geometry.validate().map_err(|e| field("geometry", e.to_string()))?;
        if self.engine.use_sweep {
            self.sweep.validate().map_err(|e| field("sweep", e.to_string()))?;
        }
        Ok(())
    }
}
