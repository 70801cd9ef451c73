//! Cyclic engine, phonon-number-resolving readout and the work protocol.

mod pnrd;
mod work;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    bath_channel, heating_kernel, kernel_channel, measure_qubit, adiabatic_ideal, recoil_avg_kernel,
    DetectorModel, RecoilGeometry, SweepParams, SweepPropagator,
};
use crate::error::{domain, Error, Result};
use crate::fock::{FockSpace, JointState, PhononDistribution, Qubit, StochasticKernel};
use crate::metrics::binomial_distribution;
use crate::seed;

pub use pnrd::{estimate_m1, estimate_m2, verify_m2, M2Check, PnrdOutcome};
pub use work::{
    jarzynski_check, work_protocol_backward, work_protocol_forward, BackwardResult, ForwardResult,
    JarzynskiResult,
};

/// Shots per work unit; fixes the aggregation order independent of thread count.
pub(crate) const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Deterministic channel composition with outcome-split feedback.
    #[default]
    ExactChannel,
    /// Independent stochastic histories.
    Trajectory,
    /// Error-free binomial chain.
    IdealMarkov,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::IdealMarkov, Backend::ExactChannel, Backend::Trajectory];

    pub fn name(self) -> &'static str {
        match self {
            Backend::ExactChannel => "exact_channel",
            Backend::Trajectory => "trajectory",
            Backend::IdealMarkov => "ideal_markov",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown backend `{s}` (expected exact_channel, trajectory or ideal_markov)")))
    }
}

/// Physical and numerical parameters of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub p_up: f64,
    pub cycles: usize,
    pub backend: Backend,
    pub detector: DetectorModel,
    pub geometry: RecoilGeometry,
    pub sweep: SweepParams,
    /// Time-dependent sideband sweep instead of the ideal swap.
    pub use_sweep: bool,
    pub heating_per_cycle: f64,
    pub cycle_time_us: f64,
    pub initial_nbar: f64,
    pub space: FockSpace,
    pub shots: usize,
    pub seed: u64,
    /// Kicks averaged into the fluorescence-disturbance kernel.
    pub recoil_samples: usize,
    /// Whether detections inside the readout loop also kick the oscillator.
    pub pnrd_recoil: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            p_up: 0.5,
            cycles: 10,
            backend: Backend::ExactChannel,
            detector: DetectorModel::default(),
            geometry: RecoilGeometry::default(),
            sweep: SweepParams::default(),
            use_sweep: true,
            heating_per_cycle: 0.02,
            cycle_time_us: 455.0,
            initial_nbar: 0.009,
            space: FockSpace::for_cycles(10, 10),
            shots: 100_000,
            seed: 20_240_601,
            recoil_samples: 20_000,
            pnrd_recoil: false,
        }
    }
}

impl EngineConfig {
    /// Error-free settings: perfect detector, no recoil, ideal transfer, no
    /// heating, oscillator starting in `|0⟩`.
    pub fn ideal(p_up: f64, cycles: usize) -> Self {
        EngineConfig {
            p_up,
            cycles,
            detector: DetectorModel::perfect(),
            use_sweep: false,
            heating_per_cycle: 0.0,
            initial_nbar: 0.0,
            space: FockSpace::for_cycles(10, cycles),
            ..Default::default()
        }
    }

    /// Default error model at the given bath setting. The workspace
    /// is never smaller than the ten-cycle one, so recoil kicks from the top
    /// battery levels stay inside it.
    pub fn with_errors(p_up: f64, cycles: usize) -> Self {
        EngineConfig {
            p_up,
            cycles,
            space: FockSpace::for_cycles(10, cycles.max(10)),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.p_up) {
            return Err(domain(format!("p_up must lie in [0, 0.5], got {}", self.p_up)));
        }
        if self.shots == 0 {
            return Err(domain("shots must be >= 1"));
        }
        FockSpace::new(self.space.n_max, self.space.n_work)?;
        if self.space.n_work < self.space.n_max + self.cycles {
            return Err(domain(format!(
                "n_work = {} must be >= n_max + cycles = {}",
                self.space.n_work,
                self.space.n_max + self.cycles
            )));
        }
        if !(self.heating_per_cycle >= 0.0) {
            return Err(domain("heating_per_cycle must be >= 0"));
        }
        if !(self.initial_nbar >= 0.0) {
            return Err(domain("initial_nbar must be >= 0"));
        }
        if !(self.cycle_time_us > 0.0) {
            return Err(domain("cycle_time_us must be positive"));
        }
        if self.recoil_samples < 1000 {
            return Err(domain("recoil_samples must be >= 1000"));
        }
        self.detector.validate()?;
        self.geometry.validate()?;
        if self.use_sweep {
            self.sweep.validate()?;
        }
        Ok(())
    }

    fn initial_distribution(&self) -> PhononDistribution {
        PhononDistribution::thermal(self.initial_nbar, self.space.dim())
    }

    /// Ground qubit with a thermal oscillator.
    pub fn initial_state(&self) -> JointState {
        JointState::product(self.space, 0.0, &self.initial_distribution()).expect("thermal state is valid")
    }
}

/// Log of one selective cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle_index: usize,
    pub reported_outcome: Qubit,
    pub physical_outcome: Qubit,
    pub feedback_applied: bool,
    /// Qubit value found after feedback.
    pub post_feedback: Qubit,
    pub work_quanta: u8,
    pub post_distribution: PhononDistribution,
    pub leakage: f64,
}

/// Aggregated statistics after cycle `cycle` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleStats {
    pub cycle: usize,
    /// Battery distribution on `0..=n_max`, renormalized.
    pub distribution: Vec<f64>,
    /// What the number-resolving readout would report, on `0..=n_max`.
    pub readout: Vec<f64>,
    pub mean_phonon: f64,
    pub mean_phonon_stderr: f64,
    pub readout_mean_phonon: f64,
    pub mean_work: f64,
    pub work_stderr: f64,
    /// Probability above `n_max`.
    pub tail: f64,
    /// Probability lost at the workspace edge during this cycle.
    pub leakage: f64,
}

impl CycleStats {
    pub fn distribution(&self) -> PhononDistribution {
        PhononDistribution::from_weights(self.distribution.clone()).expect("stored distribution is valid")
    }

    pub fn readout(&self) -> PhononDistribution {
        PhononDistribution::from_weights(self.readout.clone()).expect("stored distribution is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineRun {
    pub config: EngineConfig,
    pub seed: u64,
    pub initial: Vec<f64>,
    pub per_cycle: Vec<CycleStats>,
}

/// Outcome-conditioned piece of a non-selective measurement.
pub(crate) struct Branch {
    pub reported: Qubit,
    pub weight: f64,
    pub state: JointState,
    pub leakage: f64,
}

/// Engine with its kernels and transfer propagator precomputed.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: EngineConfig,
    heating: StochasticKernel,
    recoil: StochasticKernel,
    sweep: Option<SweepPropagator>,
    readout: StochasticKernel,
}

impl Engine {
    /// Builds the heating kernel, the recoil-averaged kernel (seeded from
    /// `cfg.seed`), the sweep propagator and the exact readout kernel.
    pub fn new(cfg: &EngineConfig) -> Result<Self> {
        cfg.validate()?;
        let space = cfg.space;
        let heating = heating_kernel(cfg.heating_per_cycle, &space)?;
        let mut rng = seed::stream(cfg.seed, &[seed::tag("recoil-kernel")]);
        let recoil = recoil_avg_kernel(cfg.detector.n_photon_pairs, &cfg.geometry, cfg.recoil_samples, &space, &mut rng)?;
        let sweep = if cfg.use_sweep {
            Some(SweepPropagator::new(cfg.sweep, space)?)
        } else {
            None
        };
        let mut engine = Engine {
            cfg: cfg.clone(),
            heating,
            recoil,
            sweep,
            readout: StochasticKernel::identity(space.dim()),
        };
        engine.readout = engine.exact_readout_kernel();
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// Same kernels at another bath setting.
    pub fn with_p_up(&self, p_up: f64) -> Result<Engine> {
        let mut e = self.clone();
        e.cfg.p_up = p_up;
        e.cfg.validate()?;
        Ok(e)
    }

    /// Same kernels with another base seed for the sampled histories.
    pub fn reseeded(&self, seed: u64) -> Engine {
        let mut e = self.clone();
        e.cfg.seed = seed;
        e
    }

    /// Same kernels with another backend.
    pub fn with_backend(&self, backend: Backend) -> Engine {
        let mut e = self.clone();
        e.cfg.backend = backend;
        e
    }

    /// Runs all cycles with the configured backend.
    pub fn run(&self) -> Result<EngineRun> {
        let cfg = &self.cfg;
        let (initial, per_cycle) = match cfg.backend {
            Backend::IdealMarkov => (PhononDistribution::fock(0, cfg.space.dim()), run_ideal(cfg)?),
            Backend::ExactChannel => (cfg.initial_distribution(), self.run_exact()?),
            Backend::Trajectory => (cfg.initial_distribution(), self.run_trajectories()?),
        };
        Ok(EngineRun {
            config: cfg.clone(),
            seed: cfg.seed,
            initial: initial.probs().to_vec(),
            per_cycle,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.cfg.space
    }

    pub fn heating_kernel(&self) -> &StochasticKernel {
        &self.heating
    }

    /// Fluorescence-disturbance kernel of one bright detection.
    pub fn recoil_kernel(&self) -> &StochasticKernel {
        &self.recoil
    }

    /// Exact readout confusion kernel over the whole workspace.
    pub fn readout_kernel(&self) -> &StochasticKernel {
        &self.readout
    }

    fn recoil_active(&self) -> bool {
        self.cfg.detector.n_photon_pairs > 0
    }

    /// Probability that the pair `{|↑,n⟩, |↓,n+1⟩}` swaps under the transfer pulse.
    pub fn transfer_probability(&self, n: usize) -> f64 {
        if n >= self.cfg.space.n_work {
            return 0.0;
        }
        self.sweep.as_ref().map_or(1.0, |s| s.success_probability(n))
    }

    /// Sideband transfer as configured (ideal swap or sweep).
    pub fn transfer(&self, state: &JointState) -> (JointState, f64) {
        match &self.sweep {
            Some(p) => p.apply(state),
            None => adiabatic_ideal(state),
        }
    }

    /// Time-reversed transfer.
    pub fn inverse_transfer(&self, state: &JointState) -> (JointState, f64) {
        match &self.sweep {
            Some(p) => p.apply_inverse(state),
            None => adiabatic_ideal(state),
        }
    }

    /// Non-selective measurement split by reported label. The bright
    /// physical component receives the recoil kernel when `recoil` is set.
    pub(crate) fn split(&self, state: &JointState, recoil: bool) -> Result<Vec<Branch>> {
        let mut physical = Vec::with_capacity(2);
        for q in Qubit::BOTH {
            let (prob, proj) = state.project(q);
            let Some(mut s) = proj else { continue };
            let mut lost = 0.0;
            if q == Qubit::Up && recoil && self.recoil_active() {
                let (k, l) = kernel_channel(&s, &self.recoil);
                s = k;
                lost = l;
            }
            physical.push((q, prob, s, lost));
        }
        let mut branches = Vec::with_capacity(2);
        for r in Qubit::BOTH {
            let parts: Vec<(f64, &JointState)> = physical
                .iter()
                .map(|(q, prob, s, _)| (prob * self.cfg.detector.report_probability(r, *q), s))
                .collect();
            let weight: f64 = parts.iter().map(|(w, _)| w).sum();
            if weight <= 0.0 {
                continue;
            }
            let leakage = physical
                .iter()
                .map(|(q, prob, _, l)| prob * self.cfg.detector.report_probability(r, *q) * l)
                .sum::<f64>()
                / weight;
            branches.push(Branch {
                reported: r,
                weight,
                state: JointState::mixture(&parts)?,
                leakage,
            });
        }
        Ok(branches)
    }

    /// One cycle as a deterministic channel. Returns the next state, the
    /// mean work and the probability lost at the workspace edge.
    pub fn cycle_channel(&self, state: &JointState) -> Result<(JointState, f64, f64)> {
        let thermal = bath_channel(state, self.cfg.p_up)?;
        let mut parts = Vec::with_capacity(2);
        let mut work = 0.0;
        let mut leakage = 0.0;
        for b in self.split(&thermal, true)? {
            leakage += b.weight * b.leakage;
            let s = if b.reported == Qubit::Up {
                let (s, lost) = self.transfer(&b.state);
                leakage += b.weight * lost;
                work += b.weight * s.sector_population(Qubit::Down);
                s
            } else {
                b.state
            };
            parts.push((b.weight, s));
        }
        let refs: Vec<(f64, &JointState)> = parts.iter().map(|(w, s)| (*w, s)).collect();
        let mixed = JointState::mixture(&refs)?;
        let (next, lost) = kernel_channel(&mixed, &self.heating);
        Ok((next, work, leakage + lost))
    }

    /// One selective cycle: bath, sampled detection with a sampled recoil
    /// kick, feedback on a bright report, a projective check of the qubit,
    /// then heating.
    pub fn run_cycle<R: Rng + ?Sized>(
        &self,
        state: &JointState,
        cycle_index: usize,
        rng: &mut R,
    ) -> Result<(JointState, CycleRecord)> {
        let thermal = bath_channel(state, self.cfg.p_up)?;
        let m = measure_qubit(&thermal, &self.cfg.detector, &self.cfg.geometry, rng)?;
        let mut leakage = m.leakage;
        let feedback_applied = m.reported == Qubit::Up;
        let fed = if feedback_applied {
            let (s, lost) = self.transfer(&m.state);
            leakage += lost;
            s
        } else {
            m.state
        };
        let p_up = fed.sector_population(Qubit::Up).clamp(0.0, 1.0);
        let post_feedback = if rng.random::<f64>() < p_up { Qubit::Up } else { Qubit::Down };
        let (_, checked) = fed.project(post_feedback);
        let checked = checked.expect("sampled sector has weight");
        let (next, lost) = kernel_channel(&checked, &self.heating);
        leakage += lost;
        let (post_distribution, _) = next.phonon_marginal().truncated(self.cfg.space.n_max);
        let work_quanta = u8::from(feedback_applied && post_feedback == Qubit::Down);
        Ok((
            next,
            CycleRecord {
                cycle_index,
                reported_outcome: m.reported,
                physical_outcome: m.physical,
                feedback_applied,
                post_feedback,
                work_quanta,
                post_distribution,
                leakage,
            },
        ))
    }

    /// Samples an output level of a kernel column.
    fn sample<R: Rng + ?Sized>(kernel: &StochasticKernel, n: usize, rng: &mut R) -> (usize, f64) {
        (kernel.sample_column(n, rng.random::<f64>()), kernel.leakage()[n])
    }

    /// Fluorescence detection on a basis configuration. Returns the reported
    /// label and the leakage of the recoil step.
    pub(crate) fn detect_basis<R: Rng + ?Sized>(&self, q: Qubit, n: &mut usize, recoil: bool, rng: &mut R) -> (Qubit, f64) {
        let mut leak = 0.0;
        if q == Qubit::Up && recoil && self.recoil_active() {
            let (m, l) = Self::sample(&self.recoil, *n, rng);
            *n = m;
            leak = l;
        }
        (self.cfg.detector.report(q, rng), leak)
    }

    /// Transfer pulse on a basis configuration; the inverse pulse has the
    /// same transition probabilities.
    pub(crate) fn transfer_basis<R: Rng + ?Sized>(&self, q: &mut Qubit, n: &mut usize, rng: &mut R) -> f64 {
        match *q {
            Qubit::Up if *n >= self.cfg.space.n_work => return 1.0,
            Qubit::Up => {
                let p = self.transfer_probability(*n);
                if p >= 1.0 || rng.random::<f64>() < p {
                    *q = Qubit::Down;
                    *n += 1;
                }
            }
            Qubit::Down if *n >= 1 => {
                let p = self.transfer_probability(*n - 1);
                if p >= 1.0 || rng.random::<f64>() < p {
                    *q = Qubit::Up;
                    *n -= 1;
                }
            }
            Qubit::Down => {}
        }
        0.0
    }

    /// One cycle of a basis-state history. Returns `(work, leakage)`.
    fn history_cycle<R: Rng + ?Sized>(&self, n: &mut usize, rng: &mut R) -> (bool, f64) {
        let mut q = if rng.random::<f64>() < self.cfg.p_up { Qubit::Up } else { Qubit::Down };
        let (reported, mut leak) = self.detect_basis(q, n, true, rng);
        if reported == Qubit::Up {
            leak += self.transfer_basis(&mut q, n, rng);
        }
        let work = reported == Qubit::Up && q == Qubit::Down;
        let (m, l) = Self::sample(&self.heating, *n, rng);
        *n = m;
        (work, leak + l)
    }

    fn run_exact(&self) -> Result<Vec<CycleStats>> {
        let space = self.cfg.space;
        let mut state = self.cfg.initial_state();
        let mut out = Vec::with_capacity(self.cfg.cycles);
        for cycle in 1..=self.cfg.cycles {
            let (next, work, leakage) = self.cycle_channel(&state)?;
            state = next;
            let marginal = state.phonon_marginal();
            let (readout_full, _) = self.readout.apply(marginal.probs());
            let readout_full = PhononDistribution::from_weights(readout_full)?;
            let (dist, tail) = marginal.truncated(space.n_max);
            let (readout, _) = readout_full.truncated(space.n_max);
            out.push(CycleStats {
                cycle,
                distribution: dist.probs().to_vec(),
                readout: readout.probs().to_vec(),
                mean_phonon: marginal.mean(),
                mean_phonon_stderr: 0.0,
                readout_mean_phonon: readout_full.mean(),
                mean_work: work,
                work_stderr: 0.0,
                tail,
                leakage,
            });
        }
        Ok(out)
    }

    fn run_trajectories(&self) -> Result<Vec<CycleStats>> {
        let cycles = self.cfg.cycles;
        let dim = self.cfg.space.dim();
        let initial = self.cfg.initial_distribution();
        let traj_tag = seed::tag("trajectory");
        let readout_tag = seed::tag("readout");
        let partials = chunked(self.cfg.shots, |range| {
            let mut acc = HistoryAccum::new(cycles, dim);
            for shot in range {
                let mut rng = seed::stream(self.cfg.seed, &[traj_tag, shot as u64]);
                let mut readout_rng = seed::stream(self.cfg.seed, &[readout_tag, shot as u64]);
                let mut n = initial_level(&initial, &mut rng);
                for c in 0..cycles {
                    let (work, leak) = self.history_cycle(&mut n, &mut rng);
                    let read = self.pnrd_basis(n, &mut readout_rng).value;
                    acc.record(c, n, read, work, leak);
                }
            }
            acc
        });
        let total = partials.into_iter().reduce(HistoryAccum::merge).expect("at least one chunk");
        Ok(total.stats(self.cfg.shots, self.cfg.space.n_max))
    }
}

fn initial_level<R: Rng + ?Sized>(dist: &PhononDistribution, rng: &mut R) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for (n, p) in dist.probs().iter().enumerate() {
        acc += p;
        if u < acc {
            return n;
        }
    }
    0
}

/// Runs `f` over fixed-size shot ranges in parallel, returning results in range order.
pub(crate) fn chunked<A, F>(shots: usize, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(Range<usize>) -> A + Sync,
{
    let chunks = shots.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(shots)))
        .collect()
}

struct HistoryAccum {
    levels: Vec<Vec<u64>>,
    readout: Vec<Vec<u64>>,
    work: Vec<u64>,
    leakage: Vec<f64>,
}

impl HistoryAccum {
    fn new(cycles: usize, dim: usize) -> Self {
        HistoryAccum {
            levels: vec![vec![0; dim]; cycles],
            readout: vec![vec![0; dim]; cycles],
            work: vec![0; cycles],
            leakage: vec![0.0; cycles],
        }
    }

    fn record(&mut self, cycle: usize, n: usize, read: usize, work: bool, leak: f64) {
        self.levels[cycle][n] += 1;
        self.readout[cycle][read] += 1;
        self.work[cycle] += u64::from(work);
        self.leakage[cycle] += leak;
    }

    fn merge(mut self, other: Self) -> Self {
        for c in 0..self.work.len() {
            for (a, b) in self.levels[c].iter_mut().zip(&other.levels[c]) {
                *a += b;
            }
            for (a, b) in self.readout[c].iter_mut().zip(&other.readout[c]) {
                *a += b;
            }
            self.work[c] += other.work[c];
            self.leakage[c] += other.leakage[c];
        }
        self
    }

    fn stats(&self, shots: usize, n_max: usize) -> Vec<CycleStats> {
        let n = shots as f64;
        (0..self.work.len())
            .map(|c| {
                let hist = PhononDistribution::from_weights(self.levels[c].iter().map(|&k| k as f64).collect())
                    .expect("non-empty histogram");
                let read = PhononDistribution::from_weights(self.readout[c].iter().map(|&k| k as f64).collect())
                    .expect("non-empty histogram");
                let mean = hist.mean();
                let second: f64 = hist.probs().iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
                let (dist, tail) = hist.truncated(n_max);
                let (readout, _) = read.truncated(n_max);
                let w = self.work[c] as f64 / n;
                CycleStats {
                    cycle: c + 1,
                    distribution: dist.probs().to_vec(),
                    readout: readout.probs().to_vec(),
                    mean_phonon: mean,
                    mean_phonon_stderr: ((second - mean * mean).max(0.0) / n).sqrt(),
                    readout_mean_phonon: read.mean(),
                    mean_work: w,
                    work_stderr: (w * (1.0 - w) / n).sqrt(),
                    tail,
                    leakage: self.leakage[c] / n,
                }
            })
            .collect()
    }
}

fn run_ideal(cfg: &EngineConfig) -> Result<Vec<CycleStats>> {
    let dim = cfg.space.dim();
    (1..=cfg.cycles)
        .map(|cycle| {
            let full = binomial_distribution(cycle, cfg.p_up, dim)?;
            let (dist, tail) = full.truncated(cfg.space.n_max);
            Ok(CycleStats {
                cycle,
                distribution: dist.probs().to_vec(),
                readout: dist.probs().to_vec(),
                mean_phonon: full.mean(),
                mean_phonon_stderr: 0.0,
                readout_mean_phonon: full.mean(),
                mean_work: cfg.p_up,
                work_stderr: 0.0,
                tail,
                leakage: 0.0,
            })
        })
        .collect()
}

/// Runs all cycles with the configured backend. The ideal chain needs no
/// kernels and skips building an [`Engine`].
pub fn run_engine(cfg: &EngineConfig) -> Result<EngineRun> {
    cfg.validate()?;
    if cfg.backend == Backend::IdealMarkov {
        return Ok(EngineRun {
            config: cfg.clone(),
            seed: cfg.seed,
            initial: PhononDistribution::fock(0, cfg.space.dim()).probs().to_vec(),
            per_cycle: run_ideal(cfg)?,
        });
    }
    Engine::new(cfg)?.run()
}

/// One selective cycle with a freshly built [`Engine`]. Building the engine
/// samples the recoil kernel; loops should construct it once instead.
pub fn run_cycle<R: Rng + ?Sized>(
    state: &JointState,
    cfg: &EngineConfig,
    cycle_index: usize,
    rng: &mut R,
) -> Result<(JointState, CycleRecord)> {
    Engine::new(cfg)?.run_cycle(state, cycle_index, rng)
}
