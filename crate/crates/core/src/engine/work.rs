use rand::Rng;

use super::{chunked, Backend, Engine, EngineConfig};
use crate::channels::bath_channel;
use crate::error::{domain, Result};
use crate::fock::{JointState, PhononDistribution, Qubit};
use crate::metrics::bath_temperature;
use crate::seed;

/// Single-cycle forward statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardResult {
    pub mean_work: f64,
    pub work_stderr: f64,
    /// Sample mean of `e^{(ΔF-W)/k_BT}` with `ΔF = 0`.
    pub jarzynski_lhs: f64,
    pub lhs_stderr: f64,
    /// Probabilities of the reported pair `(x, y)`, indexed `[x][y]` by [`Qubit::index`].
    pub outcome_probs: [[f64; 2]; 2],
    /// Raw counts for sampled backends.
    pub outcome_counts: Option<[[u64; 2]; 2]>,
}

/// Time-reversed path probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardResult {
    pub gamma: f64,
    pub gamma_stderr: f64,
    /// `P(y=↓, x=↑)` with the reversed transfer applied.
    pub p_on: f64,
    /// `P(y=↓, x=↓)` without it.
    pub p_off: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JarzynskiResult {
    pub p_up: f64,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub gamma: f64,
    pub gamma_stderr: f64,
    pub agree: bool,
}

fn check(cfg: &EngineConfig, shots: usize) -> Result<f64> {
    if !(cfg.p_up > 0.0 && cfg.p_up <= 0.5) {
        return Err(domain(format!("work protocol needs p_up in (0, 0.5], got {}", cfg.p_up)));
    }
    if shots < 1000 {
        return Err(domain(format!("work protocol needs >= 1000 shots, got {shots}")));
    }
    // e^{ħωₓ/k_BT} = (1-p)/p, finite at p = 0.5 even though k_BT is not
    bath_temperature(cfg.p_up)?;
    Ok((1.0 - cfg.p_up) / cfg.p_up)
}

fn forward_from_probs(probs: [[f64; 2]; 2], boltzmann: f64, shots: Option<usize>, counts: Option<[[u64; 2]; 2]>) -> ForwardResult {
    let w = probs[Qubit::Up.index()][Qubit::Down.index()];
    let se = shots.map_or(0.0, |n| (w * (1.0 - w) / n as f64).sqrt());
    ForwardResult {
        mean_work: w,
        work_stderr: se,
        jarzynski_lhs: w * boltzmann + (1.0 - w),
        lhs_stderr: (boltzmann - 1.0).abs() * se,
        outcome_probs: probs,
        outcome_counts: counts,
    }
}

/// Probability that the detector reports `r` for the state's qubit.
fn report_probability(engine: &Engine, state: &JointState, r: Qubit) -> f64 {
    Qubit::BOTH
        .into_iter()
        .map(|q| state.sector_population(q) * engine.config().detector.report_probability(r, q))
        .sum()
}

fn sample_level<R: Rng + ?Sized>(dist: &PhononDistribution, rng: &mut R) -> usize {
    super::initial_level(dist, rng)
}

/// Forward protocol: bath, measurement `x`, feedback on a bright report,
/// verification measurement `y`. Work is one quantum iff `x=↑, y=↓`.
pub fn work_protocol_forward<R: Rng + ?Sized>(engine: &Engine, shots: usize, rng: &mut R) -> Result<ForwardResult> {
    let cfg = engine.config();
    let boltzmann = check(cfg, shots)?;
    match cfg.backend {
        Backend::IdealMarkov => {
            let p = cfg.p_up;
            Ok(forward_from_probs([[1.0 - p, 0.0], [p, 0.0]], boltzmann, None, None))
        }
        Backend::ExactChannel => {
            let thermal = bath_channel(&cfg.initial_state(), cfg.p_up)?;
            let mut probs = [[0.0; 2]; 2];
            for b in engine.split(&thermal, true)? {
                let s = if b.reported == Qubit::Up { engine.transfer(&b.state).0 } else { b.state };
                for y in Qubit::BOTH {
                    probs[b.reported.index()][y.index()] = b.weight * report_probability(engine, &s, y);
                }
            }
            Ok(forward_from_probs(probs, boltzmann, None, None))
        }
        Backend::Trajectory => {
            let base: u64 = rng.random();
            let tag = seed::tag("forward");
            let initial = PhononDistribution::thermal(cfg.initial_nbar, cfg.space.dim());
            let parts = chunked(shots, |range| {
                let mut counts = [[0u64; 2]; 2];
                for shot in range {
                    let mut r = seed::stream(base, &[tag, shot as u64]);
                    let mut n = sample_level(&initial, &mut r);
                    let mut q = if r.random::<f64>() < cfg.p_up { Qubit::Up } else { Qubit::Down };
                    let (x, _) = engine.detect_basis(q, &mut n, true, &mut r);
                    if x == Qubit::Up {
                        engine.transfer_basis(&mut q, &mut n, &mut r);
                    }
                    let (y, _) = engine.detect_basis(q, &mut n, true, &mut r);
                    counts[x.index()][y.index()] += 1;
                }
                counts
            });
            let counts = sum_counts(parts);
            let probs = counts.map(|row| row.map(|c| c as f64 / shots as f64));
            Ok(forward_from_probs(probs, boltzmann, Some(shots), Some(counts)))
        }
    }
}

fn sum_counts(parts: Vec<[[u64; 2]; 2]>) -> [[u64; 2]; 2] {
    parts.into_iter().fold([[0; 2]; 2], |mut acc, c| {
        for i in 0..2 {
            for j in 0..2 {
                acc[i][j] += c[i][j];
            }
        }
        acc
    })
}

/// Backward protocol. The oscillator starts one quantum above the initial
/// state (the battery after a successful forward cycle). The bath prepares
/// the qubit, `y` is measured, the reversed transfer is applied or not, and
/// `x` is measured. `γ = P_on(y=↓, x=↑) + P_off(y=↓, x=↓)`.
pub fn work_protocol_backward<R: Rng + ?Sized>(engine: &Engine, shots: usize, rng: &mut R) -> Result<BackwardResult> {
    let cfg = engine.config();
    check(cfg, shots)?;
    let charged = PhononDistribution::thermal(cfg.initial_nbar, cfg.space.dim()).shifted_up(1);
    match cfg.backend {
        Backend::IdealMarkov => {
            let p = 1.0 - cfg.p_up;
            Ok(BackwardResult {
                gamma: 2.0 * p,
                gamma_stderr: 0.0,
                p_on: p,
                p_off: p,
            })
        }
        Backend::ExactChannel => {
            let start = JointState::product(cfg.space, 0.0, &charged)?;
            let thermal = bath_channel(&start, cfg.p_up)?;
            let (mut p_on, mut p_off) = (0.0, 0.0);
            for b in engine.split(&thermal, true)? {
                if b.reported != Qubit::Down {
                    continue;
                }
                let (reversed, _) = engine.inverse_transfer(&b.state);
                p_on += b.weight * report_probability(engine, &reversed, Qubit::Up);
                p_off += b.weight * report_probability(engine, &b.state, Qubit::Down);
            }
            Ok(BackwardResult {
                gamma: p_on + p_off,
                gamma_stderr: 0.0,
                p_on,
                p_off,
            })
        }
        Backend::Trajectory => {
            let base: u64 = rng.random();
            let tags = [seed::tag("backward-on"), seed::tag("backward-off")];
            let parts = chunked(shots, |range| {
                let mut hits = [0u64; 2];
                for shot in range {
                    for (k, tag) in tags.iter().enumerate() {
                        let mut r = seed::stream(base, &[*tag, shot as u64]);
                        let mut n = sample_level(&charged, &mut r);
                        let mut q = if r.random::<f64>() < cfg.p_up { Qubit::Up } else { Qubit::Down };
                        let (y, _) = engine.detect_basis(q, &mut n, true, &mut r);
                        if y != Qubit::Down {
                            continue;
                        }
                        let with_transfer = k == 0;
                        if with_transfer {
                            engine.transfer_basis(&mut q, &mut n, &mut r);
                        }
                        let (x, _) = engine.detect_basis(q, &mut n, true, &mut r);
                        let want = if with_transfer { Qubit::Up } else { Qubit::Down };
                        hits[k] += u64::from(x == want);
                    }
                }
                hits
            });
            let hits = parts.into_iter().fold([0u64; 2], |a, h| [a[0] + h[0], a[1] + h[1]]);
            let n = shots as f64;
            let p_on = hits[0] as f64 / n;
            let p_off = hits[1] as f64 / n;
            Ok(BackwardResult {
                gamma: p_on + p_off,
                gamma_stderr: (p_on * (1.0 - p_on) / n + p_off * (1.0 - p_off) / n).sqrt(),
                p_on,
                p_off,
            })
        }
    }
}

/// Compares `⟨e^{(ΔF-W)/k_BT}⟩` with `γ`. Sampled backends agree within
/// three combined standard errors; analytic ones within 1e-10.
pub fn jarzynski_check<R: Rng + ?Sized>(engine: &Engine, shots: usize, rng: &mut R) -> Result<JarzynskiResult> {
    let fwd = work_protocol_forward(engine, shots, rng)?;
    let bwd = work_protocol_backward(engine, shots, rng)?;
    let combined = (fwd.lhs_stderr.powi(2) + bwd.gamma_stderr.powi(2)).sqrt();
    let diff = (fwd.jarzynski_lhs - bwd.gamma).abs();
    Ok(JarzynskiResult {
        p_up: engine.config().p_up,
        lhs: fwd.jarzynski_lhs,
        lhs_stderr: fwd.lhs_stderr,
        gamma: bwd.gamma,
        gamma_stderr: bwd.gamma_stderr,
        agree: diff <= (3.0 * combined).max(1e-10),
    })
}
