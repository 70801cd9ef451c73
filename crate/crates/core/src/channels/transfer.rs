use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fock::{FockSpace, JointState, Qubit};

/// Rapid-adiabatic-passage pulse. Frequencies are cyclic (kHz), times in µs.
///
/// The Rabi envelope is `Ω₀ sin(πt/τ)` and the detuning `δ₀ cos(πt/τ)` for
/// `t ≤ τ`; past `τ` the coupling is off and the detuning stays at `-δ₀`,
/// so integration to `pulse_duration_us` only adds phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub omega0_khz: f64,
    pub delta0_khz: f64,
    pub tau_us: f64,
    pub pulse_duration_us: f64,
    pub steps: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            omega0_khz: 21.0,
            delta0_khz: 63.0,
            tau_us: 244.0,
            pulse_duration_us: 343.0,
            steps: 4096,
        }
    }
}

/// Convergence threshold for the step-halving check.
const HALVING_TOL: f64 = 1e-6;

type Su2 = [Complex64; 4];

const IDENTITY: Su2 = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
];

fn mul(a: &Su2, b: &Su2) -> Su2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn adjoint(a: &Su2) -> Su2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

/// `exp(-i v·σ)` for a real 3-vector `v`.
fn exp_pauli(v: [f64; 3]) -> Su2 {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm == 0.0 {
        return IDENTITY;
    }
    let (s, c) = norm.sin_cos();
    let k = s / norm;
    let i = Complex64::new(0.0, 1.0);
    [
        Complex64::new(c, -k * v[2]),
        -i * k * Complex64::new(v[0], -v[1]),
        -i * k * Complex64::new(v[0], v[1]),
        Complex64::new(c, k * v[2]),
    ]
}

impl SweepParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega0_khz", self.omega0_khz),
            ("delta0_khz", self.delta0_khz),
            ("tau_us", self.tau_us),
            ("pulse_duration_us", self.pulse_duration_us),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.steps < 256 {
            return Err(domain(format!("sweep needs >= 256 steps, got {}", self.steps)));
        }
        Ok(())
    }

    fn omega0(&self) -> f64 {
        2.0 * PI * self.omega0_khz * 1e-3
    }

    fn delta0(&self) -> f64 {
        2.0 * PI * self.delta0_khz * 1e-3
    }

    /// Pauli vector of the block Hamiltonian `H = (δ/2)σz + (Ω√(n+1)/2)σx` in rad/µs.
    fn field(&self, n: usize, t: f64) -> [f64; 3] {
        let (omega, delta) = if t <= self.tau_us {
            let phase = PI * t / self.tau_us;
            (self.omega0() * phase.sin(), self.delta0() * phase.cos())
        } else {
            (0.0, -self.delta0())
        };
        [0.5 * omega * ((n + 1) as f64).sqrt(), 0.0, 0.5 * delta]
    }

    fn active_time(&self) -> f64 {
        self.tau_us.min(self.pulse_duration_us)
    }

    /// Fourth-order Magnus step over `[t, t+h]` using the two Gauss points.
    fn step(&self, n: usize, t: f64, h: f64) -> Su2 {
        let r = 3f64.sqrt() / 6.0;
        let a1 = self.field(n, t + h * (0.5 - r));
        let a2 = self.field(n, t + h * (0.5 + r));
        let cross = [
            a2[1] * a1[2] - a2[2] * a1[1],
            a2[2] * a1[0] - a2[0] * a1[2],
            a2[0] * a1[1] - a2[1] * a1[0],
        ];
        let k = 3f64.sqrt() * h * h / 6.0;
        exp_pauli([
            0.5 * h * (a1[0] + a2[0]) + k * cross[0],
            0.5 * h * (a1[1] + a2[1]) + k * cross[1],
            0.5 * h * (a1[2] + a2[2]) + k * cross[2],
        ])
    }

    fn active_steps(&self, steps: usize) -> usize {
        ((steps as f64 * self.active_time() / self.pulse_duration_us).ceil() as usize).max(1)
    }

    /// Block propagator over the whole pulse, optionally recording
    /// `(t, P(|↓,n+1⟩))` after every step for an `|↑,n⟩` input.
    fn block(&self, n: usize, steps: usize, mut trace: Option<&mut Vec<(f64, f64)>>) -> Su2 {
        let active = self.active_steps(steps);
        let h = self.active_time() / active as f64;
        let mut u = IDENTITY;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((0.0, 0.0));
        }
        for k in 0..active {
            u = mul(&self.step(n, k as f64 * h, h), &u);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(((k + 1) as f64 * h, u[2].norm_sqr()));
            }
        }
        let rest = self.pulse_duration_us - self.active_time();
        if rest > 0.0 {
            u = mul(&exp_pauli([0.0, 0.0, -0.5 * self.delta0() * rest]), &u);
            if let Some(tr) = trace {
                let extra = steps.saturating_sub(active).max(1);
                let dt = rest / extra as f64;
                let p = u[2].norm_sqr();
                tr.extend((1..=extra).map(|k| (self.active_time() + k as f64 * dt, p)));
            }
        }
        u
    }

    /// Time series of the `|↓,n+1⟩` population for an `|↑,n⟩` input.
    pub fn transfer_trace(&self, n: usize) -> Vec<(f64, f64)> {
        let mut tr = Vec::with_capacity(self.steps + 1);
        self.block(n, self.steps, Some(&mut tr));
        tr
    }

    /// First time the `|↓,n+1⟩` population reaches `threshold`, linearly
    /// interpolated between steps.
    pub fn crossing_time(&self, n: usize, threshold: f64) -> Option<f64> {
        let tr = self.transfer_trace(n);
        tr.windows(2).find_map(|w| {
            let ((t0, p0), (t1, p1)) = (w[0], w[1]);
            (p0 < threshold && p1 >= threshold).then(|| t0 + (threshold - p0) / (p1 - p0) * (t1 - t0))
        })
    }
}

/// Precomputed sideband-sweep propagator on a workspace: one 2×2 unitary per
/// pair `{|↑,n⟩, |↓,n+1⟩}`, `n < n_work`.
#[derive(Debug, Clone)]
pub struct SweepPropagator {
    params: SweepParams,
    space: FockSpace,
    blocks: Vec<Su2>,
}

impl SweepPropagator {
    /// Integrates every block, failing with [`Error::StepSizeTooCoarse`] when
    /// halving the step count moves any transfer population by more than 1e−6.
    pub fn new(params: SweepParams, space: FockSpace) -> Result<Self> {
        params.validate()?;
        let mut blocks = Vec::with_capacity(space.n_work);
        let mut change: f64 = 0.0;
        for n in 0..space.n_work {
            let fine = params.block(n, params.steps, None);
            let coarse = params.block(n, params.steps / 2, None);
            change = change.max((fine[2].norm_sqr() - coarse[2].norm_sqr()).abs());
            blocks.push(fine);
        }
        if change > HALVING_TOL {
            return Err(Error::StepSizeTooCoarse { change });
        }
        Ok(SweepPropagator { params, space, blocks })
    }

    pub fn params(&self) -> &SweepParams {
        &self.params
    }

    /// Probability that `|↑,n⟩` ends in `|↓,n+1⟩` (equal to the reverse
    /// probability for a 2×2 unitary).
    pub fn success_probability(&self, n: usize) -> f64 {
        self.blocks.get(n).map_or(0.0, |u| u[2].norm_sqr())
    }

    fn apply_blocks(&self, state: &JointState, inverse: bool) -> (JointState, f64) {
        assert_eq!(state.space(), self.space, "propagator built for another workspace");
        let d = self.space.dim();
        let mut m = state.matrix().clone();
        for (n, u) in self.blocks.iter().enumerate() {
            let u = if inverse { adjoint(u) } else { *u };
            let (i, j) = (d + n, n + 1);
            // rows: ρ ← U ρ
            for col in 0..m.ncols() {
                let (a, b) = (m[(i, col)], m[(j, col)]);
                m[(i, col)] = u[0] * a + u[1] * b;
                m[(j, col)] = u[2] * a + u[3] * b;
            }
            // columns: ρ ← ρ U†
            for row in 0..m.nrows() {
                let (a, b) = (m[(row, i)], m[(row, j)]);
                m[(row, i)] = a * u[0].conj() + b * u[1].conj();
                m[(row, j)] = a * u[2].conj() + b * u[3].conj();
            }
        }
        let leakage = state.population(Qubit::Up, self.space.n_work);
        (JointState::from_matrix_unchecked(m, self.space), leakage)
    }

    /// Forward sweep. Population on `|↑,n_work⟩` has no partner and is
    /// returned as leakage.
    pub fn apply(&self, state: &JointState) -> (JointState, f64) {
        self.apply_blocks(state, false)
    }

    /// Time-reversed sweep `U†`.
    pub fn apply_inverse(&self, state: &JointState) -> (JointState, f64) {
        self.apply_blocks(state, true)
    }
}

/// Ideal sideband transfer: swaps `|↑,n⟩ ↔ |↓,n+1⟩` for all `n < n_work`.
/// `|↓,0⟩` is uncoupled; population on `|↑,n_work⟩` stays and is reported
/// as leakage.
pub fn adiabatic_ideal(state: &JointState) -> (JointState, f64) {
    let space = state.space();
    let d = space.dim();
    let perm: Vec<usize> = (0..space.joint_dim())
        .map(|i| {
            if i >= d && i < 2 * d - 1 {
                i - d + 1
            } else if (1..d).contains(&i) {
                i - 1 + d
            } else {
                i
            }
        })
        .collect();
    let src = state.matrix();
    let m = DMatrix::from_fn(src.nrows(), src.ncols(), |_, _| Complex64::new(0.0, 0.0));
    let mut m = m;
    for i in 0..src.nrows() {
        for j in 0..src.ncols() {
            m[(perm[i], perm[j])] = src[(i, j)];
        }
    }
    let leakage = state.population(Qubit::Up, space.n_work);
    (JointState::from_matrix_unchecked(m, space), leakage)
}

/// Time-dependent sideband sweep on the state's workspace.
pub fn adiabatic_sweep(state: &JointState, sw: &SweepParams) -> Result<(JointState, f64)> {
    Ok(SweepPropagator::new(*sw, state.space())?.apply(state))
}
