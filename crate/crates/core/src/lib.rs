//! Single-ion quantum Szilard engine charging a phonon battery.
//!
//! The crate models a trapped-ion qubit coupled to one motional mode. A
//! thermalizing bath prepares the qubit, a fluorescence measurement reads it
//! (kicking the oscillator through photon recoil whenever the ion is bright),
//! and an adiabatic sideband transfer moves one quantum into the battery when
//! the demon sees the excited state. Around that cycle sit the error models
//! (detector confusion, recoil, phonon-number-resolving readout, heating),
//! three execution backends, the forward/backward work protocol used to check
//! the feedback-corrected Jarzynski equality, and the thermodynamic metrics
//! (temperature, mutual information, ergotropy, efficiencies, power).
//!
//! All energies are in units of the trap quantum `ħωₓ`.
//!
//! ```
//! use szilard_battery::engine::{run_engine, Backend, EngineConfig};
//!
//! let mut cfg = EngineConfig::ideal(0.5, 10);
//! cfg.backend = Backend::IdealMarkov;
//! let run = run_engine(&cfg).unwrap();
//! assert!((run.per_cycle[9].mean_phonon - 5.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod cli;
pub mod engine;
mod error;
pub mod fock;
pub mod metrics;
pub mod seed;

pub use error::{Error, Result};
