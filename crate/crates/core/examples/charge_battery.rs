//! Charges the phonon battery for ten cycles with the three backends and
//! prints the mean phonon number after each cycle.
//!
//! ```bash
//! cargo run --release --example charge_battery
//! ```

use szilard_battery::engine::{run_engine, Backend, EngineConfig};
use szilard_battery::metrics::{ergotropy, EnergySpectrum};

fn main() -> szilard_battery::Result<()> {
    let p_up = 0.5;
    let cycles = 10;

    let mut ideal = EngineConfig::ideal(p_up, cycles);
    ideal.backend = Backend::IdealMarkov;
    let mut exact = EngineConfig::with_errors(p_up, cycles);
    exact.backend = Backend::ExactChannel;
    let mut traj = exact.clone();
    traj.backend = Backend::Trajectory;
    traj.shots = 4000;

    let runs = [run_engine(&ideal)?, run_engine(&exact)?, run_engine(&traj)?];
    println!("cycle  ideal   exact   trajectory");
    for k in 0..cycles {
        let m: Vec<f64> = runs.iter().map(|r| r.per_cycle[k].mean_phonon).collect();
        println!("{:>5}  {:.4}  {:.4}  {:.4} ± {:.4}", k + 1, m[0], m[1], m[2], runs[2].per_cycle[k].mean_phonon_stderr);
    }

    let spec = EnergySpectrum::harmonic(exact.space.n_work);
    for run in &runs {
        let last = run.per_cycle.last().expect("ten cycles");
        println!(
            "{:<14} state ergotropy {:.3}, readout ergotropy {:.3}",
            run.config.backend.name(),
            ergotropy(&last.distribution(), &spec)?,
            ergotropy(&last.readout(), &spec)?,
        );
    }
    Ok(())
}
