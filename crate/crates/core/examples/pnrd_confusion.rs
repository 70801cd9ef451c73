//! Phonon-number-resolving readout: Monte Carlo confusion matrix `M1`,
//! its exact counterpart, and the readout of a bright ion `M1·M2`.

use szilard_battery::engine::{estimate_m1, verify_m2, Engine, EngineConfig};
use szilard_battery::seed;

fn main() -> szilard_battery::Result<()> {
    let engine = Engine::new(&EngineConfig::with_errors(0.5, 10))?;
    let mut rng = seed::stream(11, &[seed::tag("m1")]);
    let m1 = estimate_m1(&engine, 2000, &mut rng)?;
    let exact = engine.readout_kernel();

    println!("n   P(read n | n)  exact");
    for n in 0..=engine.config().space.n_max {
        println!("{n:>2}  {:.4}         {:.4}", m1.get(n, n), exact.get(n, n));
    }

    let mut rng = seed::stream(11, &[seed::tag("m2")]);
    let check = verify_m2(&engine, 2000, &mut rng)?;
    println!("bright-ion readout vs M1·M2: max total variation {:.4}", check.max_total_variation());
    Ok(())
}
