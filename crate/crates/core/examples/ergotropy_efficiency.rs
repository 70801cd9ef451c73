//! Ergotropy and efficiencies across bath temperatures, ideal and with the
//! default error model.

use szilard_battery::engine::{run_engine, EngineConfig};
use szilard_battery::metrics::{
    binomial_distribution, efficiencies, efficiencies_ideal, engine_power, ergotropy, ergotropy_asymptotic,
    EnergySpectrum,
};

fn main() -> szilard_battery::Result<()> {
    let spec = EnergySpectrum::harmonic(10);
    let e = ergotropy(&binomial_distribution(10, 0.5, 11)?, &spec)?;
    println!("ideal ergotropy after 10 cycles at p=0.5: {e:.4}");
    println!("large-N estimate at N=400: {:.2}", ergotropy_asymptotic(400, 0.5)?);
    println!("power at p=0.5, 455 µs per cycle: {:.5} quanta/µs", engine_power(0.5, 455.0)?);

    println!("\np     info-work  charging(ideal)  charging(errors)");
    for p in [0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let ideal = efficiencies_ideal(10, p)?;
        let noisy = efficiencies(&run_engine(&EngineConfig::with_errors(p, 10))?)?;
        println!(
            "{p:.2}  {:.4}     {:.4}           {:.4}",
            ideal.info_work_eff, ideal.charging_eff, noisy.charging_eff
        );
    }
    Ok(())
}
