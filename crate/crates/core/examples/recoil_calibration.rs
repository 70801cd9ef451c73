//! Fits the beam projection `f_x` so that 235 photon pairs heat the ground
//! state by half a phonon, then checks the fit with fresh draws.

use szilard_battery::channels::{calibrate_recoil, mean_recoil_energy, RecoilGeometry};
use szilard_battery::seed;

fn main() -> szilard_battery::Result<()> {
    let pairs = 235;
    let mut rng = seed::stream(7, &[seed::tag("fit")]);
    let geom = calibrate_recoil(0.5, pairs, &RecoilGeometry::default(), 20_000, &mut rng)?;
    println!("eta = {}, fitted f_x = {:.5}", geom.eta, geom.f_x);

    let mut rng = seed::stream(7, &[seed::tag("check")]);
    let (mean, se) = mean_recoil_energy(pairs, &geom, 100_000, &mut rng);
    println!("ground-state mean phonon after detection: {mean:.4} ± {se:.4}");

    for pairs in [50, 100, 235, 400] {
        let (m, _) = mean_recoil_energy(pairs, &geom, 20_000, &mut rng);
        println!("{pairs:>4} pairs -> {m:.4}");
    }
    Ok(())
}
