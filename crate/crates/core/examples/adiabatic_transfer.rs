//! Blue-sideband rapid adiabatic passage `|↑,n⟩ → |↓,n+1⟩`.
//!
//! Prints the transfer probability and the time the target population first
//! reaches 0.99 for each Fock level of the battery range.

use szilard_battery::channels::{SweepParams, SweepPropagator};
use szilard_battery::fock::{FockSpace, JointState, Qubit};

fn main() -> szilard_battery::Result<()> {
    let params = SweepParams::default();
    let space = FockSpace::for_cycles(10, 10);
    let sweep = SweepPropagator::new(params, space)?;

    println!("n   P(↓,n+1)   t(0.99) [µs]");
    for n in 0..=10 {
        let t = params.crossing_time(n, 0.99);
        println!(
            "{n:>2}  {:.6}   {}",
            sweep.success_probability(n),
            t.map_or("never".to_string(), |t| format!("{t:.1}"))
        );
    }

    let (out, leak) = sweep.apply(&JointState::basis(space, Qubit::Up, 3));
    println!(
        "|↑,3⟩ after the pulse: P(↓,4) = {:.6}, P(↑,3) = {:.2e}, leakage {leak:.1e}",
        out.population(Qubit::Down, 4),
        out.population(Qubit::Up, 3)
    );
    Ok(())
}
