//! Execute one fault-free closed-loop run and print its metrics.
//!
//!     cargo run --example single_run

use adasim::runner::{run_single, RunParams, RunSpec};
use adasim::scenario::ScenarioId;

fn main() -> Result<(), adasim::SimError> {
    let mut spec = RunSpec::new(ScenarioId::S1, 60.0);
    spec.interventions.safety_check = true;
    spec.seed = 7;

    let result = run_single(&spec, &RunParams::default(), None)?;

    println!(
        "scenario {} gap {:.0} m seed {}",
        result.scenario, result.init_gap, result.seed
    );
    println!(
        "outcome: {} after {} steps ({:.2} s)",
        result.outcome, result.steps, result.end_t
    );
    println!("min TTC:            {:.3} s", result.min_ttc);
    println!("hardest brake:      {:.0}%", 100.0 * result.hardest_brake);
    println!("avg following gap:  {:.1} m", result.following_distance);
    println!("min lane distance:  {:.3} m", result.min_lane_distance);
    println!("hazards observed:   {}", result.hazards.len());
    for h in result.hazards.iter().take(3) {
        println!("  {} at {:.2} s: {}", h.kind, h.t, h.detail);
    }
    Ok(())
}
