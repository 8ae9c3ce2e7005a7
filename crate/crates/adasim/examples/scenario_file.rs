//! Load a scenario from its TOML description and run it with the full
//! intervention stack.
//!
//!     cargo run --example scenario_file -- configs/scenarios/s6.toml

use adasim::runner::{run_single_scenario, RunParams, RunSpec};
use adasim::safety::AebMode;
use adasim::scenario::ScenarioSpec;
use std::path::Path;

fn main() -> Result<(), adasim::SimError> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "configs/scenarios/s6.toml".to_string());
    let scenario = ScenarioSpec::load(Path::new(&path))?;
    println!(
        "loaded {}: gap {:.0} m, lead {:.1} m/s, {} lead phases, side maneuver: {}",
        scenario.id,
        scenario.init_gap,
        scenario.lead_init_speed,
        scenario.lead_profile.len(),
        scenario.side.is_some()
    );

    let mut spec = RunSpec::new(scenario.id, scenario.init_gap);
    spec.interventions.safety_check = true;
    spec.interventions.aeb = AebMode::Independent;
    spec.seed = 11;

    let result = run_single_scenario(&scenario, &spec, &RunParams::default(), None)?;
    println!(
        "outcome {} after {:.2} s; min TTC {:.3} s; AEB fired: {}",
        result.outcome, result.end_t, result.min_ttc, result.aeb.fired
    );
    Ok(())
}
