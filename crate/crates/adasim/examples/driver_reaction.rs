//! Sweep the simulated driver's reaction time against the steering fault and
//! print how the prevention rate falls off as the driver gets slower.
//!
//!     cargo run --release --example driver_reaction

use adasim::hazard::Outcome;
use adasim::perception::{FaultKind, FaultSpec};
use adasim::runner::{run_single, RunParams, RunSpec};
use adasim::scenario::ScenarioId;

fn main() -> Result<(), adasim::SimError> {
    let params = RunParams::default();
    let seeds: Vec<u64> = (0..5).collect();

    println!(
        "driver-only vs. steering fault, S1/S3/S5 x {} seeds",
        seeds.len()
    );
    println!("{:>8} {:>12} {:>10}", "t_react", "prevented", "accidents");
    for t_react in [1.0, 1.5, 2.0, 2.5, 3.0, 3.5] {
        let mut prevented = 0;
        let mut total = 0;
        for scenario in [ScenarioId::S1, ScenarioId::S3, ScenarioId::S5] {
            for &seed in &seeds {
                let mut spec = RunSpec::new(scenario, 60.0);
                spec.fault = Some(FaultSpec::new(FaultKind::DesiredCurvature));
                spec.interventions.driver = true;
                spec.interventions.driver_t_react = t_react;
                spec.seed = seed;
                let r = run_single(&spec, &params, None)?;
                total += 1;
                if r.outcome == Outcome::NoAccident {
                    prevented += 1;
                }
            }
        }
        println!(
            "{:>7.1}s {:>11.1}% {:>10}",
            t_react,
            100.0 * prevented as f64 / total as f64,
            total - prevented
        );
    }
    Ok(())
}
