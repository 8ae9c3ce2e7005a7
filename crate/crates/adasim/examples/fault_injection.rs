//! Arm each perception fault against an unprotected vehicle and show how the
//! run ends: the distance fault drives a forward collision (A1), the steering
//! fault a lane departure (A2).
//!
//!     cargo run --example fault_injection

use adasim::perception::{FaultKind, FaultSpec};
use adasim::runner::{run_single, RunParams, RunSpec};
use adasim::scenario::ScenarioId;

fn main() -> Result<(), adasim::SimError> {
    let params = RunParams::default();

    // The distance fault reports the lead farther than it is, in bands that
    // tighten as the true gap shrinks.
    let fault = FaultSpec::new(FaultKind::RelativeDistance);
    println!("rd fault schedule (true gap below -> reported offset):");
    for &(threshold, value) in &fault.rd_schedule {
        println!("  < {threshold:>4.0} m  ->  +{value:.0} m");
    }
    println!();

    println!(
        "{:<10} {:<10} {:>9} {:>9} {:>9}",
        "fault", "outcome", "end_t", "min_ttc", "steps"
    );
    for kind in FaultKind::ALL {
        let mut spec = RunSpec::new(ScenarioId::S1, 60.0);
        spec.fault = Some(FaultSpec::new(kind));
        spec.seed = 3;
        let r = run_single(&spec, &params, None)?;
        println!(
            "{:<10} {:<10} {:>8.2}s {:>8.3}s {:>9}",
            kind.to_string(),
            r.outcome.to_string(),
            r.end_t,
            r.min_ttc,
            r.steps
        );
    }
    Ok(())
}
