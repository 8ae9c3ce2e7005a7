//! Build a small campaign grid in code, run it in parallel, and print the
//! aggregated intervention matrix.
//!
//!     cargo run --release --example campaign_runner

use adasim::campaign::{aggregate, expand_grid, run_campaign, summary_csv, CampaignConfig};
use adasim::perception::FaultKind;
use adasim::safety::{AebMode, InterventionConfig};
use adasim::scenario::ScenarioId;

fn main() -> Result<(), adasim::SimError> {
    let cfg = CampaignConfig {
        faults: vec![FaultKind::RelativeDistance, FaultKind::DesiredCurvature],
        init_gaps: vec![60.0],
        scenarios: vec![ScenarioId::S1, ScenarioId::S5],
        repetitions: 5,
        interventions: vec![
            InterventionConfig::none(),
            InterventionConfig {
                driver: true,
                safety_check: true,
                ..InterventionConfig::none()
            },
            InterventionConfig {
                safety_check: true,
                aeb: AebMode::Independent,
                ..InterventionConfig::none()
            },
        ],
        base_seed: 1,
        ..CampaignConfig::default()
    };

    let specs = expand_grid(&cfg)?;
    println!("running {} simulations...", specs.len());
    let results = run_campaign(&specs, &cfg.params, None)?;
    let summary = aggregate(&results)?;

    println!("\n{}", summary_csv(&summary));
    for row in &summary.rows {
        println!(
            "{:<22} {:<10} prevented {:>5.1}%  A1 {:>5.1}%  A2 {:>5.1}%",
            row.interventions,
            row.fault.map(|f| f.to_string()).unwrap_or_default(),
            row.prevented_pct,
            row.a1_pct,
            row.a2_pct
        );
    }
    Ok(())
}
