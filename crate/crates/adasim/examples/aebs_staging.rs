//! Show the speed-dependent AEBS staging thresholds and walk a synthetic
//! closing approach through the FCW / 90% / 95% / 100% braking stages.
//!
//!     cargo run --example aebs_staging

use adasim::perception::PerceptionFrame;
use adasim::safety::{aebs_step, aebs_thresholds, compute_ttc, AebsParams, AebsState};
use adasim::units::mph;

fn main() -> Result<(), adasim::SimError> {
    let p = AebsParams::default();

    println!(
        "TTC staging thresholds (a_driver {} m/s^2, t_react {} s):",
        p.a_driver, p.t_react
    );
    println!(
        "{:>10} {:>8} {:>8} {:>8} {:>8}",
        "speed", "t_fcw", "t_pb1", "t_pb2", "t_fb"
    );
    for v in [5.0, mph(30.0), mph(50.0), 30.0] {
        let th = aebs_thresholds(v, p.a_driver, p.t_react)?;
        println!(
            "{:>7.3} m/s {:>7.3}s {:>7.3}s {:>7.3}s {:>7.3}s",
            v, th.t_fcw, th.t_pb1, th.t_pb2, th.t_fb
        );
    }

    // A lead 140 m out, closing at a steady 12 m/s.
    println!("\nclosing approach at 50 mph (12 m/s closure):");
    let v_ego = mph(50.0);
    let mut state = AebsState::default();
    let mut last_stage = None;
    for step in 0..1100 {
        let rd = 140.0 - 12.0 * (step as f64) * 0.01;
        let frame = PerceptionFrame {
            rd,
            rs: 12.0,
            curvature: 0.0,
            lane_left: 0.95,
            lane_right: 0.95,
            lead_detected: true,
            out_of_road: false,
            t: step as f64 * 0.01,
        };
        let (cmd, fcw) = aebs_step(&mut state, &frame, v_ego, 1.0, &p)?;
        if last_stage != Some(state.stage) {
            println!(
                "  t {:>5.2} s  rd {:>6.1} m  ttc {:>5.2} s  stage {:?}  cmd {}  fcw {}",
                frame.t,
                rd,
                compute_ttc(rd, 12.0),
                state.stage,
                cmd.map(|a| format!("{a:.2} m/s^2"))
                    .unwrap_or_else(|| "-".into()),
                fcw
            );
            last_stage = Some(state.stage);
        }
    }
    Ok(())
}
