//! Replay the accumulated-error detector on a synthetic command stream: the
//! controller agrees with the predictor, diverges for a stretch, then agrees
//! again, and the detector enters and exits recovery accordingly.
//!
//!     cargo run --example cusum_detection

use adasim::mitigation::{cusum_step, CusumParams, CusumState};

fn main() -> Result<(), adasim::SimError> {
    let params = CusumParams { b0: 0.05, tau: 0.5 };
    let mut state = CusumState::new(params);
    println!("b = {}, tau = {}", params.b0, params.tau);

    let mut was_recovery = false;
    for step in 0..400 {
        // Healthy controller for 1 s, then a +1.5 m/s^2 divergence for 1.5 s,
        // then agreement again.
        let y_ml = 0.0;
        let y_op = if (100..250).contains(&step) {
            1.5
        } else {
            0.02
        };
        let executed = cusum_step(&mut state, y_ml, y_op)?;
        if state.recovery_mode != was_recovery {
            println!(
                "step {:>3}: {} (S = {:.3}, executing {})",
                step,
                if state.recovery_mode {
                    "entered recovery -> predictor output takes over"
                } else {
                    "exited recovery -> controller restored"
                },
                state.s,
                executed
            );
            was_recovery = state.recovery_mode;
        }
        assert!(state.s >= 0.0);
    }
    println!(
        "final: S = {:.3}, recovery = {}",
        state.s, state.recovery_mode
    );
    Ok(())
}
