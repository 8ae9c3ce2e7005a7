//! Ego vehicle kinematics: bicycle-model state with a semi-implicit Euler
//! update and friction-limited actuation.

use crate::error::{Result, SimError};
use crate::units::{self, A_MAX_PHYSICAL, A_PROP_MAX};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    /// Heading angle (rad), CCW from +x.
    pub heading: f64,
    /// Speed (m/s), never negative.
    pub speed: f64,
    /// Executed acceleration at the last step (m/s^2).
    pub accel: f64,
    /// Executed path curvature (1/m), positive left.
    pub curvature: f64,
    pub length: f64,
    pub width: f64,
}

impl VehicleState {
    pub fn new(id: u32, x: f64, y: f64, heading: f64, speed: f64) -> Self {
        VehicleState {
            id,
            x,
            y,
            heading,
            speed: speed.max(0.0),
            accel: 0.0,
            curvature: 0.0,
            length: 4.9,
            width: 1.8,
        }
    }
}

/// Advance one vehicle by one fixed step under commanded acceleration and
/// curvature. Acceleration is clamped to friction-scaled traction limits,
/// curvature to the steering-geometry limit; braking saturates at
/// standstill.
pub fn step_vehicle(
    state: &VehicleState,
    cmd_accel: f64,
    cmd_curvature: f64,
    mu: f64,
    dt: f64,
) -> Result<VehicleState> {
    for (name, v) in [
        ("cmd_accel", cmd_accel),
        ("cmd_curvature", cmd_curvature),
        ("mu", mu),
        ("speed", state.speed),
    ] {
        if !v.is_finite() {
            return Err(SimError::NonFinite {
                context: format!("step_vehicle {name}"),
                value: v,
            });
        }
    }

    let accel = cmd_accel.clamp(-mu * A_MAX_PHYSICAL, mu * A_PROP_MAX);
    let kappa = cmd_curvature.clamp(-units::kappa_max(), units::kappa_max());
    let speed = (state.speed + accel * dt).max(0.0);
    let heading = state.heading + speed * kappa * dt;
    Ok(VehicleState {
        id: state.id,
        x: state.x + speed * heading.cos() * dt,
        y: state.y + speed * heading.sin() * dt,
        heading,
        speed,
        accel,
        curvature: kappa,
        length: state.length,
        width: state.width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::DT;
    use approx::assert_abs_diff_eq;

    fn ego(speed: f64) -> VehicleState {
        VehicleState::new(0, 0.0, 0.0, 0.0, speed)
    }

    #[test]
    fn euler_update_matches_hand_evaluation() {
        let next = step_vehicle(&ego(10.0), 2.0, 0.0, 1.0, DT).unwrap();
        assert_abs_diff_eq!(next.speed, 10.02, epsilon = 1e-12);
        assert_abs_diff_eq!(next.x, 0.1002, epsilon = 1e-12);
    }

    #[test]
    fn braking_saturates_at_standstill() {
        let next = step_vehicle(&ego(0.0), -5.0, 0.0, 1.0, DT).unwrap();
        assert_abs_diff_eq!(next.speed, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(next.x, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn brake_clamped_to_friction_limit() {
        let next = step_vehicle(&ego(20.0), -12.0, 0.0, 1.0, DT).unwrap();
        assert_abs_diff_eq!(next.accel, -9.8, epsilon = 1e-12);
        assert_abs_diff_eq!(next.speed, 19.902, epsilon = 1e-12);
    }

    #[test]
    fn clamp_is_idempotent() {
        let a = step_vehicle(&ego(20.0), -9.8, crate::units::kappa_max(), 1.0, DT).unwrap();
        let b = step_vehicle(&ego(20.0), -50.0, 5.0, 1.0, DT).unwrap();
        assert_eq!(a.speed.to_bits(), b.speed.to_bits());
        assert_eq!(a.heading.to_bits(), b.heading.to_bits());
        assert_eq!(a.x.to_bits(), b.x.to_bits());
    }

    #[test]
    fn zero_commands_preserve_speed_and_heading() {
        let mut v = ego(15.0);
        v.heading = 0.3;
        for _ in 0..1000 {
            v = step_vehicle(&v, 0.0, 0.0, 1.0, DT).unwrap();
        }
        assert_abs_diff_eq!(v.speed, 15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.heading, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn curvature_clamped_to_steering_limit() {
        let next = step_vehicle(&ego(22.0), 0.0, 0.1, 1.0, DT).unwrap();
        assert!(next.curvature <= crate::units::kappa_max() + 1e-15);
    }

    #[test]
    fn non_finite_input_rejected() {
        assert!(step_vehicle(&ego(10.0), f64::NAN, 0.0, 1.0, DT).is_err());
    }
}
